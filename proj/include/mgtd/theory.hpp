#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include <json.hpp>

#include "mgtd/corpus.hpp"

namespace mgtd {

/// Total variation distance between two categorical distributions:
/// 1/2 * sum |h(s) - m(s)|.
double tv_exact(std::span<const double> h, std::span<const double> m);

/// Exact TV between the longer-MGT product distribution (the (1-alpha)*n*k
/// leading positions draw from m, the trailing alpha*n*k from h) and the
/// all-human product h^(nk), by enumerating every length-n*k outcome.
/// alphabet^(nk) must stay within the 1e7 enumeration budget.
double tv_product_bruteforce(const SyntheticDist& dist, int n, int k, double alpha);

struct MonteCarloTv {
    double estimate = 0.0;
    double std_error = 0.0;
    long samples = 0;
};

/// Monte-Carlo fallback for cells over the enumeration budget: samples
/// outcomes from the MGT product P and averages max(0, 1 - Q/P), an
/// unbiased estimator of TV(P, Q).
MonteCarloTv tv_product_montecarlo(const SyntheticDist& dist, int n, int k,
                                   double alpha, long samples, std::uint64_t seed);

struct Theorem1Bounds {
    double lower = 0.0;  // 1 - 2 exp(-n k (1-alpha)^2 delta^2 / 2); may be negative (vacuous)
    double upper = 0.0;  // 1 - (1-delta)^(n k (1-alpha))
};

Theorem1Bounds theorem1_bounds(double delta, int n, int k, double alpha);

/// Upper bound on the optimal longer-text detector: 1 - 1/2 (1-delta)^(2 n k (1-alpha)).
double theorem2_bound(double delta, int n, int k, double alpha);

/// Exact AUROC of the likelihood-ratio detector between the longer-MGT
/// product distribution and h^(nk), with half credit for ties. Same
/// enumeration budget as tv_product_bruteforce.
double optimal_auroc_bruteforce(const SyntheticDist& dist, int n, int k, double alpha);

/// TV between the point mass at symbol 0 and m; verifies the closed form
/// TV(dirac0, m) = 1 - m(0) to 1e-12 before returning it.
double dirac_collapse_check(std::span<const double> m);

struct GridCell {
    SyntheticDist dist;
    int n = 1;
    int k = 1;
    double alpha = 0.0;
};

struct BoundCheck {
    double delta = 0.0;
    int n = 0, k = 0;
    double alpha = 0.0;
    double tv = 0.0;
    double lower = 0.0;
    double upper = 0.0;
    bool holds = false;
    bool vacuous_lower = false;  // lower bound <= 0 carries no information
};

struct AurocCheck {
    double auroc_optimal = 0.0;
    double bound = 0.0;
    bool holds = false;
};

struct CellResult {
    BoundCheck bound;
    AurocCheck auroc;
    bool over_budget = false;
};

struct SuiteReport {
    std::vector<CellResult> cells;
    int violations = 0;
    int over_budget = 0;
    bool tv_monotone_in_k = true;       // TV non-decreasing in k
    bool tv_antitone_in_alpha = true;   // TV non-increasing in alpha
    bool ok() const { return violations == 0 && tv_monotone_in_k && tv_antitone_in_alpha; }
};

/// Bernoulli pairs h=(0.5,0.5), m=(0.5-delta,0.5+delta) for
/// delta in {0.1,0.2,0.4}, n in {1,2}, k in {1,2,3}, alpha in {0} plus
/// {0.5 where alpha*n*k is integral}.
std::vector<GridCell> default_theorem_grid();

SuiteReport run_theorem_suite(const std::vector<GridCell>& grid);

nlohmann::ordered_json suite_report_to_json(const SuiteReport& report);

}  // namespace mgtd
