#include "mgtd/theory.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <limits>

#include "mgtd/error.hpp"
#include "mgtd/rng.hpp"

namespace mgtd {

namespace {

constexpr double kEnumBudget = 1e7;

/// Number of leading machine-drawn positions; alpha*n*k must be integral.
int machine_positions(int n, int k, double alpha) {
    if (n < 1 || k < 1) throw Error(ErrorKind::input, "n and k must be >= 1");
    if (alpha < 0.0 || alpha >= 1.0) throw Error(ErrorKind::input, "alpha must be in [0,1)");
    const double human_exact = alpha * n * k;
    const auto human = static_cast<int>(std::llround(human_exact));
    if (std::abs(human_exact - human) > 1e-9)
        throw Error(ErrorKind::input, "alpha*n*k must be integral");
    return n * k - human;
}

void check_budget(int alphabet, int positions) {
    double total = 1.0;
    for (int i = 0; i < positions; ++i) {
        total *= alphabet;
        if (total > kEnumBudget)
            throw Error(ErrorKind::size, "enumeration budget exceeded: alphabet^" +
                                             std::to_string(positions) + " > 1e7");
    }
}

/// Walks every outcome of the nk-position product space; `visit` receives
/// (P, Q) = (mixed-MGT pmf, all-human pmf) and the digit vector.
template <typename Visit>
void enumerate_outcomes(const SyntheticDist& dist, int positions, int machine, Visit visit) {
    std::vector<int> digits(static_cast<std::size_t>(positions), 0);
    for (;;) {
        double p = 1.0, q = 1.0;
        for (int i = 0; i < positions; ++i) {
            const int s = digits[static_cast<std::size_t>(i)];
            p *= (i < machine ? dist.m : dist.h)[static_cast<std::size_t>(s)];
            q *= dist.h[static_cast<std::size_t>(s)];
        }
        visit(p, q, digits);

        int pos = positions - 1;
        while (pos >= 0 && digits[static_cast<std::size_t>(pos)] == dist.alphabet_size - 1) {
            digits[static_cast<std::size_t>(pos)] = 0;
            --pos;
        }
        if (pos < 0) break;
        ++digits[static_cast<std::size_t>(pos)];
    }
}

}  // namespace

double tv_exact(std::span<const double> h, std::span<const double> m) {
    if (h.size() != m.size())
        throw Error(ErrorKind::input, "distributions must have equal length");
    double sum = 0.0;
    for (std::size_t i = 0; i < h.size(); ++i) sum += std::abs(h[i] - m[i]);
    return 0.5 * sum;
}

double tv_product_bruteforce(const SyntheticDist& dist, int n, int k, double alpha) {
    dist.validate();
    const int machine = machine_positions(n, k, alpha);
    const int positions = n * k;
    check_budget(dist.alphabet_size, positions);

    double sum = 0.0;
    enumerate_outcomes(dist, positions, machine,
                       [&](double p, double q, const std::vector<int>&) { sum += std::abs(p - q); });
    return 0.5 * sum;
}

MonteCarloTv tv_product_montecarlo(const SyntheticDist& dist, int n, int k,
                                   double alpha, long samples, std::uint64_t seed) {
    dist.validate();
    if (samples < 2) throw Error(ErrorKind::input, "samples must be >= 2");
    const int machine = machine_positions(n, k, alpha);
    const int positions = n * k;

    Rng rng(seed);
    double sum = 0.0, sum_sq = 0.0;
    for (long s = 0; s < samples; ++s) {
        double p = 1.0, q = 1.0;
        for (int i = 0; i < positions; ++i) {
            const auto& src = i < machine ? dist.m : dist.h;
            const int token = rng.categorical(src);
            p *= src[static_cast<std::size_t>(token)];
            q *= dist.h[static_cast<std::size_t>(token)];
        }
        const double v = std::max(0.0, 1.0 - q / p);
        sum += v;
        sum_sq += v * v;
    }
    MonteCarloTv out;
    out.samples = samples;
    out.estimate = sum / static_cast<double>(samples);
    const double var =
        std::max(0.0, sum_sq / static_cast<double>(samples) - out.estimate * out.estimate);
    out.std_error = std::sqrt(var / static_cast<double>(samples));
    return out;
}

Theorem1Bounds theorem1_bounds(double delta, int n, int k, double alpha) {
    const double eff = n * k * (1.0 - alpha);
    Theorem1Bounds b;
    b.lower = 1.0 - 2.0 * std::exp(-eff * (1.0 - alpha) * delta * delta / 2.0);
    b.upper = 1.0 - std::pow(1.0 - delta, eff);
    return b;
}

double theorem2_bound(double delta, int n, int k, double alpha) {
    return 1.0 - 0.5 * std::pow(1.0 - delta, 2.0 * n * k * (1.0 - alpha));
}

double optimal_auroc_bruteforce(const SyntheticDist& dist, int n, int k, double alpha) {
    dist.validate();
    const int machine = machine_positions(n, k, alpha);
    const int positions = n * k;
    check_budget(dist.alphabet_size, positions);

    // Per-symbol log likelihood ratios, computed once so that outcomes with
    // identical machine-block symbol counts score exactly equal.
    std::vector<double> log_ratio(static_cast<std::size_t>(dist.alphabet_size));
    for (int s = 0; s < dist.alphabet_size; ++s) {
        const double m = dist.m[static_cast<std::size_t>(s)];
        const double h = dist.h[static_cast<std::size_t>(s)];
        if (m == 0.0 && h == 0.0)
            log_ratio[static_cast<std::size_t>(s)] = 0.0;  // unreachable symbol
        else if (m == 0.0)
            log_ratio[static_cast<std::size_t>(s)] = -std::numeric_limits<double>::infinity();
        else if (h == 0.0)
            log_ratio[static_cast<std::size_t>(s)] = std::numeric_limits<double>::infinity();
        else
            log_ratio[static_cast<std::size_t>(s)] = std::log(m) - std::log(h);
    }

    // Aggregate P- and Q-mass per likelihood-ratio value.
    std::map<double, std::pair<double, double>> mass;
    std::vector<long> counts(static_cast<std::size_t>(dist.alphabet_size));
    enumerate_outcomes(dist, positions, machine, [&](double p, double q, const std::vector<int>& digits) {
        if (p == 0.0 && q == 0.0) return;
        std::fill(counts.begin(), counts.end(), 0L);
        for (int i = 0; i < machine; ++i) ++counts[static_cast<std::size_t>(digits[static_cast<std::size_t>(i)])];
        double score = 0.0;
        for (int s = 0; s < dist.alphabet_size; ++s)
            if (counts[static_cast<std::size_t>(s)] > 0)
                score += static_cast<double>(counts[static_cast<std::size_t>(s)]) *
                         log_ratio[static_cast<std::size_t>(s)];
        auto& cell = mass[score];
        cell.first += p;
        cell.second += q;
    });

    // Ascending sweep: positives above negatives win, equal scores half-credit.
    double auc = 0.0;
    double q_below = 0.0;
    for (const auto& [score, pq] : mass) {
        auc += pq.first * (q_below + 0.5 * pq.second);
        q_below += pq.second;
    }
    return auc;
}

double dirac_collapse_check(std::span<const double> m) {
    if (m.empty()) throw Error(ErrorKind::input, "m must be nonempty");
    std::vector<double> dirac(m.size(), 0.0);
    dirac[0] = 1.0;
    const double tv = tv_exact(dirac, m);
    const double expected = 1.0 - m[0];
    if (std::abs(tv - expected) > 1e-12)
        throw Error(ErrorKind::validation, "TV(dirac0, m) != 1 - m(0)");
    return tv;
}

std::vector<GridCell> default_theorem_grid() {
    std::vector<GridCell> grid;
    for (double delta : {0.1, 0.2, 0.4}) {
        SyntheticDist dist;
        dist.alphabet_size = 2;
        dist.h = {0.5, 0.5};
        dist.m = {0.5 - delta, 0.5 + delta};
        for (int n : {1, 2})
            for (int k : {1, 2, 3})
                for (double alpha : {0.0, 0.5}) {
                    const double human = alpha * n * k;
                    if (std::abs(human - std::llround(human)) > 1e-9) continue;
                    grid.push_back({dist, n, k, alpha});
                }
    }
    return grid;
}

SuiteReport run_theorem_suite(const std::vector<GridCell>& grid) {
    SuiteReport report;
    for (const auto& cell : grid) {
        CellResult result;
        auto& b = result.bound;
        b.delta = tv_exact(cell.dist.h, cell.dist.m);
        b.n = cell.n;
        b.k = cell.k;
        b.alpha = cell.alpha;
        try {
            b.tv = tv_product_bruteforce(cell.dist, cell.n, cell.k, cell.alpha);
            result.auroc.auroc_optimal =
                optimal_auroc_bruteforce(cell.dist, cell.n, cell.k, cell.alpha);
        } catch (const Error& e) {
            if (e.kind() != ErrorKind::size) throw;
            result.over_budget = true;
            ++report.over_budget;
            report.cells.push_back(result);
            continue;
        }
        const auto bounds = theorem1_bounds(b.delta, b.n, b.k, b.alpha);
        b.lower = bounds.lower;
        b.upper = bounds.upper;
        b.vacuous_lower = b.lower <= 0.0;
        b.holds = b.tv >= b.lower - 1e-9 && b.tv <= b.upper + 1e-9;

        result.auroc.bound = theorem2_bound(b.delta, b.n, b.k, b.alpha);
        result.auroc.holds = result.auroc.auroc_optimal <= result.auroc.bound + 1e-9;

        if (!b.holds || !result.auroc.holds) ++report.violations;
        report.cells.push_back(result);
    }

    // TV must not decrease in k (fixed dist, n, alpha) and must not increase
    // in alpha (fixed dist, n, k).
    auto dist_key = [](const GridCell& c) {
        std::string key = std::to_string(c.dist.alphabet_size);
        for (double v : c.dist.h) key += "," + std::to_string(v);
        for (double v : c.dist.m) key += ";" + std::to_string(v);
        return key;
    };
    std::map<std::string, std::vector<std::pair<int, double>>> by_k;
    std::map<std::string, std::vector<std::pair<double, double>>> by_alpha;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        if (report.cells[i].over_budget) continue;
        const auto& c = grid[i];
        const double tv = report.cells[i].bound.tv;
        by_k[dist_key(c) + "|n=" + std::to_string(c.n) + "|a=" + std::to_string(c.alpha)]
            .push_back({c.k, tv});
        by_alpha[dist_key(c) + "|n=" + std::to_string(c.n) + "|k=" + std::to_string(c.k)]
            .push_back({c.alpha, tv});
    }
    for (auto& [key, items] : by_k) {
        std::sort(items.begin(), items.end());
        for (std::size_t i = 1; i < items.size(); ++i)
            if (items[i].second < items[i - 1].second - 1e-12) report.tv_monotone_in_k = false;
    }
    for (auto& [key, items] : by_alpha) {
        std::sort(items.begin(), items.end());
        for (std::size_t i = 1; i < items.size(); ++i)
            if (items[i].second > items[i - 1].second + 1e-12) report.tv_antitone_in_alpha = false;
    }
    return report;
}

nlohmann::ordered_json suite_report_to_json(const SuiteReport& report) {
    nlohmann::ordered_json cells = nlohmann::ordered_json::array();
    for (const auto& c : report.cells) {
        nlohmann::ordered_json j;
        j["params"] = {{"delta", c.bound.delta},
                       {"n", c.bound.n},
                       {"k", c.bound.k},
                       {"alpha", c.bound.alpha}};
        if (c.over_budget) {
            j["over_budget"] = true;
        } else {
            j["tv"] = c.bound.tv;
            j["lower"] = c.bound.lower;
            j["upper"] = c.bound.upper;
            j["vacuous_lower"] = c.bound.vacuous_lower;
            j["auroc"] = c.auroc.auroc_optimal;
            j["auroc_bound"] = c.auroc.bound;
            j["holds"] = c.bound.holds && c.auroc.holds;
        }
        cells.push_back(std::move(j));
    }
    nlohmann::ordered_json j;
    j["cells"] = std::move(cells);
    j["summary"] = {{"cells", report.cells.size()},
                    {"violations", report.violations},
                    {"over_budget", report.over_budget},
                    {"tv_monotone_in_k", report.tv_monotone_in_k},
                    {"tv_antitone_in_alpha", report.tv_antitone_in_alpha},
                    {"ok", report.ok()}};
    return j;
}

}  // namespace mgtd
