#pragma once

#include <map>
#include <string>
#include <vector>

#include <json.hpp>

namespace mgtd {

struct ScoredSet {
    std::vector<double> scores;  // in [0,1]
    std::vector<int> labels;     // 0/1

    long n_pos() const;
    long n_neg() const;
};

/// AUROC by the rank statistic: P(score_pos > score_neg) + 1/2 P(tie).
/// Tie groups get mid-ranks; the numerator is accumulated in integers so the
/// result is exact. Throws Error(metric) unless both classes are present.
double auroc(const ScoredSet& set);

struct RocPoint {
    double fpr = 0.0;
    double tpr = 0.0;
};

/// ROC sweep from the most permissive to the strictest threshold; tied scores
/// move diagonally in one step.
std::vector<RocPoint> roc_curve(const ScoredSet& set);

/// AUROC by trapezoidal integration of the ROC curve (independent route,
/// also exact in integer count space).
double auroc_trapezoid(const ScoredSet& set);

/// TPR at the smallest threshold t with FPR(t) <= target_fpr, where a sample
/// is called positive iff score > t; ties at the threshold count as negative,
/// so the cap of floor(target_fpr * n_neg) false positives is never exceeded.
double tpr_at_fpr(const ScoredSet& set, double target_fpr);

struct Histogram {
    int bins = 0;
    std::vector<long> pos;  // counts per uniform bin over [0,1], label 1
    std::vector<long> neg;  // label 0
};

Histogram score_histogram(const ScoredSet& set, int bins);

struct MetricReport {
    double auroc = 0.0;
    std::map<double, double> tpr_at_fpr;
    long n_pos = 0;
    long n_neg = 0;
};

struct ReportBundle {
    std::map<std::string, MetricReport> partitions;
    MetricReport avg;
    std::vector<std::string> notices;  // skipped partitions etc.
};

/// Per-partition metrics plus arithmetic-mean averages. Partitions missing a
/// class are skipped with a notice.
ReportBundle build_report(const std::map<std::string, ScoredSet>& sets,
                          const std::vector<double>& fpr_targets);

/// {"<partition>": {"auroc":f, "tpr_at_fpr": {"0.01": f,...}, "n_pos":i,
///  "n_neg":i}, "avg": {...}} with stable key ordering.
nlohmann::ordered_json report_to_json(const ReportBundle& bundle);

std::string format_double_key(double v);

}  // namespace mgtd
