#include "mgtd/metrics.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numeric>

#include "mgtd/error.hpp"

namespace mgtd {

namespace {

void require_both_classes(const ScoredSet& set) {
    if (set.scores.size() != set.labels.size())
        throw Error(ErrorKind::input, "scores and labels must have equal length");
    if (set.n_pos() == 0 || set.n_neg() == 0)
        throw Error(ErrorKind::metric, "metric needs at least one sample of each class");
}

std::vector<std::size_t> order_by_score(const ScoredSet& set, bool descending) {
    std::vector<std::size_t> order(set.scores.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return descending ? set.scores[a] > set.scores[b] : set.scores[a] < set.scores[b];
    });
    return order;
}

}  // namespace

long ScoredSet::n_pos() const {
    return std::count(labels.begin(), labels.end(), 1);
}

long ScoredSet::n_neg() const {
    return static_cast<long>(labels.size()) - n_pos();
}

double auroc(const ScoredSet& set) {
    require_both_classes(set);
    const auto order = order_by_score(set, /*descending=*/false);
    const long p = set.n_pos();
    const long n = set.n_neg();

    // Twice the positive rank sum stays integral even with .5 mid-ranks.
    long long rank_sum2 = 0;
    std::size_t i = 0;
    while (i < order.size()) {
        std::size_t j = i;
        long pos_in_group = 0;
        while (j < order.size() && set.scores[order[j]] == set.scores[order[i]]) {
            pos_in_group += set.labels[order[j]];
            ++j;
        }
        const long long g = static_cast<long long>(j - i);
        rank_sum2 += pos_in_group * (2 * static_cast<long long>(i) + g + 1);
        i = j;
    }
    const long long u2 = rank_sum2 - static_cast<long long>(p) * (p + 1);
    return static_cast<double>(u2) / (2.0 * static_cast<double>(p) * static_cast<double>(n));
}

std::vector<RocPoint> roc_curve(const ScoredSet& set) {
    require_both_classes(set);
    const auto order = order_by_score(set, /*descending=*/true);
    const double p = static_cast<double>(set.n_pos());
    const double n = static_cast<double>(set.n_neg());

    std::vector<RocPoint> points;
    points.push_back({0.0, 0.0});
    long tp = 0, fp = 0;
    std::size_t i = 0;
    while (i < order.size()) {
        std::size_t j = i;
        while (j < order.size() && set.scores[order[j]] == set.scores[order[i]]) {
            if (set.labels[order[j]] == 1) ++tp; else ++fp;
            ++j;
        }
        points.push_back({static_cast<double>(fp) / n, static_cast<double>(tp) / p});
        i = j;
    }
    return points;
}

double auroc_trapezoid(const ScoredSet& set) {
    require_both_classes(set);
    const auto order = order_by_score(set, /*descending=*/true);
    const long p = set.n_pos();
    const long n = set.n_neg();

    long long area2 = 0;  // accumulated in count space: sum dFP * (TP_prev + TP_cur)
    long tp = 0, fp = 0;
    std::size_t i = 0;
    while (i < order.size()) {
        std::size_t j = i;
        const long tp_prev = tp, fp_prev = fp;
        while (j < order.size() && set.scores[order[j]] == set.scores[order[i]]) {
            if (set.labels[order[j]] == 1) ++tp; else ++fp;
            ++j;
        }
        area2 += static_cast<long long>(fp - fp_prev) * (tp_prev + tp);
        i = j;
    }
    return static_cast<double>(area2) / (2.0 * static_cast<double>(p) * static_cast<double>(n));
}

double tpr_at_fpr(const ScoredSet& set, double target_fpr) {
    if (!(target_fpr >= 0.0 && target_fpr < 1.0))
        throw Error(ErrorKind::input, "target_fpr must be in [0,1)");
    require_both_classes(set);

    std::vector<double> negs;
    std::vector<double> poss;
    for (std::size_t i = 0; i < set.scores.size(); ++i)
        (set.labels[i] == 1 ? poss : negs).push_back(set.scores[i]);
    std::sort(negs.begin(), negs.end(), std::greater<>());

    auto allowed = static_cast<std::size_t>(
        std::floor(target_fpr * static_cast<double>(negs.size()) + 1e-9));
    if (allowed >= negs.size()) return 1.0;
    const double threshold = negs[allowed];

    const auto tp = std::count_if(poss.begin(), poss.end(),
                                  [&](double s) { return s > threshold; });
    return static_cast<double>(tp) / static_cast<double>(poss.size());
}

Histogram score_histogram(const ScoredSet& set, int bins) {
    if (bins < 1) throw Error(ErrorKind::input, "bins must be >= 1");
    if (set.scores.size() != set.labels.size())
        throw Error(ErrorKind::input, "scores and labels must have equal length");
    Histogram h;
    h.bins = bins;
    h.pos.assign(static_cast<std::size_t>(bins), 0);
    h.neg.assign(static_cast<std::size_t>(bins), 0);
    for (std::size_t i = 0; i < set.scores.size(); ++i) {
        int b = static_cast<int>(set.scores[i] * bins);
        b = std::clamp(b, 0, bins - 1);
        (set.labels[i] == 1 ? h.pos : h.neg)[static_cast<std::size_t>(b)] += 1;
    }
    return h;
}

ReportBundle build_report(const std::map<std::string, ScoredSet>& sets,
                          const std::vector<double>& fpr_targets) {
    ReportBundle bundle;
    for (const auto& [name, set] : sets) {
        if (set.scores.empty()) {
            bundle.notices.push_back("partition \"" + name + "\" is empty; skipped");
            continue;
        }
        if (set.n_pos() == 0 || set.n_neg() == 0) {
            bundle.notices.push_back("partition \"" + name + "\" has a single class; skipped");
            continue;
        }
        MetricReport r;
        r.auroc = auroc(set);
        for (double t : fpr_targets) r.tpr_at_fpr[t] = tpr_at_fpr(set, t);
        r.n_pos = set.n_pos();
        r.n_neg = set.n_neg();
        bundle.partitions.emplace(name, std::move(r));
    }
    const auto count = static_cast<double>(bundle.partitions.size());
    if (count > 0) {
        for (const auto& [name, r] : bundle.partitions) {
            bundle.avg.auroc += r.auroc / count;
            for (const auto& [t, v] : r.tpr_at_fpr) bundle.avg.tpr_at_fpr[t] += v / count;
            bundle.avg.n_pos += r.n_pos;
            bundle.avg.n_neg += r.n_neg;
        }
    }
    return bundle;
}

std::string format_double_key(double v) {
    char buf[32];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, ptr);
}

namespace {

nlohmann::ordered_json metric_report_json(const MetricReport& r) {
    nlohmann::ordered_json j;
    j["auroc"] = r.auroc;
    nlohmann::ordered_json tpr;
    for (const auto& [t, v] : r.tpr_at_fpr) tpr[format_double_key(t)] = v;
    j["tpr_at_fpr"] = std::move(tpr);
    j["n_pos"] = r.n_pos;
    j["n_neg"] = r.n_neg;
    return j;
}

}  // namespace

nlohmann::ordered_json report_to_json(const ReportBundle& bundle) {
    nlohmann::ordered_json j;
    for (const auto& [name, r] : bundle.partitions) j[name] = metric_report_json(r);
    j["avg"] = metric_report_json(bundle.avg);
    if (!bundle.notices.empty()) j["notices"] = bundle.notices;
    return j;
}

}  // namespace mgtd
