#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "mgtd/error.hpp"
#include "mgtd/metrics.hpp"
#include "mgtd/rng.hpp"

using namespace mgtd;

namespace {

/// Independent O(n^2) oracle: P(pos > neg) + 1/2 P(tie) by explicit pairs.
double auroc_pairwise(const ScoredSet& set) {
    double wins = 0.0, ties = 0.0;
    long pairs = 0;
    for (std::size_t i = 0; i < set.scores.size(); ++i) {
        if (set.labels[i] != 1) continue;
        for (std::size_t j = 0; j < set.scores.size(); ++j) {
            if (set.labels[j] != 0) continue;
            ++pairs;
            if (set.scores[i] > set.scores[j]) wins += 1.0;
            else if (set.scores[i] == set.scores[j]) ties += 1.0;
        }
    }
    return (wins + 0.5 * ties) / static_cast<double>(pairs);
}

ScoredSet random_set(Rng& rng, int n, bool with_ties) {
    ScoredSet set;
    for (int i = 0; i < n; ++i) {
        double s = rng.uniform();
        if (with_ties) s = std::floor(s * 8.0) / 8.0;  // heavy ties
        set.scores.push_back(s);
        set.labels.push_back(rng.bernoulli(0.4) ? 1 : 0);
    }
    // Guarantee both classes.
    set.labels[0] = 0;
    set.labels[static_cast<std::size_t>(n - 1)] = 1;
    return set;
}

}  // namespace

TEST_CASE("auroc matches the hand example and trivial cases") {
    // pos=[0.9,0.8], neg=[0.4,0.85]: 3 of 4 pairs win -> 0.75.
    ScoredSet set{{0.9, 0.8, 0.4, 0.85}, {1, 1, 0, 0}};
    CHECK(auroc(set) == doctest::Approx(0.75).epsilon(1e-15));
    CHECK(auroc_pairwise(set) == doctest::Approx(0.75).epsilon(1e-15));

    ScoredSet separated{{0.9, 0.8, 0.1, 0.2}, {1, 1, 0, 0}};
    CHECK(auroc(separated) == 1.0);

    ScoredSet all_equal{{0.5, 0.5, 0.5, 0.5}, {1, 1, 0, 0}};
    CHECK(auroc(all_equal) == 0.5);

    ScoredSet single{{0.5, 0.6}, {1, 1}};
    CHECK_THROWS_AS(auroc(single), Error);
}

TEST_CASE("rank-formula auroc equals the pairwise oracle and the trapezoid") {
    Rng rng(11);
    for (int trial = 0; trial < 50; ++trial) {
        const auto set = random_set(rng, 40 + static_cast<int>(rng.below(200)), trial % 2 == 0);
        const double by_rank = auroc(set);
        CHECK(by_rank == doctest::Approx(auroc_pairwise(set)).epsilon(1e-12));
        CHECK(std::abs(by_rank - auroc_trapezoid(set)) <= 1e-12);
    }
}

TEST_CASE("auroc is invariant under strictly increasing transforms") {
    Rng rng(13);
    for (int trial = 0; trial < 10; ++trial) {
        auto set = random_set(rng, 100, true);
        const double before = auroc(set);
        for (double& s : set.scores) s = 1.0 / (1.0 + std::exp(-(3.0 * s - 1.0)));
        CHECK(auroc(set) == doctest::Approx(before).epsilon(1e-12));
    }
}

TEST_CASE("tpr_at_fpr follows the strict-threshold rule") {
    // As written in the module example the positives all clear the largest
    // negative, so the max TPR under the cap is 1.0.
    ScoredSet as_written{{0.9, 0.8, 0.4, 0.3, 0.2, 0.1}, {1, 1, 1, 0, 0, 0}};
    CHECK(tpr_at_fpr(as_written, 0.01) == 1.0);

    // Tie at the threshold counts as negative: TPR = 2/3.
    ScoredSet tie_case{{0.9, 0.8, 0.3, 0.3, 0.2, 0.1}, {1, 1, 1, 0, 0, 0}};
    CHECK(tpr_at_fpr(tie_case, 0.01) == doctest::Approx(2.0 / 3.0).epsilon(1e-15));

    // target 0.99 admits two false positives here.
    CHECK(tpr_at_fpr(as_written, 0.99) == 1.0);

    // All positives below all negatives.
    ScoredSet hopeless{{0.1, 0.2, 0.8, 0.9}, {1, 1, 0, 0}};
    CHECK(tpr_at_fpr(hopeless, 0.01) == 0.0);

    CHECK_THROWS_AS(tpr_at_fpr(as_written, 1.0), Error);
}

TEST_CASE("tpr_at_fpr never exceeds the false-positive cap and is monotone") {
    Rng rng(17);
    for (int trial = 0; trial < 20; ++trial) {
        const auto set = random_set(rng, 120, trial % 2 == 0);
        double prev = -1.0;
        for (double target : {0.0, 0.01, 0.05, 0.1, 0.3, 0.5, 0.9}) {
            const double tpr = tpr_at_fpr(set, target);
            CHECK(tpr >= prev);  // non-decreasing in the target
            prev = tpr;

            // Recover the implied threshold and verify the cap directly.
            std::vector<double> negs;
            for (std::size_t i = 0; i < set.scores.size(); ++i)
                if (set.labels[i] == 0) negs.push_back(set.scores[i]);
            std::sort(negs.begin(), negs.end(), std::greater<>());
            const auto allowed =
                static_cast<std::size_t>(std::floor(target * static_cast<double>(negs.size()) + 1e-9));
            if (allowed < negs.size()) {
                const double threshold = negs[allowed];
                const auto fp = static_cast<double>(
                    std::count_if(negs.begin(), negs.end(), [&](double s) { return s > threshold; }));
                CHECK(fp / static_cast<double>(negs.size()) <= target + 1e-12);
            }
        }
    }
}

TEST_CASE("score_histogram bins per class") {
    ScoredSet zeros{{0.0, 0.0, 0.0}, {1, 0, 0}};
    auto h = score_histogram(zeros, 4);
    CHECK(h.pos[0] == 1);
    CHECK(h.neg[0] == 2);

    Rng rng(23);
    ScoredSet set;
    for (int i = 0; i < 5000; ++i) {
        set.scores.push_back(rng.uniform());
        set.labels.push_back(static_cast<int>(rng.below(2)));
    }
    h = score_histogram(set, 10);
    long pos_total = 0, neg_total = 0;
    for (int b = 0; b < 10; ++b) {
        pos_total += h.pos[static_cast<std::size_t>(b)];
        neg_total += h.neg[static_cast<std::size_t>(b)];
    }
    CHECK(pos_total == set.n_pos());
    CHECK(neg_total == set.n_neg());

    CHECK(score_histogram(ScoredSet{{1.0}, {1}}, 10).pos[9] == 1);
    CHECK_THROWS_AS(score_histogram(set, 0), Error);
}

TEST_CASE("uniform scores spread evenly over bins") {
    Rng rng(29);
    ScoredSet set;
    for (int i = 0; i < 100000; ++i) {
        set.scores.push_back(rng.uniform());
        set.labels.push_back(1);
    }
    const auto h = score_histogram(set, 10);
    for (int b = 0; b < 10; ++b)
        CHECK(std::abs(h.pos[static_cast<std::size_t>(b)] - 10000L) < 500);
}

TEST_CASE("build_report averages partitions and skips degenerate ones") {
    std::map<std::string, ScoredSet> sets;
    sets["a"] = {{0.9, 0.8, 0.1, 0.2}, {1, 1, 0, 0}};          // auroc 1.0
    sets["b"] = {{0.5, 0.5, 0.5, 0.5}, {1, 1, 0, 0}};          // auroc 0.5
    sets["only_pos"] = {{0.9}, {1}};                           // skipped
    sets["empty"] = {};                                        // skipped

    const auto bundle = build_report(sets, {0.01, 0.5});
    REQUIRE(bundle.partitions.size() == 2);
    CHECK(bundle.avg.auroc == doctest::Approx(0.75).epsilon(1e-15));
    CHECK(bundle.notices.size() == 2);
    CHECK(bundle.partitions.at("a").tpr_at_fpr.at(0.01) == 1.0);

    // Single partition: the average equals it.
    const auto solo = build_report({{"a", sets["a"]}}, {0.01});
    CHECK(solo.avg.auroc == solo.partitions.at("a").auroc);

    // JSON round-trip preserves values and carries the default key.
    const auto j = report_to_json(bundle);
    const auto parsed = nlohmann::json::parse(j.dump());
    CHECK(parsed["a"]["auroc"].get<double>() == bundle.partitions.at("a").auroc);
    CHECK(parsed["a"]["tpr_at_fpr"].contains("0.01"));
    CHECK(parsed["avg"]["auroc"].get<double>() == bundle.avg.auroc);
}
