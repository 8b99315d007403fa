#include <doctest.h>

#include <cmath>

#include "mgtd/corpus.hpp"
#include "mgtd/detector.hpp"
#include "mgtd/error.hpp"
#include "mgtd/rng.hpp"
#include "mgtd/run_config.hpp"
#include "mgtd/trainer.hpp"

using namespace mgtd;

namespace {

TokenSeq seq_of(std::vector<int> ids, int length) {
    TokenSeq s;
    s.ids = std::move(ids);
    s.length = length;
    return s;
}

}  // namespace

TEST_CASE("embed returns embedding rows with zero padding") {
    Rng rng(1);
    auto params = DetectorParams::init(4, 3, 5, rng);

    const auto all_pad = embed(seq_of({0, 0, 0}, 0), params);
    for (double v : all_pad) CHECK(v == 0.0);

    // One-hot table: row i is the one-hot of token i.
    DetectorParams onehot = params;
    onehot.embed_dim = 4;
    onehot.hidden = 2;
    Rng rng2(2);
    onehot = DetectorParams::init(4, 4, 2, rng2);
    for (int t = 0; t < 4; ++t)
        for (int j = 0; j < 4; ++j)
            onehot.theta[static_cast<std::size_t>(t) * 4 + j] = t == j ? 1.0 : 0.0;
    const auto rows = embed(seq_of({2, 1, 0, 0}, 2), onehot);
    CHECK(rows[2] == 1.0);             // row 0 = one-hot of token 2
    CHECK(rows[4 + 1] == 1.0);         // row 1 = one-hot of token 1
    CHECK(rows[8 + 0] == 0.0);         // padding row zero
    CHECK(rows[8 + 2] == 0.0);

    CHECK(embed(seq_of({1, 2}, 2), params) == embed(seq_of({1, 2}, 2), params));
    CHECK_THROWS_AS(embed(seq_of({9}, 1), params), Error);
}

TEST_CASE("score is deterministic, padding-invariant and symmetric at zero head") {
    Rng rng(3);
    auto params = DetectorParams::init(6, 4, 8, rng);

    const auto a = score(seq_of({1, 2, 3, 0}, 3), params);
    const auto b = score(seq_of({1, 2, 3, 0, 0, 0}, 3), params);
    CHECK(a.score == b.score);
    CHECK(a.logits == b.logits);
    CHECK(a.score >= 0.0);
    CHECK(a.score <= 1.0);
    CHECK(a.score == doctest::Approx(1.0 / (1.0 + std::exp(a.logits[0] - a.logits[1]))));

    // Zero output layer: score exactly 0.5 for any input.
    for (std::size_t i = params.offset_w2(); i < params.theta.size(); ++i) params.theta[i] = 0.0;
    CHECK(score(seq_of({1, 2}, 2), params).score == 0.5);
    CHECK(score(seq_of({4, 5, 3}, 3), params).score == 0.5);

    CHECK_THROWS_AS(score(seq_of({}, 0), params), Error);
}

TEST_CASE("original_loss hand values") {
    // p = y exactly -> ~0 after clipping.
    CHECK(original_loss({std::vector<double>{1.0, 0.0}}, {std::vector<int>{1, 0}}, 0.0) <= 1e-6);

    // all 0.5 -> ln 2.
    CHECK(original_loss({std::vector<double>{0.5, 0.5}}, {std::vector<int>{1, 0}}, 0.0) ==
          doctest::Approx(std::log(2.0)).epsilon(1e-12));

    // p=[0.9,0.2], y=[1,0]: (-ln 0.9 - ln 0.8)/2 ~= 0.1643.
    const double loss =
        original_loss({std::vector<double>{0.9, 0.2}}, {std::vector<int>{1, 0}}, 0.0);
    CHECK(loss == doctest::Approx((-std::log(0.9) - std::log(0.8)) / 2.0).epsilon(1e-12));
    CHECK(loss == doctest::Approx(0.1643).epsilon(1e-3));

    CHECK_THROWS_AS(original_loss({std::vector<double>{0.5}}, {std::vector<int>{1, 0}}, 0.0), Error);
    CHECK_THROWS_AS(original_loss({std::vector<double>{0.5}}, {std::vector<int>{1}}, 0.5), Error);
}

TEST_CASE("label smoothing equals the affine mix of both-direction losses") {
    Rng rng(5);
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<double> p;
        std::vector<int> y;
        std::vector<int> y_flip;
        for (int i = 0; i < 9; ++i) {
            p.push_back(0.05 + 0.9 * rng.uniform());
            y.push_back(static_cast<int>(rng.below(2)));
            y_flip.push_back(1 - y.back());
        }
        const double s = 0.05 + 0.4 * rng.uniform();
        const double direct = original_loss(p, y, s);
        const double mixed = (1.0 - s) * original_loss(p, y, 0.0) + s * original_loss(p, y_flip, 0.0);
        CHECK(direct == doctest::Approx(mixed).epsilon(1e-9));
    }
}

TEST_CASE("predict_class thresholds at 0.5 with ties as MGT") {
    DetectorOutput out;
    out.score = 0.7;
    CHECK(predict_class(out) == 1);
    out.score = 0.3;
    CHECK(predict_class(out) == 0);
    out.score = 0.5;
    CHECK(predict_class(out) == 1);
}

TEST_CASE("backpropagated gradients match central finite differences") {
    // Reference encoder with well under 10^3 parameters.
    Rng rng(7);
    auto params = DetectorParams::init(6, 4, 8, rng);  // 24+32+8+16+2 = 82 params
    REQUIRE(params.param_count() <= 1000);

    const std::vector<TokenSeq> seqs = {seq_of({1, 2, 3, 0}, 3), seq_of({4, 5, 0, 0}, 2),
                                        seq_of({2, 2, 4, 1}, 4)};
    const std::vector<int> labels = {1, 0, 1};

    auto loss_at = [&](const DetectorParams& p) {
        std::vector<double> scores;
        for (const auto& s : seqs) scores.push_back(detector_forward(s, p).probs[1]);
        return original_loss(scores, labels, 0.0);
    };

    std::vector<double> grad(params.theta.size(), 0.0);
    const double inv = 1.0 / static_cast<double>(seqs.size());
    for (std::size_t i = 0; i < seqs.size(); ++i) {
        const auto fwd = detector_forward(seqs[i], params);
        const double y = labels[i];
        const std::array<double, 2> dlogits{(fwd.probs[0] - (1.0 - y)) * inv,
                                            (fwd.probs[1] - y) * inv};
        detector_backward(seqs[i], params, fwd, dlogits, {}, grad);
    }

    Rng pick(11);
    int checked = 0;
    while (checked < 10) {
        const auto idx = static_cast<std::size_t>(pick.below(params.theta.size()));
        const double eps = 1e-4;
        auto perturbed = params;
        perturbed.theta[idx] += eps;
        const double up = loss_at(perturbed);
        perturbed.theta[idx] -= 2 * eps;
        const double down = loss_at(perturbed);
        const double fd = (up - down) / (2 * eps);
        if (std::abs(fd) < 1e-8 && std::abs(grad[idx]) < 1e-8) {
            ++checked;
            continue;  // both zero (e.g. padding row)
        }
        const double rel = std::abs(grad[idx] - fd) / std::max({std::abs(fd), std::abs(grad[idx]), 1e-8});
        CHECK(rel <= 1e-3);
        ++checked;
    }
}

TEST_CASE("a trained tiny detector separates a linearly separable corpus") {
    SyntheticDist dist;
    dist.alphabet_size = 2;
    dist.h = {1.0, 0.0};
    dist.m = {0.0, 1.0};
    Corpus corpus = gen_synthetic(dist, 2, 40, 0.0, 3);
    corpus = split(std::move(corpus), 0.5, 3);

    RunConfig config;
    config.lambda = 0.0;
    config.epochs = 10;
    config.batch_size = 8;
    config.learning_rate = 0.5;
    config.max_len = 4;
    config.embed_dim = 4;
    config.hidden_width = 8;
    config.seed = 3;

    const auto result = train(config, corpus);
    REQUIRE(!result.diverged);

    const auto scored = score_split(corpus, Split::test, result.detector, result.vocab, 4);
    double mgt_mean = 0.0, hgt_mean = 0.0;
    long mgt_n = 0, hgt_n = 0;
    for (std::size_t i = 0; i < scored.scores.size(); ++i) {
        if (scored.labels[i] == 1) {
            mgt_mean += scored.scores[i];
            ++mgt_n;
        } else {
            hgt_mean += scored.scores[i];
            ++hgt_n;
        }
    }
    REQUIRE(mgt_n > 0);
    REQUIRE(hgt_n > 0);
    CHECK(mgt_mean / static_cast<double>(mgt_n) > hgt_mean / static_cast<double>(hgt_n));
}
