#include "mgtd/detector.hpp"

#include <algorithm>
#include <cmath>

#include "mgtd/error.hpp"
#include "mgtd/linalg.hpp"

namespace mgtd {

namespace {

constexpr double kScoreClip = 1e-7;

void check_tokens(const TokenSeq& tokens, const DetectorParams& params) {
    if (tokens.length > static_cast<int>(tokens.ids.size()))
        throw Error(ErrorKind::input, "true length exceeds token buffer");
    for (int i = 0; i < tokens.length; ++i) {
        const int id = tokens.ids[static_cast<std::size_t>(i)];
        if (id < 0 || id >= params.vocab_size)
            throw Error(ErrorKind::input, "token id " + std::to_string(id) + " out of range");
    }
}

}  // namespace

DetectorParams DetectorParams::init(int vocab_size, int embed_dim, int hidden, Rng& rng) {
    DetectorParams p;
    p.vocab_size = vocab_size;
    p.embed_dim = embed_dim;
    p.hidden = hidden;
    p.theta.assign(static_cast<std::size_t>(vocab_size) * embed_dim +
                       static_cast<std::size_t>(hidden) * embed_dim + hidden +
                       2 * static_cast<std::size_t>(hidden) + 2,
                   0.0);
    // Embeddings unit-scale; weight matrices scaled by 1/sqrt(fan_in); biases zero.
    // The padding row (id 0) stays zero and is excluded from pooling anyway.
    for (std::size_t i = static_cast<std::size_t>(embed_dim); i < p.offset_w1(); ++i)
        p.theta[i] = rng.normal();
    const double w1_scale = 1.0 / std::sqrt(static_cast<double>(embed_dim));
    for (std::size_t i = p.offset_w1(); i < p.offset_b1(); ++i) p.theta[i] = rng.normal() * w1_scale;
    const double w2_scale = 1.0 / std::sqrt(static_cast<double>(hidden));
    for (std::size_t i = p.offset_w2(); i < p.offset_b2(); ++i) p.theta[i] = rng.normal() * w2_scale;
    return p;
}

std::vector<double> embed(const TokenSeq& tokens, const DetectorParams& params) {
    check_tokens(tokens, params);
    const auto d = static_cast<std::size_t>(params.embed_dim);
    std::vector<double> out(tokens.ids.size() * d, 0.0);
    for (int i = 0; i < tokens.length; ++i) {
        const auto row = params.embedding_row(tokens.ids[static_cast<std::size_t>(i)]);
        std::copy(row.begin(), row.end(), out.begin() + static_cast<std::size_t>(i) * d);
    }
    return out;
}

DetectorForward detector_forward(const TokenSeq& tokens, const DetectorParams& params) {
    check_tokens(tokens, params);
    DetectorForward fwd;
    fwd.pooled.assign(static_cast<std::size_t>(params.embed_dim), 0.0);
    if (tokens.length > 0) {
        for (int i = 0; i < tokens.length; ++i)
            axpy(1.0, params.embedding_row(tokens.ids[static_cast<std::size_t>(i)]), fwd.pooled);
        const double inv = 1.0 / tokens.length;
        for (double& v : fwd.pooled) v *= inv;
    }

    fwd.hidden_act.assign(static_cast<std::size_t>(params.hidden), 0.0);
    matvec(params.w1(), params.hidden, params.embed_dim, fwd.pooled, fwd.hidden_act);
    const auto b1 = params.b1();
    for (int h = 0; h < params.hidden; ++h)
        fwd.hidden_act[static_cast<std::size_t>(h)] =
            std::tanh(fwd.hidden_act[static_cast<std::size_t>(h)] + b1[static_cast<std::size_t>(h)]);

    const auto w2 = params.w2();
    const auto b2 = params.b2();
    const auto h = static_cast<std::size_t>(params.hidden);
    fwd.logits[0] = dot(w2.subspan(0, h), fwd.hidden_act) + b2[0];
    fwd.logits[1] = dot(w2.subspan(h, h), fwd.hidden_act) + b2[1];
    fwd.probs = softmax2(fwd.logits[0], fwd.logits[1]);
    return fwd;
}

DetectorOutput score(const TokenSeq& tokens, const DetectorParams& params) {
    if (tokens.ids.empty()) throw Error(ErrorKind::input, "empty token sequence");
    const auto fwd = detector_forward(tokens, params);
    DetectorOutput out;
    out.score = fwd.probs[1];
    out.logits = fwd.logits;
    out.token_embeddings = embed(tokens, params);
    out.rows = static_cast<int>(tokens.ids.size());
    out.cols = params.embed_dim;
    return out;
}

void detector_backward(const TokenSeq& tokens, const DetectorParams& params,
                       const DetectorForward& fwd, const std::array<double, 2>& dlogits,
                       std::span<const double> dpooled_extra, std::span<double> grad) {
    const auto h = static_cast<std::size_t>(params.hidden);
    const auto d = static_cast<std::size_t>(params.embed_dim);

    // Output layer.
    std::span<double> gw2 = grad.subspan(params.offset_w2(), 2 * h);
    std::span<double> gb2 = grad.subspan(params.offset_b2(), 2);
    axpy(dlogits[0], fwd.hidden_act, gw2.subspan(0, h));
    axpy(dlogits[1], fwd.hidden_act, gw2.subspan(h, h));
    gb2[0] += dlogits[0];
    gb2[1] += dlogits[1];

    // Through tanh.
    std::vector<double> dhidden(h, 0.0);
    const auto w2 = params.w2();
    axpy(dlogits[0], w2.subspan(0, h), dhidden);
    axpy(dlogits[1], w2.subspan(h, h), dhidden);
    for (std::size_t i = 0; i < h; ++i)
        dhidden[i] *= 1.0 - fwd.hidden_act[i] * fwd.hidden_act[i];

    // Hidden layer.
    std::span<double> gw1 = grad.subspan(params.offset_w1(), h * d);
    std::span<double> gb1 = grad.subspan(params.offset_b1(), h);
    outer_accum(dhidden, fwd.pooled, gw1, params.hidden, params.embed_dim);
    axpy(1.0, dhidden, gb1);

    // Pooled embedding: hidden-layer contribution plus any direct gradient.
    std::vector<double> dpooled(d, 0.0);
    matvec_t_accum(params.w1(), params.hidden, params.embed_dim, dhidden, dpooled);
    if (!dpooled_extra.empty()) axpy(1.0, dpooled_extra, dpooled);

    if (tokens.length > 0) {
        const double inv = 1.0 / tokens.length;
        for (int i = 0; i < tokens.length; ++i) {
            const auto row = static_cast<std::size_t>(tokens.ids[static_cast<std::size_t>(i)]) * d;
            axpy(inv, dpooled, grad.subspan(row, d));
        }
    }
}

double original_loss(std::span<const double> scores, std::span<const int> labels,
                     double smoothing) {
    if (scores.size() != labels.size() || scores.empty())
        throw Error(ErrorKind::input, "scores and labels must have equal nonzero length");
    if (smoothing < 0.0 || smoothing >= 0.5)
        throw Error(ErrorKind::input, "smoothing must be in [0, 0.5)");
    double sum = 0.0;
    for (std::size_t i = 0; i < scores.size(); ++i) {
        const double p = std::clamp(scores[i], kScoreClip, 1.0 - kScoreClip);
        const double y = labels[i] == 1 ? 1.0 - smoothing : smoothing;
        sum -= y * std::log(p) + (1.0 - y) * std::log(1.0 - p);
    }
    return sum / static_cast<double>(scores.size());
}

int predict_class(const DetectorOutput& output) {
    return output.score >= 0.5 ? 1 : 0;
}

}  // namespace mgtd
