#pragma once

#include <array>
#include <span>
#include <vector>

#include "mgtd/rng.hpp"
#include "mgtd/vocab.hpp"

namespace mgtd {

/// Reference encoder: token embedding table, mean pool over the true length,
/// one tanh hidden layer, 2-way softmax head. Parameters live in one flat
/// vector laid out [embedding | w1 | b1 | w2 | b2] so optimizer steps,
/// finite-difference probes and checkpoints work on a single array.
struct DetectorParams {
    int vocab_size = 0;
    int embed_dim = 0;
    int hidden = 0;
    std::vector<double> theta;

    static DetectorParams init(int vocab_size, int embed_dim, int hidden, Rng& rng);

    std::size_t param_count() const { return theta.size(); }

    std::size_t offset_w1() const { return static_cast<std::size_t>(vocab_size) * embed_dim; }
    std::size_t offset_b1() const { return offset_w1() + static_cast<std::size_t>(hidden) * embed_dim; }
    std::size_t offset_w2() const { return offset_b1() + static_cast<std::size_t>(hidden); }
    std::size_t offset_b2() const { return offset_w2() + 2 * static_cast<std::size_t>(hidden); }

    std::span<const double> embedding() const { return {theta.data(), offset_w1()}; }
    std::span<double> embedding() { return {theta.data(), offset_w1()}; }
    std::span<const double> embedding_row(int token) const {
        return {theta.data() + static_cast<std::size_t>(token) * embed_dim,
                static_cast<std::size_t>(embed_dim)};
    }
    std::span<const double> w1() const { return {theta.data() + offset_w1(), offset_b1() - offset_w1()}; }
    std::span<const double> b1() const { return {theta.data() + offset_b1(), static_cast<std::size_t>(hidden)}; }
    std::span<const double> w2() const { return {theta.data() + offset_w2(), 2 * static_cast<std::size_t>(hidden)}; }
    std::span<const double> b2() const { return {theta.data() + offset_b2(), 2}; }
};

struct DetectorOutput {
    double score = 0.0;  // probability of label 1
    std::array<double, 2> logits{0.0, 0.0};
    std::vector<double> token_embeddings;  // L x d row-major, padding rows zero
    int rows = 0;
    int cols = 0;
};

/// Row i is the embedding of token i; rows at and beyond the true length are
/// zero. Token ids must be below vocab_size.
std::vector<double> embed(const TokenSeq& tokens, const DetectorParams& params);

/// Forward-pass cache reused by the gating coupling and by backward.
struct DetectorForward {
    std::vector<double> pooled;      // d
    std::vector<double> hidden_act;  // tanh outputs, H
    std::array<double, 2> logits{0.0, 0.0};
    std::array<double, 2> probs{0.0, 0.0};
};

DetectorForward detector_forward(const TokenSeq& tokens, const DetectorParams& params);

/// Deterministic scoring pass. score = softmax(logits)[1].
DetectorOutput score(const TokenSeq& tokens, const DetectorParams& params);

/// Accumulates gradients for one sample into `grad` (same layout as theta),
/// given the loss gradient at the logits plus any extra gradient arriving
/// directly at the pooled embedding (the supervisor's embedding path).
void detector_backward(const TokenSeq& tokens, const DetectorParams& params,
                       const DetectorForward& fwd, const std::array<double, 2>& dlogits,
                       std::span<const double> dpooled_extra, std::span<double> grad);

/// Mean binary cross-entropy with optional label smoothing:
/// targets y~ = y(1-s) + (1-y)s, scores clipped to [1e-7, 1-1e-7].
double original_loss(std::span<const double> scores, std::span<const int> labels,
                     double smoothing);

/// 1 iff score >= 0.5 (ties classify as MGT).
int predict_class(const DetectorOutput& output);

}  // namespace mgtd
