#pragma once

#include <array>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mgtd/rng.hpp"

namespace mgtd {

enum class GateMode { soft, straight_through };

std::string to_string(GateMode mode);
std::optional<GateMode> gate_mode_from_string(const std::string& s);

/// One Gumbel-Softmax draw over the detector's two class probabilities.
/// The gate value is relaxed[1] in soft mode; in straight-through mode the
/// forward value is hard[1] while gradients flow through the relaxed sample.
struct GateSample {
    std::array<double, 2> probs{0.0, 0.0};    // clipped + renormalized input
    std::array<double, 2> relaxed{0.0, 0.0};  // softmax((log p + G)/tau)
    std::array<double, 2> hard{0.0, 0.0};     // one-hot at argmax(relaxed)
    double temperature = 1.0;
    GateMode mode = GateMode::straight_through;

    double value() const { return mode == GateMode::soft ? relaxed[1] : hard[1]; }
};

GateSample gumbel_gate(const std::array<double, 2>& probs, double temperature,
                       GateMode mode, Rng& rng);

/// Deterministic core with externally drawn Gumbel noise; lets callers freeze
/// the noise for finite-difference checks and replayable steps.
GateSample gumbel_gate_with_noise(const std::array<double, 2>& probs, double temperature,
                                  GateMode mode, const std::array<double, 2>& noise);

/// d(relaxed[1]) / d(detector logits): (s1 * s0 / tau) * (-1, +1).
std::array<double, 2> gate_logit_grad(const GateSample& gate);

/// k member indices drawn uniformly with replacement from batch positions
/// with label y_long; nullopt when the class is absent (caller drops the
/// longer text).
std::optional<std::vector<int>> sample_long_indices(const std::vector<int>& labels, int k,
                                                    int y_long, Rng& rng);

/// Per member: mean over the first true_length rows of its L x d embedding
/// matrix, scaled by its gate; segments concatenate in member order.
std::vector<double> assemble_long_input(const std::vector<std::vector<double>>& member_embeddings,
                                        const std::vector<int>& true_lengths,
                                        const std::vector<double>& gates, int embed_dim);

/// Three fully connected layers with output widths 256, 64 and 2 over the
/// concatenated gated member embeddings (input width k*d). Flat layout
/// [v1 | c1 | v2 | c2 | v3 | c3].
struct SupervisorParams {
    static constexpr int kH1 = 256;
    static constexpr int kH2 = 64;

    int input_dim = 0;
    std::vector<double> theta;

    static SupervisorParams init(int input_dim, Rng& rng);

    std::size_t param_count() const { return theta.size(); }
    std::size_t offset_c1() const { return static_cast<std::size_t>(kH1) * input_dim; }
    std::size_t offset_v2() const { return offset_c1() + kH1; }
    std::size_t offset_c2() const { return offset_v2() + static_cast<std::size_t>(kH2) * kH1; }
    std::size_t offset_v3() const { return offset_c2() + kH2; }
    std::size_t offset_c3() const { return offset_v3() + 2 * kH2; }

    std::span<const double> v1() const { return {theta.data(), offset_c1()}; }
    std::span<const double> c1() const { return {theta.data() + offset_c1(), kH1}; }
    std::span<const double> v2() const { return {theta.data() + offset_v2(), static_cast<std::size_t>(kH2) * kH1}; }
    std::span<const double> c2() const { return {theta.data() + offset_c2(), kH2}; }
    std::span<const double> v3() const { return {theta.data() + offset_v3(), 2 * static_cast<std::size_t>(kH2)}; }
    std::span<const double> c3() const { return {theta.data() + offset_c3(), 2}; }
};

struct SupervisorForward {
    std::vector<double> h1;  // tanh, 256
    std::vector<double> h2;  // tanh, 64
    std::array<double, 2> logits{0.0, 0.0};
    std::array<double, 2> probs{0.0, 0.0};
};

SupervisorForward supervisor_forward_cached(std::span<const double> input,
                                            const SupervisorParams& params);

/// Probability that the longer text is machine-generated.
double supervisor_forward(std::span<const double> input, const SupervisorParams& params);

/// Accumulates parameter gradients and (optionally) the gradient w.r.t. the
/// assembled input, given the loss gradient at the logits.
void supervisor_backward(std::span<const double> input, const SupervisorParams& params,
                         const SupervisorForward& fwd, const std::array<double, 2>& dlogits,
                         std::span<double> grad, std::span<double> dinput);

/// Mean binary cross-entropy over the longer texts, same clipping as the
/// detector loss.
double supervisor_loss(std::span<const double> predictions, std::span<const int> labels);

/// A materialized supervisor training instance.
struct LongText {
    std::vector<std::string> member_ids;
    int y_long = 0;
    std::vector<double> gates;         // forward gate values, one per member
    std::vector<double> pooled_input;  // k*d assembled input
};

}  // namespace mgtd
