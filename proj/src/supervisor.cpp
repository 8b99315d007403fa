#include "mgtd/supervisor.hpp"

#include <algorithm>
#include <cmath>

#include "mgtd/error.hpp"
#include "mgtd/linalg.hpp"

namespace mgtd {

namespace {

constexpr double kProbClip = 1e-7;
constexpr double kScoreClip = 1e-7;

}  // namespace

std::string to_string(GateMode mode) {
    return mode == GateMode::soft ? "soft" : "straight_through";
}

std::optional<GateMode> gate_mode_from_string(const std::string& s) {
    if (s == "soft") return GateMode::soft;
    if (s == "straight_through") return GateMode::straight_through;
    return std::nullopt;
}

GateSample gumbel_gate_with_noise(const std::array<double, 2>& probs, double temperature,
                                  GateMode mode, const std::array<double, 2>& noise) {
    if (temperature <= 0.0) throw Error(ErrorKind::input, "temperature must be > 0");
    GateSample gate;
    gate.temperature = temperature;
    gate.mode = mode;

    double p0 = std::max(probs[0], kProbClip);
    double p1 = std::max(probs[1], kProbClip);
    const double sum = p0 + p1;
    gate.probs = {p0 / sum, p1 / sum};

    gate.relaxed = softmax2((std::log(gate.probs[0]) + noise[0]) / temperature,
                            (std::log(gate.probs[1]) + noise[1]) / temperature);
    const int winner = gate.relaxed[1] > gate.relaxed[0] ? 1 : 0;
    gate.hard = {winner == 0 ? 1.0 : 0.0, winner == 1 ? 1.0 : 0.0};
    return gate;
}

GateSample gumbel_gate(const std::array<double, 2>& probs, double temperature,
                       GateMode mode, Rng& rng) {
    return gumbel_gate_with_noise(probs, temperature, mode, {rng.gumbel(), rng.gumbel()});
}

std::array<double, 2> gate_logit_grad(const GateSample& gate) {
    const double c = gate.relaxed[0] * gate.relaxed[1] / gate.temperature;
    return {-c, c};
}

std::optional<std::vector<int>> sample_long_indices(const std::vector<int>& labels, int k,
                                                    int y_long, Rng& rng) {
    if (k < 1) throw Error(ErrorKind::input, "k must be >= 1");
    std::vector<int> pool;
    for (std::size_t i = 0; i < labels.size(); ++i)
        if (labels[i] == y_long) pool.push_back(static_cast<int>(i));
    if (pool.empty()) return std::nullopt;

    std::vector<int> members(static_cast<std::size_t>(k));
    for (int j = 0; j < k; ++j)
        members[static_cast<std::size_t>(j)] = pool[rng.below(pool.size())];
    return members;
}

std::vector<double> assemble_long_input(const std::vector<std::vector<double>>& member_embeddings,
                                        const std::vector<int>& true_lengths,
                                        const std::vector<double>& gates, int embed_dim) {
    const std::size_t k = member_embeddings.size();
    if (true_lengths.size() != k || gates.size() != k)
        throw Error(ErrorKind::input, "member embeddings, lengths and gates must align");
    const auto d = static_cast<std::size_t>(embed_dim);

    std::vector<double> out(k * d, 0.0);
    for (std::size_t j = 0; j < k; ++j) {
        const auto& emb = member_embeddings[j];
        if (emb.size() % d != 0)
            throw Error(ErrorKind::input, "member embedding width must equal embed_dim");
        const int len = true_lengths[j];
        if (len == 0) continue;  // zero segment
        if (static_cast<std::size_t>(len) * d > emb.size())
            throw Error(ErrorKind::input, "true length exceeds member embedding rows");
        const auto seg = std::span<double>(out).subspan(j * d, d);
        for (int row = 0; row < len; ++row)
            axpy(1.0, std::span<const double>(emb).subspan(static_cast<std::size_t>(row) * d, d), seg);
        const double scale = gates[j] / static_cast<double>(len);
        for (double& v : seg) v *= scale;
    }
    return out;
}

SupervisorParams SupervisorParams::init(int input_dim, Rng& rng) {
    SupervisorParams p;
    p.input_dim = input_dim;
    p.theta.assign(static_cast<std::size_t>(kH1) * input_dim + kH1 +
                       static_cast<std::size_t>(kH2) * kH1 + kH2 + 2 * kH2 + 2,
                   0.0);
    const double s1 = 1.0 / std::sqrt(static_cast<double>(input_dim));
    for (std::size_t i = 0; i < p.offset_c1(); ++i) p.theta[i] = rng.normal() * s1;
    const double s2 = 1.0 / std::sqrt(static_cast<double>(kH1));
    for (std::size_t i = p.offset_v2(); i < p.offset_c2(); ++i) p.theta[i] = rng.normal() * s2;
    const double s3 = 1.0 / std::sqrt(static_cast<double>(kH2));
    for (std::size_t i = p.offset_v3(); i < p.offset_c3(); ++i) p.theta[i] = rng.normal() * s3;
    return p;
}

SupervisorForward supervisor_forward_cached(std::span<const double> input,
                                            const SupervisorParams& params) {
    if (static_cast<int>(input.size()) != params.input_dim)
        throw Error(ErrorKind::config, "supervisor input width mismatch: got " +
                                           std::to_string(input.size()) + ", expected " +
                                           std::to_string(params.input_dim));
    constexpr int h1 = SupervisorParams::kH1;
    constexpr int h2 = SupervisorParams::kH2;

    SupervisorForward fwd;
    fwd.h1.assign(h1, 0.0);
    matvec(params.v1(), h1, params.input_dim, input, fwd.h1);
    const auto c1 = params.c1();
    for (int i = 0; i < h1; ++i)
        fwd.h1[static_cast<std::size_t>(i)] =
            std::tanh(fwd.h1[static_cast<std::size_t>(i)] + c1[static_cast<std::size_t>(i)]);

    fwd.h2.assign(h2, 0.0);
    matvec(params.v2(), h2, h1, fwd.h1, fwd.h2);
    const auto c2 = params.c2();
    for (int i = 0; i < h2; ++i)
        fwd.h2[static_cast<std::size_t>(i)] =
            std::tanh(fwd.h2[static_cast<std::size_t>(i)] + c2[static_cast<std::size_t>(i)]);

    const auto v3 = params.v3();
    const auto c3 = params.c3();
    fwd.logits[0] = dot(v3.subspan(0, h2), fwd.h2) + c3[0];
    fwd.logits[1] = dot(v3.subspan(h2, h2), fwd.h2) + c3[1];
    fwd.probs = softmax2(fwd.logits[0], fwd.logits[1]);
    return fwd;
}

double supervisor_forward(std::span<const double> input, const SupervisorParams& params) {
    return supervisor_forward_cached(input, params).probs[1];
}

void supervisor_backward(std::span<const double> input, const SupervisorParams& params,
                         const SupervisorForward& fwd, const std::array<double, 2>& dlogits,
                         std::span<double> grad, std::span<double> dinput) {
    constexpr int h1 = SupervisorParams::kH1;
    constexpr int h2 = SupervisorParams::kH2;

    std::span<double> gv3 = grad.subspan(params.offset_v3(), 2 * static_cast<std::size_t>(h2));
    std::span<double> gc3 = grad.subspan(params.offset_c3(), 2);
    axpy(dlogits[0], fwd.h2, gv3.subspan(0, h2));
    axpy(dlogits[1], fwd.h2, gv3.subspan(h2, h2));
    gc3[0] += dlogits[0];
    gc3[1] += dlogits[1];

    std::vector<double> dh2(h2, 0.0);
    const auto v3 = params.v3();
    axpy(dlogits[0], v3.subspan(0, h2), dh2);
    axpy(dlogits[1], v3.subspan(h2, h2), dh2);
    for (int i = 0; i < h2; ++i)
        dh2[static_cast<std::size_t>(i)] *=
            1.0 - fwd.h2[static_cast<std::size_t>(i)] * fwd.h2[static_cast<std::size_t>(i)];

    outer_accum(dh2, fwd.h1, grad.subspan(params.offset_v2(), static_cast<std::size_t>(h2) * h1),
                h2, h1);
    axpy(1.0, dh2, grad.subspan(params.offset_c2(), h2));

    std::vector<double> dh1(h1, 0.0);
    matvec_t_accum(params.v2(), h2, h1, dh2, dh1);
    for (int i = 0; i < h1; ++i)
        dh1[static_cast<std::size_t>(i)] *=
            1.0 - fwd.h1[static_cast<std::size_t>(i)] * fwd.h1[static_cast<std::size_t>(i)];

    outer_accum(dh1, input, grad.subspan(0, params.offset_c1()), h1, params.input_dim);
    axpy(1.0, dh1, grad.subspan(params.offset_c1(), h1));

    if (!dinput.empty()) matvec_t_accum(params.v1(), h1, params.input_dim, dh1, dinput);
}

double supervisor_loss(std::span<const double> predictions, std::span<const int> labels) {
    if (predictions.size() != labels.size() || predictions.empty())
        throw Error(ErrorKind::input, "predictions and labels must have equal nonzero length");
    double sum = 0.0;
    for (std::size_t i = 0; i < predictions.size(); ++i) {
        const double q = std::clamp(predictions[i], kScoreClip, 1.0 - kScoreClip);
        sum -= labels[i] == 1 ? std::log(q) : std::log(1.0 - q);
    }
    return sum / static_cast<double>(predictions.size());
}

}  // namespace mgtd
