#pragma once

#include <cstdint>
#include <string>

#include "mgtd/supervisor.hpp"

namespace mgtd {

/// Every knob of the joint training loop and evaluation. Serialized as a
/// flat key-value text file; unknown keys are rejected.
struct RunConfig {
    int k = 3;                 // texts per longer text
    int n_prime = 128;         // longer texts per batch
    double lambda = 10.0;      // supervisor loss weight
    double tau = 1.0;          // Gumbel-Softmax temperature
    GateMode gate_mode = GateMode::straight_through;
    int batch_size = 32;
    int epochs = 5;
    double learning_rate = 0.01;
    std::uint64_t seed = 1;
    double smoothing = 0.0;    // label smoothing for the detector loss
    int max_len = 64;          // tokens per text after truncation/padding
    int embed_dim = 64;        // d
    int hidden_width = 32768;  // detector hidden layer H
    bool stop_embedding_gradient = false;
    double kd_temperature = 2.0;
    double kd_alpha = 0.5;
    double train_frac = 0.1;

    void validate() const;  // throws Error(config)
};

std::string serialize(const RunConfig& config);

/// Parses the flat key-value format produced by serialize(). Blank lines and
/// '#' comments are allowed; unknown keys raise Error(config).
RunConfig parse_run_config(const std::string& text);
RunConfig load_run_config(const std::string& path);

/// Applies one --set KEY=VALUE override.
void apply_override(RunConfig& config, const std::string& key, const std::string& value);

}  // namespace mgtd
