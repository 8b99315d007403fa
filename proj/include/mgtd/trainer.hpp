#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "mgtd/corpus.hpp"
#include "mgtd/detector.hpp"
#include "mgtd/metrics.hpp"
#include "mgtd/run_config.hpp"
#include "mgtd/supervisor.hpp"
#include "mgtd/vocab.hpp"

namespace mgtd {

struct StepRecord {
    long step = 0;
    int epoch = 0;
    double l_ori = 0.0;
    double l_supv = 0.0;
    double total = 0.0;
};

struct EpochRecord {
    int epoch = 0;
    double val_auroc = 0.0;
    bool has_val = false;
};

struct TrainHistory {
    std::vector<StepRecord> steps;
    std::vector<EpochRecord> epochs;
};

/// One training batch (views into pre-tokenized data).
struct Batch {
    std::vector<const TokenSeq*> tokens;
    std::vector<int> labels;
    std::vector<std::string> ids;
};

/// One longer-text draw with its Gumbel noise frozen, so the joint loss is a
/// pure function of the parameters given a LongBatch.
struct LongDraw {
    int y_long = 0;
    std::vector<int> members;                      // batch positions
    std::vector<std::array<double, 2>> noise;      // one Gumbel pair per member
};

struct LongBatch {
    std::vector<LongDraw> draws;
};

/// Draws up to n_prime longer texts from the batch: y_long ~ Bernoulli(0.5),
/// then k member positions of that class with replacement. Draws whose class
/// is absent from the batch are dropped.
LongBatch sample_long_batch(const std::vector<int>& labels, const RunConfig& config, Rng& rng);

struct LossParts {
    double l_ori = 0.0;
    double l_supv = 0.0;
    int long_count = 0;  // longer texts actually built

    double total(double lambda) const { return l_ori + lambda * l_supv; }
};

/// Joint loss L_ori + lambda * L_supv evaluated with frozen noise; pure in
/// the parameters. Optionally materializes the constructed longer texts.
LossParts joint_loss(const Batch& batch, const LongBatch& long_batch,
                     const DetectorParams& det, const SupervisorParams& sup,
                     const RunConfig& config, std::vector<LongText>* out_longs = nullptr);

struct JointGrads {
    std::vector<double> detector;    // layout of DetectorParams::theta
    std::vector<double> supervisor;  // layout of SupervisorParams::theta
};

/// Gradients of L_ori + lambda * L_supv w.r.t. both parameter sets. The
/// supervisor couples back into the detector through the Gumbel gate and,
/// unless config.stop_embedding_gradient, through the shared embedding.
LossParts joint_backward(const Batch& batch, const LongBatch& long_batch,
                         const DetectorParams& det, const SupervisorParams& sup,
                         const RunConfig& config, JointGrads& grads);

/// One SGD step on the joint objective. With lambda == 0 no longer texts are
/// drawn (gate_rng untouched) and the update equals plain cross-entropy
/// training on the batch.
LossParts joint_step(const Batch& batch, DetectorParams& det, SupervisorParams& sup,
                     const RunConfig& config, Rng& gate_rng);

struct TrainResult {
    DetectorParams detector;
    SupervisorParams supervisor;
    TrainHistory history;
    Vocab vocab;
    bool diverged = false;
};

/// Runs epochs x batches of joint_step over the corpus's train split with
/// seeded shuffling; per-epoch validation AUROC is computed on the detector
/// alone. Non-finite loss aborts with history preserved.
TrainResult train(const RunConfig& config, const Corpus& corpus);

struct KdResult {
    DetectorParams student;
    TrainHistory history;
};

/// Distills a student detector from a teacher:
/// kd_alpha * BCE(hard labels) + (1 - kd_alpha) * CE against the teacher's
/// softmax at kd_temperature. The corpus vocabulary must match the teacher's.
KdResult kd_train(const DetectorParams& teacher, const Vocab& teacher_vocab,
                  const RunConfig& config, const Corpus& corpus);

/// Detector scores and labels over one split, in corpus order.
ScoredSet score_split(const Corpus& corpus, Split split, const DetectorParams& det,
                      const Vocab& vocab, int max_len);

}  // namespace mgtd
