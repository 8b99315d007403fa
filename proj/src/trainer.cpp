#include "mgtd/trainer.hpp"

#include <algorithm>
#include <cmath>

#include "mgtd/error.hpp"
#include "mgtd/linalg.hpp"

namespace mgtd {

namespace {

/// Soft targets for the detector loss: (1 - y~, y~) with label smoothing.
std::array<double, 2> smoothed_target(int label, double smoothing) {
    const double y = label == 1 ? 1.0 - smoothing : smoothing;
    return {1.0 - y, y};
}

struct LongCache {
    std::vector<GateSample> gates;
    std::vector<double> input;  // k*d
    SupervisorForward fwd;
};

/// Shared forward (and optional backward) pass over one batch. Gradients are
/// accumulated per batch sample: every longer text referencing a sample adds
/// into that sample's logit/pooled gradient, so the detector body is walked
/// exactly once per sample regardless of n_prime.
LossParts run_joint(const Batch& batch, const LongBatch& long_batch,
                    const DetectorParams& det, const SupervisorParams& sup,
                    const RunConfig& config, JointGrads* grads,
                    std::vector<LongText>* out_longs) {
    const auto batch_size = batch.tokens.size();
    if (batch_size == 0) throw Error(ErrorKind::input, "batch must be nonempty");
    const auto d = static_cast<std::size_t>(det.embed_dim);

    std::vector<DetectorForward> fwd(batch_size);
    std::vector<double> scores(batch_size);
    for (std::size_t i = 0; i < batch_size; ++i) {
        fwd[i] = detector_forward(*batch.tokens[i], det);
        scores[i] = fwd[i].probs[1];
    }

    LossParts parts;
    parts.l_ori = original_loss(scores, batch.labels, config.smoothing);

    // Longer texts: reuse the detector outputs already computed for the batch.
    std::vector<LongCache> caches;
    std::vector<double> predictions;
    std::vector<int> long_labels;
    caches.reserve(long_batch.draws.size());
    for (const auto& draw : long_batch.draws) {
        LongCache cache;
        cache.gates.reserve(draw.members.size());
        cache.input.assign(draw.members.size() * d, 0.0);
        for (std::size_t j = 0; j < draw.members.size(); ++j) {
            const int pos = draw.members[j];
            const auto gate = gumbel_gate_with_noise(fwd[static_cast<std::size_t>(pos)].probs,
                                                     config.tau, config.gate_mode, draw.noise[j]);
            axpy(gate.value(), fwd[static_cast<std::size_t>(pos)].pooled,
                 std::span<double>(cache.input).subspan(j * d, d));
            cache.gates.push_back(gate);
        }
        cache.fwd = supervisor_forward_cached(cache.input, sup);
        predictions.push_back(cache.fwd.probs[1]);
        long_labels.push_back(draw.y_long);
        if (out_longs) {
            LongText lt;
            lt.y_long = draw.y_long;
            for (int pos : draw.members) lt.member_ids.push_back(batch.ids[static_cast<std::size_t>(pos)]);
            for (const auto& g : cache.gates) lt.gates.push_back(g.value());
            lt.pooled_input = cache.input;
            out_longs->push_back(std::move(lt));
        }
        caches.push_back(std::move(cache));
    }
    parts.long_count = static_cast<int>(caches.size());
    if (!caches.empty()) parts.l_supv = supervisor_loss(predictions, long_labels);

    if (!grads) return parts;

    grads->detector.assign(det.theta.size(), 0.0);
    grads->supervisor.assign(sup.theta.size(), 0.0);

    // dL_ori at each sample's logits.
    std::vector<std::array<double, 2>> dlogits(batch_size, {0.0, 0.0});
    const double inv_batch = 1.0 / static_cast<double>(batch_size);
    for (std::size_t i = 0; i < batch_size; ++i) {
        const auto target = smoothed_target(batch.labels[i], config.smoothing);
        dlogits[i][0] += (fwd[i].probs[0] - target[0]) * inv_batch;
        dlogits[i][1] += (fwd[i].probs[1] - target[1]) * inv_batch;
    }

    // lambda * dL_supv: through the supervisor, then through each member's
    // gate (always) and pooled embedding (unless severed by config).
    std::vector<std::vector<double>> dpooled(batch_size);
    if (!caches.empty()) {
        const double scale = config.lambda / static_cast<double>(caches.size());
        std::vector<double> dinput(sup.input_dim, 0.0);
        for (std::size_t l = 0; l < caches.size(); ++l) {
            const auto& cache = caches[l];
            const auto target = smoothed_target(long_batch.draws[l].y_long, 0.0);
            const std::array<double, 2> dsup{(cache.fwd.probs[0] - target[0]) * scale,
                                             (cache.fwd.probs[1] - target[1]) * scale};
            std::fill(dinput.begin(), dinput.end(), 0.0);
            supervisor_backward(cache.input, sup, cache.fwd, dsup, grads->supervisor, dinput);

            const auto& draw = long_batch.draws[l];
            for (std::size_t j = 0; j < draw.members.size(); ++j) {
                const auto pos = static_cast<std::size_t>(draw.members[j]);
                const auto seg = std::span<const double>(dinput).subspan(j * d, d);
                const auto& gate = cache.gates[j];

                const double dgate = dot(seg, fwd[pos].pooled);
                const auto ggrad = gate_logit_grad(gate);
                dlogits[pos][0] += dgate * ggrad[0];
                dlogits[pos][1] += dgate * ggrad[1];

                if (!config.stop_embedding_gradient) {
                    if (dpooled[pos].empty()) dpooled[pos].assign(d, 0.0);
                    axpy(gate.value(), seg, dpooled[pos]);
                }
            }
        }
    }

    for (std::size_t i = 0; i < batch_size; ++i)
        detector_backward(*batch.tokens[i], det, fwd[i], dlogits[i], dpooled[i],
                          grads->detector);
    return parts;
}

void sgd_update(std::vector<double>& theta, const std::vector<double>& grad, double lr) {
    for (std::size_t i = 0; i < theta.size(); ++i) theta[i] -= lr * grad[i];
}

std::vector<std::size_t> shuffled(std::size_t n, Rng& rng) {
    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    for (std::size_t i = n; i > 1; --i) std::swap(order[i - 1], order[rng.below(i)]);
    return order;
}

}  // namespace

LongBatch sample_long_batch(const std::vector<int>& labels, const RunConfig& config, Rng& rng) {
    LongBatch out;
    for (int i = 0; i < config.n_prime; ++i) {
        const int y_long = rng.bernoulli(0.5) ? 1 : 0;
        auto members = sample_long_indices(labels, config.k, y_long, rng);
        if (!members) continue;  // class absent from this batch
        LongDraw draw;
        draw.y_long = y_long;
        draw.members = std::move(*members);
        draw.noise.resize(draw.members.size());
        for (auto& pair : draw.noise) pair = {rng.gumbel(), rng.gumbel()};
        out.draws.push_back(std::move(draw));
    }
    return out;
}

LossParts joint_loss(const Batch& batch, const LongBatch& long_batch,
                     const DetectorParams& det, const SupervisorParams& sup,
                     const RunConfig& config, std::vector<LongText>* out_longs) {
    return run_joint(batch, long_batch, det, sup, config, nullptr, out_longs);
}

LossParts joint_backward(const Batch& batch, const LongBatch& long_batch,
                         const DetectorParams& det, const SupervisorParams& sup,
                         const RunConfig& config, JointGrads& grads) {
    return run_joint(batch, long_batch, det, sup, config, &grads, nullptr);
}

LossParts joint_step(const Batch& batch, DetectorParams& det, SupervisorParams& sup,
                     const RunConfig& config, Rng& gate_rng) {
    LongBatch long_batch;
    if (config.lambda > 0.0)
        long_batch = sample_long_batch(batch.labels, config, gate_rng);

    JointGrads grads;
    const auto parts = run_joint(batch, long_batch, det, sup, config, &grads, nullptr);
    sgd_update(det.theta, grads.detector, config.learning_rate);
    if (config.lambda > 0.0) sgd_update(sup.theta, grads.supervisor, config.learning_rate);
    return parts;
}

ScoredSet score_split(const Corpus& corpus, Split split, const DetectorParams& det,
                      const Vocab& vocab, int max_len) {
    ScoredSet set;
    for (const auto& sample : corpus.samples) {
        auto it = corpus.split_of.find(sample.id);
        if (it == corpus.split_of.end() || it->second != split) continue;
        const auto seq = tokenize(sample, vocab, max_len);
        set.scores.push_back(detector_forward(seq, det).probs[1]);
        set.labels.push_back(sample.label);
    }
    return set;
}

TrainResult train(const RunConfig& config, const Corpus& corpus) {
    config.validate();
    if (!corpus.has_split())
        throw Error(ErrorKind::validation, "corpus must be split before training");

    const auto train_idx = corpus.indices_in(Split::train);
    if (train_idx.empty()) throw Error(ErrorKind::validation, "train split is empty");

    TrainResult result;
    result.vocab = build_vocab(corpus);

    std::vector<TokenSeq> tokens(train_idx.size());
    std::vector<int> labels(train_idx.size());
    std::vector<std::string> ids(train_idx.size());
    for (std::size_t i = 0; i < train_idx.size(); ++i) {
        const auto& sample = corpus.samples[train_idx[i]];
        tokens[i] = tokenize(sample, result.vocab, config.max_len);
        labels[i] = sample.label;
        ids[i] = sample.id;
    }

    Rng shuffle_rng(substream_seed(config.seed, 1));
    Rng gate_rng(substream_seed(config.seed, 2));
    Rng det_init_rng(substream_seed(config.seed, 3));
    Rng sup_init_rng(substream_seed(config.seed, 4));

    result.detector = DetectorParams::init(result.vocab.size(), config.embed_dim,
                                           config.hidden_width, det_init_rng);
    result.supervisor = SupervisorParams::init(config.k * config.embed_dim, sup_init_rng);

    long step = 0;
    for (int epoch = 0; epoch < config.epochs && !result.diverged; ++epoch) {
        const auto order = shuffled(train_idx.size(), shuffle_rng);
        long built_this_epoch = 0;
        for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
            const std::size_t end = std::min(order.size(), start + config.batch_size);
            Batch batch;
            for (std::size_t pos = start; pos < end; ++pos) {
                batch.tokens.push_back(&tokens[order[pos]]);
                batch.labels.push_back(labels[order[pos]]);
                batch.ids.push_back(ids[order[pos]]);
            }
            const auto parts = joint_step(batch, result.detector, result.supervisor,
                                          config, gate_rng);
            built_this_epoch += parts.long_count;
            const double total = parts.total(config.lambda);
            result.history.steps.push_back({step, epoch, parts.l_ori, parts.l_supv, total});
            ++step;
            if (!std::isfinite(total)) {
                result.diverged = true;
                break;
            }
        }
        if (result.diverged) break;  // abort; history stays as recorded
        if (config.lambda > 0.0 && config.n_prime > 0 && built_this_epoch == 0)
            throw Error(ErrorKind::training,
                        "no longer texts could be constructed in epoch " + std::to_string(epoch));

        EpochRecord rec;
        rec.epoch = epoch;
        const auto val = score_split(corpus, Split::val, result.detector, result.vocab,
                                     config.max_len);
        if (val.n_pos() > 0 && val.n_neg() > 0) {
            rec.val_auroc = auroc(val);
            rec.has_val = true;
        }
        result.history.epochs.push_back(rec);
    }
    return result;
}

KdResult kd_train(const DetectorParams& teacher, const Vocab& teacher_vocab,
                  const RunConfig& config, const Corpus& corpus) {
    config.validate();
    if (!corpus.has_split())
        throw Error(ErrorKind::validation, "corpus must be split before training");
    if (teacher.vocab_size != teacher_vocab.size())
        throw Error(ErrorKind::config, "teacher checkpoint and vocabulary disagree");
    const Vocab corpus_vocab = build_vocab(corpus);
    if (corpus_vocab.hash() != teacher_vocab.hash())
        throw Error(ErrorKind::config, "corpus vocabulary does not match the teacher's");

    const auto train_idx = corpus.indices_in(Split::train);
    if (train_idx.empty()) throw Error(ErrorKind::validation, "train split is empty");

    std::vector<TokenSeq> tokens(train_idx.size());
    std::vector<int> labels(train_idx.size());
    for (std::size_t i = 0; i < train_idx.size(); ++i) {
        const auto& sample = corpus.samples[train_idx[i]];
        tokens[i] = tokenize(sample, teacher_vocab, config.max_len);
        labels[i] = sample.label;
    }

    Rng shuffle_rng(substream_seed(config.seed, 1));
    Rng init_rng(substream_seed(config.seed, 3));

    KdResult result;
    result.student = DetectorParams::init(teacher_vocab.size(), config.embed_dim,
                                          config.hidden_width, init_rng);

    const double temp = config.kd_temperature;
    const double alpha = config.kd_alpha;
    long step = 0;
    std::vector<double> grad;
    for (int epoch = 0; epoch < config.epochs; ++epoch) {
        const auto order = shuffled(train_idx.size(), shuffle_rng);
        for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
            const std::size_t end = std::min(order.size(), start + config.batch_size);
            const double inv_batch = 1.0 / static_cast<double>(end - start);

            grad.assign(result.student.theta.size(), 0.0);
            double hard_sum = 0.0, soft_sum = 0.0;
            for (std::size_t pos = start; pos < end; ++pos) {
                const auto& seq = tokens[order[pos]];
                const auto sfwd = detector_forward(seq, result.student);
                const auto tfwd = detector_forward(seq, teacher);

                const auto target = smoothed_target(labels[order[pos]], config.smoothing);
                const double p = std::clamp(sfwd.probs[1], 1e-7, 1.0 - 1e-7);
                hard_sum -= target[1] * std::log(p) + target[0] * std::log(1.0 - p);

                const auto s_soft = softmax2(sfwd.logits[0] / temp, sfwd.logits[1] / temp);
                const auto t_soft = softmax2(tfwd.logits[0] / temp, tfwd.logits[1] / temp);
                soft_sum -= t_soft[0] * std::log(std::clamp(s_soft[0], 1e-7, 1.0)) +
                            t_soft[1] * std::log(std::clamp(s_soft[1], 1e-7, 1.0));

                std::array<double, 2> dlogits{};
                for (int c = 0; c < 2; ++c)
                    dlogits[static_cast<std::size_t>(c)] =
                        (alpha * (sfwd.probs[static_cast<std::size_t>(c)] -
                                  target[static_cast<std::size_t>(c)]) +
                         (1.0 - alpha) / temp *
                             (s_soft[static_cast<std::size_t>(c)] -
                              t_soft[static_cast<std::size_t>(c)])) *
                        inv_batch;
                detector_backward(seq, result.student, sfwd, dlogits, {}, grad);
            }
            sgd_update(result.student.theta, grad, config.learning_rate);

            const double hard = hard_sum * inv_batch;
            const double soft = soft_sum * inv_batch;
            result.history.steps.push_back(
                {step, epoch, hard, soft, alpha * hard + (1.0 - alpha) * soft});
            ++step;
        }
    }
    return result;
}

}  // namespace mgtd
