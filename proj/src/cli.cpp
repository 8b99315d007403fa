#include "mgtd/cli.hpp"

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "mgtd/checkpoint.hpp"
#include "mgtd/corpus.hpp"
#include "mgtd/error.hpp"
#include "mgtd/metrics.hpp"
#include "mgtd/theory.hpp"
#include "mgtd/trainer.hpp"

namespace mgtd::cli {

namespace {

namespace fs = std::filesystem;

void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorKind::load, "cannot write " + path);
    out << text;
}

void write_json(const std::string& path, const nlohmann::ordered_json& j) {
    write_text(path, j.dump(2) + "\n");
}

std::optional<Split> split_from_string(const std::string& s) {
    if (s == "train") return Split::train;
    if (s == "val") return Split::val;
    if (s == "test") return Split::test;
    return std::nullopt;
}

const std::string& tag_of(const TextSample& sample, const std::string& group_by) {
    static const std::string kUntagged = "untagged";
    static const std::string kVariants[] = {"original", "mixed", "paraphrase", "synthetic"};
    if (group_by == "domain") return sample.domain.empty() ? kUntagged : sample.domain;
    if (group_by == "variant") return kVariants[static_cast<int>(sample.variant)];
    return sample.source_model.empty() ? kUntagged : sample.source_model;
}

/// Positives are grouped by their tag; the (shared) negatives join every
/// partition, mirroring per-LLM evaluation columns against common HGT.
std::map<std::string, ScoredSet> group_partitions(const std::vector<const TextSample*>& samples,
                                                  const std::vector<double>& scores,
                                                  const std::string& group_by) {
    std::map<std::string, ScoredSet> partitions;
    std::vector<double> neg_scores;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        if (samples[i]->label == 1) {
            auto& set = partitions[tag_of(*samples[i], group_by)];
            set.scores.push_back(scores[i]);
            set.labels.push_back(1);
        } else {
            neg_scores.push_back(scores[i]);
        }
    }
    for (auto& [tag, set] : partitions)
        for (double s : neg_scores) {
            set.scores.push_back(s);
            set.labels.push_back(0);
        }
    return partitions;
}

std::string svg_header(int w, int h) {
    std::ostringstream out;
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w << "\" height=\"" << h
        << "\" viewBox=\"0 0 " << w << " " << h << "\">\n"
        << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    return out.str();
}

void write_roc_svg(const std::string& path, const std::vector<RocPoint>& points) {
    constexpr int kW = 480, kH = 480, kPad = 40;
    std::ostringstream out;
    out << svg_header(kW, kH);
    out << "<line x1=\"" << kPad << "\" y1=\"" << kH - kPad << "\" x2=\"" << kW - kPad
        << "\" y2=\"" << kH - kPad << "\" stroke=\"black\"/>\n";
    out << "<line x1=\"" << kPad << "\" y1=\"" << kPad << "\" x2=\"" << kPad << "\" y2=\""
        << kH - kPad << "\" stroke=\"black\"/>\n";
    out << "<polyline fill=\"none\" stroke=\"steelblue\" stroke-width=\"2\" points=\"";
    for (const auto& p : points) {
        const double x = kPad + p.fpr * (kW - 2 * kPad);
        const double y = kH - kPad - p.tpr * (kH - 2 * kPad);
        out << x << ',' << y << ' ';
    }
    out << "\"/>\n<text x=\"" << kW / 2 << "\" y=\"" << kH - 8
        << "\" font-size=\"12\" text-anchor=\"middle\">FPR</text>\n"
        << "<text x=\"12\" y=\"" << kH / 2 << "\" font-size=\"12\" text-anchor=\"middle\" "
           "transform=\"rotate(-90 12 "
        << kH / 2 << ")\">TPR</text>\n</svg>\n";
    write_text(path, out.str());
}

void write_hist_svg(const std::string& path, const Histogram& hist) {
    constexpr int kW = 480, kH = 320, kPad = 30;
    long max_count = 1;
    for (int b = 0; b < hist.bins; ++b)
        max_count = std::max({max_count, hist.pos[static_cast<std::size_t>(b)],
                              hist.neg[static_cast<std::size_t>(b)]});
    const double bar = static_cast<double>(kW - 2 * kPad) / hist.bins;
    std::ostringstream out;
    out << svg_header(kW, kH);
    for (int b = 0; b < hist.bins; ++b) {
        const double x = kPad + b * bar;
        const double hn = static_cast<double>(hist.neg[static_cast<std::size_t>(b)]) /
                          static_cast<double>(max_count) * (kH - 2 * kPad);
        const double hp = static_cast<double>(hist.pos[static_cast<std::size_t>(b)]) /
                          static_cast<double>(max_count) * (kH - 2 * kPad);
        out << "<rect x=\"" << x << "\" y=\"" << kH - kPad - hn << "\" width=\"" << bar / 2
            << "\" height=\"" << hn << "\" fill=\"seagreen\" opacity=\"0.8\"/>\n";
        out << "<rect x=\"" << x + bar / 2 << "\" y=\"" << kH - kPad - hp << "\" width=\""
            << bar / 2 << "\" height=\"" << hp << "\" fill=\"indianred\" opacity=\"0.8\"/>\n";
    }
    out << "<text x=\"" << kW / 2 << "\" y=\"" << kH - 6
        << "\" font-size=\"12\" text-anchor=\"middle\">score (HGT green, MGT red)</text>\n"
        << "</svg>\n";
    write_text(path, out.str());
}

nlohmann::ordered_json history_json(const StepRecord& rec) {
    nlohmann::ordered_json j;
    j["step"] = rec.step;
    j["epoch"] = rec.epoch;
    j["l_ori"] = rec.l_ori;
    j["l_supv"] = rec.l_supv;
    j["total"] = rec.total;
    return j;
}

void write_history(const std::string& path, const TrainHistory& history) {
    std::ostringstream out;
    for (const auto& rec : history.steps) out << history_json(rec).dump() << '\n';
    for (const auto& rec : history.epochs) {
        nlohmann::ordered_json j;
        j["epoch"] = rec.epoch;
        if (rec.has_val) j["val_auroc"] = rec.val_auroc;
        out << j.dump() << '\n';
    }
    write_text(path, out.str());
}

}  // namespace

RunConfig resolve_config(const CommonArgs& args) {
    RunConfig config;
    if (!args.config_path.empty()) config = load_run_config(args.config_path);
    for (const auto& kv : args.overrides) {
        const auto eq = kv.find('=');
        if (eq == std::string::npos)
            throw Error(ErrorKind::config, "--set expects KEY=VALUE, got \"" + kv + "\"");
        apply_override(config, kv.substr(0, eq), kv.substr(eq + 1));
    }
    if (args.seed) config.seed = *args.seed;
    config.validate();
    return config;
}

std::string resolve_out_dir(const CommonArgs& args, const std::string& verb) {
    fs::path dir;
    if (!args.out_dir.empty()) {
        dir = args.out_dir;
    } else {
        const char* root = std::getenv("MGTD_OUT_ROOT");
        dir = fs::path(root != nullptr ? root : "mgtd_out") / verb;
    }
    fs::create_directories(dir);
    return dir.string();
}

int cmd_train(const CommonArgs& args, const std::string& corpus_path) {
    const RunConfig config = resolve_config(args);
    const std::string out = resolve_out_dir(args, "train");

    Corpus corpus = load_jsonl(corpus_path);
    corpus = split(std::move(corpus), config.train_frac, config.seed);
    const auto result = train(config, corpus);

    write_text((fs::path(out) / "resolved_config.cfg").string(), serialize(config));
    save_checkpoint({result.detector, result.supervisor, result.vocab, config},
                    (fs::path(out) / "checkpoint.bin").string());
    write_history((fs::path(out) / "history.jsonl").string(), result.history);

    nlohmann::ordered_json metrics;
    metrics["diverged"] = result.diverged;
    nlohmann::ordered_json epochs = nlohmann::ordered_json::array();
    for (const auto& rec : result.history.epochs) {
        nlohmann::ordered_json j;
        j["epoch"] = rec.epoch;
        if (rec.has_val) j["val_auroc"] = rec.val_auroc;
        epochs.push_back(std::move(j));
    }
    metrics["epochs"] = std::move(epochs);
    const auto val = score_split(corpus, Split::val, result.detector, result.vocab,
                                 config.max_len);
    if (val.n_pos() > 0 && val.n_neg() > 0) metrics["final"] = {{"val_auroc", auroc(val)}};
    write_json((fs::path(out) / "metrics.json").string(), metrics);
    return 0;
}

int cmd_eval(const CommonArgs& args, const EvalArgs& eval) {
    const std::string out = resolve_out_dir(args, "eval");
    const Checkpoint ckpt = load_checkpoint(eval.checkpoint_path);

    Corpus corpus = load_jsonl(eval.corpus_path);
    corpus = split(std::move(corpus), ckpt.config.train_frac, ckpt.config.seed);

    std::optional<Split> which;
    if (eval.split != "all") {
        which = split_from_string(eval.split);
        if (!which) throw Error(ErrorKind::input, "unknown split \"" + eval.split + "\"");
    }

    std::vector<const TextSample*> samples;
    std::vector<double> scores;
    for (const auto& sample : corpus.samples) {
        if (which) {
            auto it = corpus.split_of.find(sample.id);
            if (it == corpus.split_of.end() || it->second != *which) continue;
        }
        const auto seq = tokenize(sample, ckpt.vocab, ckpt.config.max_len);
        samples.push_back(&sample);
        scores.push_back(detector_forward(seq, ckpt.detector).probs[1]);
    }
    if (samples.empty()) throw Error(ErrorKind::input, "no samples in split \"" + eval.split + "\"");

    const auto targets = eval.fpr_targets.empty() ? std::vector<double>{0.01} : eval.fpr_targets;
    const auto partitions = group_partitions(samples, scores, eval.group_by);
    const auto bundle = build_report(partitions, targets);

    write_text((fs::path(out) / "resolved_config.cfg").string(), serialize(ckpt.config));
    write_json((fs::path(out) / "metrics.json").string(), report_to_json(bundle));

    if (!eval.scores_out.empty()) {
        std::ostringstream lines;
        for (std::size_t i = 0; i < samples.size(); ++i) {
            nlohmann::ordered_json j;
            j["id"] = samples[i]->id;
            j["score"] = scores[i];
            j["label"] = samples[i]->label;
            j["model"] = samples[i]->source_model;
            j["domain"] = samples[i]->domain;
            j["variant"] = to_string(samples[i]->variant);
            lines << j.dump() << '\n';
        }
        write_text(eval.scores_out, lines.str());
    }

    if (eval.plots) {
        ScoredSet all;
        for (std::size_t i = 0; i < samples.size(); ++i) {
            all.scores.push_back(scores[i]);
            all.labels.push_back(samples[i]->label);
        }
        if (all.n_pos() > 0 && all.n_neg() > 0) {
            write_roc_svg((fs::path(out) / "roc.svg").string(), roc_curve(all));
            write_hist_svg((fs::path(out) / "histogram.svg").string(),
                           score_histogram(all, 20));
        }
    }
    return 0;
}

int cmd_mix(const CommonArgs& args, const std::string& corpus_path, double fraction,
            const std::string& out_file) {
    const std::string out = resolve_out_dir(args, "mix");
    const std::uint64_t seed = args.seed.value_or(1);

    const Corpus corpus = load_jsonl(corpus_path);
    const Corpus mixed = make_mixed(corpus, fraction, seed);
    const std::string target =
        out_file.empty() ? (fs::path(out) / "mixed.jsonl").string() : out_file;
    save_jsonl(mixed, target);

    nlohmann::ordered_json echo;
    echo["command"] = "mix";
    echo["corpus"] = corpus_path;
    echo["fraction"] = fraction;
    echo["seed"] = seed;
    echo["output"] = target;
    write_json((fs::path(out) / "args.json").string(), echo);
    return 0;
}

int cmd_synth(const CommonArgs& args, const SynthArgs& synth) {
    const std::string out = resolve_out_dir(args, "synth");
    const std::uint64_t seed = args.seed.value_or(1);

    SyntheticDist dist;
    dist.alphabet_size = synth.alphabet;
    if (!synth.h.empty() || !synth.m.empty()) {
        dist.h = synth.h;
        dist.m = synth.m;
    } else {
        // Tilted pair with TV exactly delta: uniform h, m shifts 2*delta/A of
        // mass from the lower half of the alphabet to the upper half.
        const int a = synth.alphabet;
        if (a % 2 != 0) throw Error(ErrorKind::input, "--delta needs an even alphabet");
        dist.h.assign(static_cast<std::size_t>(a), 1.0 / a);
        dist.m.assign(static_cast<std::size_t>(a), 1.0 / a);
        for (int s = 0; s < a; ++s)
            dist.m[static_cast<std::size_t>(s)] +=
                (s < a / 2 ? -2.0 : 2.0) * synth.delta / a;
    }

    const Corpus corpus = gen_synthetic(dist, synth.n, synth.count_per_class, synth.alpha, seed);
    const std::string target =
        synth.out_file.empty() ? (fs::path(out) / "corpus.jsonl").string() : synth.out_file;
    save_jsonl(corpus, target);

    nlohmann::ordered_json echo;
    echo["command"] = "synth";
    echo["alphabet"] = dist.alphabet_size;
    echo["h"] = dist.h;
    echo["m"] = dist.m;
    echo["n"] = synth.n;
    echo["count_per_class"] = synth.count_per_class;
    echo["alpha"] = synth.alpha;
    echo["seed"] = seed;
    echo["output"] = target;
    write_json((fs::path(out) / "args.json").string(), echo);
    return 0;
}

int cmd_verify_theorems(const CommonArgs& args, const VerifyArgs& verify) {
    const std::string out = resolve_out_dir(args, "verify-theorems");

    std::vector<GridCell> grid;
    if (verify.grid_file.empty()) {
        grid = default_theorem_grid();
    } else {
        std::ifstream in(verify.grid_file);
        if (!in) throw Error(ErrorKind::load, "cannot open grid file: " + verify.grid_file);
        nlohmann::json spec = nlohmann::json::parse(in, nullptr, false);
        if (spec.is_discarded() || !spec.is_array())
            throw Error(ErrorKind::load, "grid file must be a JSON array of cells");
        for (const auto& cell : spec) {
            GridCell c;
            c.dist.h = cell.at("h").get<std::vector<double>>();
            c.dist.m = cell.at("m").get<std::vector<double>>();
            c.dist.alphabet_size = static_cast<int>(c.dist.h.size());
            c.n = cell.at("n").get<int>();
            c.k = cell.at("k").get<int>();
            c.alpha = cell.value("alpha", 0.0);
            grid.push_back(std::move(c));
        }
    }

    const auto report = run_theorem_suite(grid);
    auto j = suite_report_to_json(report);

    nlohmann::ordered_json echo;
    echo["command"] = "verify-theorems";
    echo["grid_cells"] = grid.size();
    echo["strict"] = verify.strict;
    write_json((fs::path(out) / "args.json").string(), echo);
    write_json((fs::path(out) / "report.json").string(), j);

    for (const auto& cell : report.cells)
        if (cell.over_budget)
            std::printf("over budget: delta=%g n=%d k=%d alpha=%g (skipped)\n",
                        cell.bound.delta, cell.bound.n, cell.bound.k, cell.bound.alpha);
    std::printf("cells=%zu violations=%d over_budget=%d monotone_k=%s antitone_alpha=%s\n",
                report.cells.size(), report.violations, report.over_budget,
                report.tv_monotone_in_k ? "yes" : "no",
                report.tv_antitone_in_alpha ? "yes" : "no");

    if (!report.ok()) return 4;
    if (verify.strict && report.over_budget > 0) return 4;
    return 0;
}

int cmd_kd(const CommonArgs& args, const std::string& teacher_path,
           const std::string& corpus_path) {
    const RunConfig config = resolve_config(args);
    const std::string out = resolve_out_dir(args, "kd");

    const Checkpoint teacher = load_checkpoint(teacher_path);
    Corpus corpus = load_jsonl(corpus_path);
    corpus = split(std::move(corpus), config.train_frac, config.seed);

    const auto result = kd_train(teacher.detector, teacher.vocab, config, corpus);

    write_text((fs::path(out) / "resolved_config.cfg").string(), serialize(config));
    Rng sup_rng(substream_seed(config.seed, 4));
    save_checkpoint({result.student,
                     SupervisorParams::init(config.k * config.embed_dim, sup_rng),
                     teacher.vocab, config},
                    (fs::path(out) / "checkpoint.bin").string());
    write_history((fs::path(out) / "history.jsonl").string(), result.history);

    nlohmann::ordered_json metrics;
    const auto val = score_split(corpus, Split::val, result.student, teacher.vocab,
                                 config.max_len);
    if (val.n_pos() > 0 && val.n_neg() > 0) metrics["final"] = {{"val_auroc", auroc(val)}};
    write_json((fs::path(out) / "metrics.json").string(), metrics);
    return 0;
}

int cmd_report(const CommonArgs& args, const std::vector<std::string>& scores_paths,
               const std::string& group_by, std::vector<double> fpr_targets) {
    const std::string out = resolve_out_dir(args, "report");
    if (fpr_targets.empty()) fpr_targets = {0.01};

    std::vector<TextSample> samples;
    std::vector<double> scores;
    for (const auto& path : scores_paths) {
        std::ifstream in(path);
        if (!in) throw Error(ErrorKind::load, "cannot open scores file: " + path);
        std::string line;
        std::size_t line_no = 0;
        while (std::getline(in, line)) {
            ++line_no;
            if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
            nlohmann::json rec = nlohmann::json::parse(line, nullptr, false);
            if (rec.is_discarded() || !rec.contains("score") || !rec.contains("label"))
                throw Error(ErrorKind::load, path + ":" + std::to_string(line_no) +
                                                 ": expected {\"score\", \"label\", ...}");
            TextSample s;
            s.label = rec["label"].get<int>();
            s.source_model = rec.value("model", "");
            s.domain = rec.value("domain", "");
            if (rec.contains("variant"))
                if (auto v = variant_from_string(rec["variant"].get<std::string>())) s.variant = *v;
            samples.push_back(std::move(s));
            scores.push_back(rec["score"].get<double>());
        }
    }
    std::vector<const TextSample*> sample_ptrs;
    sample_ptrs.reserve(samples.size());
    for (const auto& s : samples) sample_ptrs.push_back(&s);

    const auto bundle = build_report(group_partitions(sample_ptrs, scores, group_by), fpr_targets);
    nlohmann::ordered_json echo;
    echo["command"] = "report";
    echo["inputs"] = scores_paths;
    echo["group_by"] = group_by;
    echo["fpr"] = fpr_targets;
    write_json((fs::path(out) / "args.json").string(), echo);
    write_json((fs::path(out) / "metrics.json").string(), report_to_json(bundle));
    return 0;
}

int exit_code_for(const std::exception& err) {
    if (const auto* e = dynamic_cast<const Error*>(&err)) {
        switch (e->kind()) {
            case ErrorKind::integrity:
                return 3;
            case ErrorKind::load:
            case ErrorKind::validation:
            case ErrorKind::config:
            case ErrorKind::input:
            case ErrorKind::construction:
                return 2;
            default:
                return 1;
        }
    }
    return 1;
}

}  // namespace mgtd::cli
