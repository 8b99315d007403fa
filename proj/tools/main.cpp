#include <cstdio>
#include <exception>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "mgtd/cli.hpp"

namespace {

void add_common(CLI::App* cmd, mgtd::cli::CommonArgs* args) {
    cmd->add_option("--config", args->config_path, "Run configuration file");
    cmd->add_option("--set", args->overrides, "Override a config key (KEY=VALUE, repeatable)");
    cmd->add_option("--seed", args->seed, "Random seed override");
    cmd->add_option("--out", args->out_dir, "Output directory");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Detector training with longer-text supervision, low-FPR evaluation "
                 "and numerical bound verification"};
    app.require_subcommand(1);

    mgtd::cli::CommonArgs train_args;
    std::string train_corpus;
    auto* train = app.add_subcommand("train", "Train a detector (joint supervisor objective)");
    add_common(train, &train_args);
    train->add_option("corpus", train_corpus, "Corpus JSONL")->required();

    mgtd::cli::CommonArgs eval_args;
    mgtd::cli::EvalArgs eval_opts;
    auto* eval = app.add_subcommand("eval", "Score a corpus split and report metrics");
    add_common(eval, &eval_args);
    eval->add_option("checkpoint", eval_opts.checkpoint_path, "Checkpoint file")->required();
    eval->add_option("corpus", eval_opts.corpus_path, "Corpus JSONL")->required();
    eval->add_option("--split", eval_opts.split, "Split to score: train|val|test|all");
    eval->add_option("--group-by", eval_opts.group_by, "Partition tag: model|domain|variant");
    eval->add_option("--fpr", eval_opts.fpr_targets, "TPR@FPR target (repeatable)");
    eval->add_flag("--plots", eval_opts.plots, "Emit ROC and histogram SVG files");
    eval->add_option("--scores", eval_opts.scores_out, "Also write per-sample scores JSONL");

    mgtd::cli::CommonArgs mix_args;
    std::string mix_corpus, mix_out;
    double mix_fraction = 0.25;
    auto* mix = app.add_subcommand("mix", "Replace a fraction of MGT sentences with HGT ones");
    add_common(mix, &mix_args);
    mix->add_option("corpus", mix_corpus, "Corpus JSONL")->required();
    mix->add_option("--fraction", mix_fraction, "Fraction of sentences to replace");
    mix->add_option("--output", mix_out, "Output corpus path");

    mgtd::cli::CommonArgs synth_args;
    mgtd::cli::SynthArgs synth_opts;
    auto* synth = app.add_subcommand("synth", "Generate a synthetic corpus from token distributions");
    add_common(synth, &synth_args);
    synth->add_option("--alphabet", synth_opts.alphabet, "Alphabet size");
    synth->add_option("--n", synth_opts.n, "Tokens per text");
    synth->add_option("--count", synth_opts.count_per_class, "Samples per class");
    synth->add_option("--alpha", synth_opts.alpha, "Human-token ratio inside MGT");
    synth->add_option("--delta", synth_opts.delta, "TV distance of the generated h/m pair");
    synth->add_option("--h", synth_opts.h, "Explicit human distribution (repeatable)");
    synth->add_option("--m", synth_opts.m, "Explicit machine distribution (repeatable)");
    synth->add_option("--output", synth_opts.out_file, "Output corpus path");

    mgtd::cli::CommonArgs verify_args;
    mgtd::cli::VerifyArgs verify_opts;
    auto* verify = app.add_subcommand("verify-theorems", "Check the TV/AUROC bounds numerically");
    add_common(verify, &verify_args);
    verify->add_flag("--strict", verify_opts.strict, "Fail on over-budget grid cells");
    verify->add_option("--grid-file", verify_opts.grid_file, "Custom grid (JSON array)");

    mgtd::cli::CommonArgs kd_args;
    std::string kd_teacher, kd_corpus;
    auto* kd = app.add_subcommand("kd", "Distill a student detector from a teacher checkpoint");
    add_common(kd, &kd_args);
    kd->add_option("teacher", kd_teacher, "Teacher checkpoint")->required();
    kd->add_option("corpus", kd_corpus, "Corpus JSONL")->required();

    mgtd::cli::CommonArgs report_args;
    std::vector<std::string> report_scores;
    std::string report_group_by = "model";
    std::vector<double> report_fpr;
    auto* report = app.add_subcommand("report", "Metrics from per-sample score files");
    add_common(report, &report_args);
    report->add_option("scores", report_scores, "Scores JSONL file(s)")->required();
    report->add_option("--group-by", report_group_by, "Partition tag: model|domain|variant");
    report->add_option("--fpr", report_fpr, "TPR@FPR target (repeatable)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (*train) return mgtd::cli::cmd_train(train_args, train_corpus);
        if (*eval) return mgtd::cli::cmd_eval(eval_args, eval_opts);
        if (*mix) return mgtd::cli::cmd_mix(mix_args, mix_corpus, mix_fraction, mix_out);
        if (*synth) return mgtd::cli::cmd_synth(synth_args, synth_opts);
        if (*verify) return mgtd::cli::cmd_verify_theorems(verify_args, verify_opts);
        if (*kd) return mgtd::cli::cmd_kd(kd_args, kd_teacher, kd_corpus);
        if (*report)
            return mgtd::cli::cmd_report(report_args, report_scores, report_group_by, report_fpr);
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return mgtd::cli::exit_code_for(e);
    }
    return 0;
}
