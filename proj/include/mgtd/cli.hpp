#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "mgtd/run_config.hpp"

namespace mgtd::cli {

/// Flags shared by every subcommand. Output directories default to
/// $MGTD_OUT_ROOT/<verb> (or ./mgtd_out/<verb>).
struct CommonArgs {
    std::string config_path;              // --config
    std::vector<std::string> overrides;   // --set KEY=VALUE
    std::optional<std::uint64_t> seed;    // --seed
    std::string out_dir;                  // --out
};

/// File config -> --set overrides -> --seed, then validation.
RunConfig resolve_config(const CommonArgs& args);

std::string resolve_out_dir(const CommonArgs& args, const std::string& verb);

struct EvalArgs {
    std::string checkpoint_path;
    std::string corpus_path;
    std::string split = "test";      // train|val|test|all
    std::string group_by = "model";  // model|domain|variant
    std::vector<double> fpr_targets; // defaults to {0.01}
    bool plots = false;
    std::string scores_out;          // optional scores JSONL
};

struct SynthArgs {
    int alphabet = 2;
    int n = 8;
    int count_per_class = 100;
    double alpha = 0.0;
    double delta = 0.2;              // builds m by tilting uniform h unless h/m given
    std::vector<double> h;
    std::vector<double> m;
    std::string out_file;            // defaults to <out>/corpus.jsonl
};

struct VerifyArgs {
    bool strict = false;
    std::string grid_file;           // optional JSON grid spec
};

int cmd_train(const CommonArgs& args, const std::string& corpus_path);
int cmd_eval(const CommonArgs& args, const EvalArgs& eval);
int cmd_mix(const CommonArgs& args, const std::string& corpus_path, double fraction,
            const std::string& out_file);
int cmd_synth(const CommonArgs& args, const SynthArgs& synth);
int cmd_verify_theorems(const CommonArgs& args, const VerifyArgs& verify);
int cmd_kd(const CommonArgs& args, const std::string& teacher_path,
           const std::string& corpus_path);
int cmd_report(const CommonArgs& args, const std::vector<std::string>& scores_paths,
               const std::string& group_by, std::vector<double> fpr_targets);

/// Maps a thrown Error to the documented exit codes:
/// 2 usage/input, 3 integrity, 1 anything else (4 is verification failure).
int exit_code_for(const class std::exception& err);

}  // namespace mgtd::cli
