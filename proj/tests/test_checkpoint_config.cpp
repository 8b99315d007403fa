#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "mgtd/checkpoint.hpp"
#include "mgtd/error.hpp"
#include "mgtd/run_config.hpp"

using namespace mgtd;

namespace {

std::string temp_file(const std::string& name) {
    return (std::filesystem::temp_directory_path() / name).string();
}

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

Checkpoint sample_checkpoint() {
    Checkpoint ckpt;
    ckpt.config = RunConfig{};
    ckpt.config.embed_dim = 4;
    ckpt.config.hidden_width = 8;
    ckpt.config.k = 2;
    ckpt.vocab = Vocab::from_tokens({"t0", "t1", "t2", "t3"});
    Rng det_rng(1), sup_rng(2);
    ckpt.detector = DetectorParams::init(ckpt.vocab.size(), 4, 8, det_rng);
    ckpt.supervisor = SupervisorParams::init(2 * 4, sup_rng);
    return ckpt;
}

}  // namespace

TEST_CASE("run config serializes, parses and rejects bad keys") {
    RunConfig config;
    config.lambda = 2.5;
    config.seed = 42;
    config.gate_mode = GateMode::soft;
    config.stop_embedding_gradient = true;

    const auto text = serialize(config);
    const auto parsed = parse_run_config(text);
    CHECK(parsed.lambda == config.lambda);
    CHECK(parsed.seed == config.seed);
    CHECK(parsed.gate_mode == GateMode::soft);
    CHECK(parsed.stop_embedding_gradient);
    CHECK(serialize(parsed) == text);  // canonical round trip

    CHECK_THROWS_AS(parse_run_config("mystery = 1\n"), Error);
    CHECK_THROWS_AS(parse_run_config("k 3\n"), Error);
    CHECK_THROWS_AS(parse_run_config("k = -1\n"), Error);
    CHECK_THROWS_AS(parse_run_config("smoothing = 0.7\n"), Error);

    RunConfig overridden;
    apply_override(overridden, "lambda", "0");
    CHECK(overridden.lambda == 0.0);
    CHECK_THROWS_AS(apply_override(overridden, "nope", "1"), Error);
    CHECK_THROWS_AS(apply_override(overridden, "lambda", "abc"), Error);

    // Comments and blank lines are tolerated.
    const auto commented = parse_run_config("# comment\n\nk = 4\n");
    CHECK(commented.k == 4);
}

TEST_CASE("checkpoint round-trips bit-exactly and byte-identically") {
    const auto ckpt = sample_checkpoint();
    const auto path1 = temp_file("mgtd_ckpt_a.bin");
    const auto path2 = temp_file("mgtd_ckpt_b.bin");

    save_checkpoint(ckpt, path1);
    const auto loaded = load_checkpoint(path1);
    CHECK(loaded.detector.theta == ckpt.detector.theta);  // bit-exact
    CHECK(loaded.supervisor.theta == ckpt.supervisor.theta);
    CHECK(loaded.vocab.tokens == ckpt.vocab.tokens);
    CHECK(loaded.vocab.hash() == ckpt.vocab.hash());
    CHECK(serialize(loaded.config) == serialize(ckpt.config));

    save_checkpoint(loaded, path2);
    CHECK(slurp(path1) == slurp(path2));  // save -> load -> save identical bytes
}

TEST_CASE("checkpoint integrity and shape errors") {
    const auto ckpt = sample_checkpoint();
    const auto path = temp_file("mgtd_ckpt_corrupt.bin");
    save_checkpoint(ckpt, path);

    // Flip one payload byte (the payload sits at the end of the file).
    auto bytes = slurp(path);
    bytes[bytes.size() - 5] = static_cast<char>(bytes[bytes.size() - 5] ^ 0x01);
    {
        std::ofstream out(path, std::ios::binary);
        out << bytes;
    }
    try {
        load_checkpoint(path);
        FAIL("expected integrity error");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::integrity);
    }

    // Not a checkpoint at all.
    const auto garbage = temp_file("mgtd_ckpt_garbage.bin");
    {
        std::ofstream out(garbage, std::ios::binary);
        out << "plainly not a checkpoint";
    }
    try {
        load_checkpoint(garbage);
        FAIL("expected integrity error");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::integrity);
    }

    // Mismatched dims in the header are a configuration error: rebuild the
    // container with a config echo that disagrees with the stored shapes.
    auto tampered = ckpt;
    tampered.config.embed_dim = 16;
    const auto mismatch_path = temp_file("mgtd_ckpt_mismatch.bin");
    save_checkpoint(tampered, mismatch_path);
    try {
        load_checkpoint(mismatch_path);
        FAIL("expected configuration error");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::config);
    }
}
