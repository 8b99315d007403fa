#include "mgtd/checkpoint.hpp"

#include <cstring>
#include <fstream>

#include <json.hpp>

#include "mgtd/error.hpp"

namespace mgtd {

namespace {

constexpr char kMagic[8] = {'M', 'G', 'T', 'D', 'C', 'K', 'P', '1'};

std::uint64_t fnv1a(const unsigned char* data, std::size_t size) {
    std::uint64_t h = 14695981039346656037ull;
    for (std::size_t i = 0; i < size; ++i) {
        h ^= data[i];
        h *= 1099511628211ull;
    }
    return h;
}

void write_u64(std::ofstream& out, std::uint64_t v) {
    unsigned char buf[8];
    for (int i = 0; i < 8; ++i) buf[i] = static_cast<unsigned char>(v >> (8 * i));
    out.write(reinterpret_cast<const char*>(buf), 8);
}

std::uint64_t read_u64(std::ifstream& in) {
    unsigned char buf[8];
    in.read(reinterpret_cast<char*>(buf), 8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(buf[i]) << (8 * i);
    return v;
}

}  // namespace

void save_checkpoint(const Checkpoint& ckpt, const std::string& path) {
    const auto& det = ckpt.detector.theta;
    const auto& sup = ckpt.supervisor.theta;
    std::vector<unsigned char> payload((det.size() + sup.size()) * sizeof(double));
    std::memcpy(payload.data(), det.data(), det.size() * sizeof(double));
    std::memcpy(payload.data() + det.size() * sizeof(double), sup.data(),
                sup.size() * sizeof(double));

    nlohmann::ordered_json header;
    header["format"] = 1;
    header["detector"] = {{"vocab_size", ckpt.detector.vocab_size},
                          {"embed_dim", ckpt.detector.embed_dim},
                          {"hidden", ckpt.detector.hidden},
                          {"param_count", det.size()}};
    header["supervisor"] = {{"input_dim", ckpt.supervisor.input_dim},
                            {"param_count", sup.size()}};
    header["vocab"] = ckpt.vocab.tokens;
    char hashbuf[32];
    std::snprintf(hashbuf, sizeof(hashbuf), "%016llx",
                  static_cast<unsigned long long>(ckpt.vocab.hash()));
    header["vocab_hash"] = hashbuf;
    header["config"] = serialize(ckpt.config);
    std::snprintf(hashbuf, sizeof(hashbuf), "%016llx",
                  static_cast<unsigned long long>(fnv1a(payload.data(), payload.size())));
    header["payload_hash"] = hashbuf;

    const std::string header_text = header.dump();
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorKind::load, "cannot write checkpoint: " + path);
    out.write(kMagic, sizeof(kMagic));
    write_u64(out, header_text.size());
    out.write(header_text.data(), static_cast<std::streamsize>(header_text.size()));
    out.write(reinterpret_cast<const char*>(payload.data()),
              static_cast<std::streamsize>(payload.size()));
    if (!out) throw Error(ErrorKind::load, "failed writing checkpoint: " + path);
}

Checkpoint load_checkpoint(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorKind::load, "cannot open checkpoint: " + path);

    char magic[8];
    in.read(magic, sizeof(magic));
    if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0)
        throw Error(ErrorKind::integrity, "not a checkpoint file: " + path);

    const std::uint64_t header_size = read_u64(in);
    std::string header_text(header_size, '\0');
    in.read(header_text.data(), static_cast<std::streamsize>(header_size));
    if (!in) throw Error(ErrorKind::integrity, "truncated checkpoint header: " + path);

    nlohmann::json header = nlohmann::json::parse(header_text, nullptr, false);
    if (header.is_discarded())
        throw Error(ErrorKind::integrity, "corrupt checkpoint header: " + path);

    Checkpoint ckpt;
    ckpt.detector.vocab_size = header["detector"]["vocab_size"].get<int>();
    ckpt.detector.embed_dim = header["detector"]["embed_dim"].get<int>();
    ckpt.detector.hidden = header["detector"]["hidden"].get<int>();
    const auto det_count = header["detector"]["param_count"].get<std::size_t>();
    ckpt.supervisor.input_dim = header["supervisor"]["input_dim"].get<int>();
    const auto sup_count = header["supervisor"]["param_count"].get<std::size_t>();

    std::vector<unsigned char> payload((det_count + sup_count) * sizeof(double));
    in.read(reinterpret_cast<char*>(payload.data()),
            static_cast<std::streamsize>(payload.size()));
    if (!in || in.gcount() != static_cast<std::streamsize>(payload.size()))
        throw Error(ErrorKind::integrity, "truncated checkpoint payload: " + path);

    char hashbuf[32];
    std::snprintf(hashbuf, sizeof(hashbuf), "%016llx",
                  static_cast<unsigned long long>(fnv1a(payload.data(), payload.size())));
    if (header["payload_hash"].get<std::string>() != hashbuf)
        throw Error(ErrorKind::integrity, "checkpoint checksum mismatch: " + path);

    ckpt.detector.theta.resize(det_count);
    std::memcpy(ckpt.detector.theta.data(), payload.data(), det_count * sizeof(double));
    ckpt.supervisor.theta.resize(sup_count);
    std::memcpy(ckpt.supervisor.theta.data(), payload.data() + det_count * sizeof(double),
                sup_count * sizeof(double));

    ckpt.vocab = Vocab::from_tokens({});
    ckpt.vocab.tokens = header["vocab"].get<std::vector<std::string>>();
    ckpt.vocab.ids.clear();
    for (std::size_t i = 0; i < ckpt.vocab.tokens.size(); ++i)
        ckpt.vocab.ids[ckpt.vocab.tokens[i]] = static_cast<int>(i);

    ckpt.config = parse_run_config(header["config"].get<std::string>());

    // Cross-checks between header shapes, config echo and stored arrays.
    const auto expected_det = static_cast<std::size_t>(ckpt.detector.vocab_size) *
                                  ckpt.detector.embed_dim +
                              static_cast<std::size_t>(ckpt.detector.hidden) *
                                  ckpt.detector.embed_dim +
                              ckpt.detector.hidden +
                              2 * static_cast<std::size_t>(ckpt.detector.hidden) + 2;
    const auto expected_sup = static_cast<std::size_t>(SupervisorParams::kH1) *
                                  ckpt.supervisor.input_dim +
                              SupervisorParams::kH1 +
                              static_cast<std::size_t>(SupervisorParams::kH2) *
                                  SupervisorParams::kH1 +
                              SupervisorParams::kH2 + 2 * SupervisorParams::kH2 + 2;
    if (det_count != expected_det || sup_count != expected_sup)
        throw Error(ErrorKind::config, "checkpoint shapes disagree with parameter arrays");
    if (ckpt.config.embed_dim != ckpt.detector.embed_dim ||
        ckpt.config.hidden_width != ckpt.detector.hidden)
        throw Error(ErrorKind::config, "checkpoint config echo disagrees with stored shapes");
    if (ckpt.detector.vocab_size != ckpt.vocab.size())
        throw Error(ErrorKind::config, "checkpoint vocabulary size mismatch");

    return ckpt;
}

}  // namespace mgtd
