#include "mgtd/run_config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "mgtd/error.hpp"

namespace mgtd {

namespace {

std::string format_double(double v) {
    char buf[32];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, ptr);
}

double parse_double(const std::string& key, const std::string& value) {
    try {
        std::size_t used = 0;
        const double v = std::stod(value, &used);
        if (used != value.size()) throw std::invalid_argument(value);
        return v;
    } catch (const std::exception&) {
        throw Error(ErrorKind::config, "invalid value for " + key + ": \"" + value + "\"");
    }
}

long long parse_int(const std::string& key, const std::string& value) {
    try {
        std::size_t used = 0;
        const long long v = std::stoll(value, &used);
        if (used != value.size()) throw std::invalid_argument(value);
        return v;
    } catch (const std::exception&) {
        throw Error(ErrorKind::config, "invalid value for " + key + ": \"" + value + "\"");
    }
}

bool parse_bool(const std::string& key, const std::string& value) {
    if (value == "true" || value == "1") return true;
    if (value == "false" || value == "0") return false;
    throw Error(ErrorKind::config, "invalid value for " + key + ": \"" + value + "\"");
}

std::string trim(const std::string& s) {
    const auto begin = s.find_first_not_of(" \t\r");
    if (begin == std::string::npos) return "";
    const auto end = s.find_last_not_of(" \t\r");
    return s.substr(begin, end - begin + 1);
}

}  // namespace

void RunConfig::validate() const {
    auto fail = [](const std::string& msg) { throw Error(ErrorKind::config, msg); };
    if (k < 1) fail("k must be >= 1");
    if (n_prime < 1) fail("n_prime must be >= 1");
    if (lambda < 0.0) fail("lambda must be >= 0");
    if (tau <= 0.0) fail("tau must be > 0");
    if (batch_size < 1) fail("batch_size must be >= 1");
    if (epochs < 0) fail("epochs must be >= 0");
    if (learning_rate < 0.0) fail("learning_rate must be >= 0");
    if (smoothing < 0.0 || smoothing >= 0.5) fail("smoothing must be in [0, 0.5)");
    if (max_len < 1) fail("max_len must be >= 1");
    if (embed_dim < 1) fail("embed_dim must be >= 1");
    if (hidden_width < 1) fail("hidden_width must be >= 1");
    if (kd_temperature <= 0.0) fail("kd_temperature must be > 0");
    if (kd_alpha < 0.0 || kd_alpha > 1.0) fail("kd_alpha must be in [0,1]");
    if (!(train_frac > 0.0 && train_frac < 1.0)) fail("train_frac must be in (0,1)");
}

std::string serialize(const RunConfig& c) {
    std::ostringstream out;
    out << "k = " << c.k << '\n';
    out << "n_prime = " << c.n_prime << '\n';
    out << "lambda = " << format_double(c.lambda) << '\n';
    out << "tau = " << format_double(c.tau) << '\n';
    out << "gate_mode = " << to_string(c.gate_mode) << '\n';
    out << "batch_size = " << c.batch_size << '\n';
    out << "epochs = " << c.epochs << '\n';
    out << "learning_rate = " << format_double(c.learning_rate) << '\n';
    out << "seed = " << c.seed << '\n';
    out << "smoothing = " << format_double(c.smoothing) << '\n';
    out << "max_len = " << c.max_len << '\n';
    out << "embed_dim = " << c.embed_dim << '\n';
    out << "hidden_width = " << c.hidden_width << '\n';
    out << "stop_embedding_gradient = " << (c.stop_embedding_gradient ? "true" : "false") << '\n';
    out << "kd_temperature = " << format_double(c.kd_temperature) << '\n';
    out << "kd_alpha = " << format_double(c.kd_alpha) << '\n';
    out << "train_frac = " << format_double(c.train_frac) << '\n';
    return out.str();
}

void apply_override(RunConfig& c, const std::string& key, const std::string& value) {
    if (key == "k") c.k = static_cast<int>(parse_int(key, value));
    else if (key == "n_prime") c.n_prime = static_cast<int>(parse_int(key, value));
    else if (key == "lambda") c.lambda = parse_double(key, value);
    else if (key == "tau") c.tau = parse_double(key, value);
    else if (key == "gate_mode") {
        auto mode = gate_mode_from_string(value);
        if (!mode) throw Error(ErrorKind::config, "invalid gate_mode \"" + value + "\"");
        c.gate_mode = *mode;
    } else if (key == "batch_size") c.batch_size = static_cast<int>(parse_int(key, value));
    else if (key == "epochs") c.epochs = static_cast<int>(parse_int(key, value));
    else if (key == "learning_rate") c.learning_rate = parse_double(key, value);
    else if (key == "seed") c.seed = static_cast<std::uint64_t>(parse_int(key, value));
    else if (key == "smoothing") c.smoothing = parse_double(key, value);
    else if (key == "max_len") c.max_len = static_cast<int>(parse_int(key, value));
    else if (key == "embed_dim") c.embed_dim = static_cast<int>(parse_int(key, value));
    else if (key == "hidden_width") c.hidden_width = static_cast<int>(parse_int(key, value));
    else if (key == "stop_embedding_gradient") c.stop_embedding_gradient = parse_bool(key, value);
    else if (key == "kd_temperature") c.kd_temperature = parse_double(key, value);
    else if (key == "kd_alpha") c.kd_alpha = parse_double(key, value);
    else if (key == "train_frac") c.train_frac = parse_double(key, value);
    else throw Error(ErrorKind::config, "unknown config key \"" + key + "\"");
}

RunConfig parse_run_config(const std::string& text) {
    RunConfig config;
    std::istringstream in(text);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const std::string stripped = trim(line);
        if (stripped.empty() || stripped[0] == '#') continue;
        const auto eq = stripped.find('=');
        if (eq == std::string::npos)
            throw Error(ErrorKind::config,
                        "config line " + std::to_string(line_no) + ": expected key = value");
        apply_override(config, trim(stripped.substr(0, eq)), trim(stripped.substr(eq + 1)));
    }
    config.validate();
    return config;
}

RunConfig load_run_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::config, "cannot open config file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_run_config(buf.str());
}

}  // namespace mgtd
