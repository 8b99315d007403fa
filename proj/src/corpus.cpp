#include "mgtd/corpus.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "mgtd/error.hpp"
#include "mgtd/rng.hpp"

namespace mgtd {

namespace {

bool is_space(char c) {
    return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
}

bool is_sentence_final(char c) { return c == '.' || c == '?' || c == '!'; }

void validate_sample(const TextSample& s, const std::string& where) {
    if (s.label != 0 && s.label != 1)
        throw Error(ErrorKind::validation, where + ": label must be 0 or 1, got " + std::to_string(s.label));
    if (s.mix_ratio < 0.0 || s.mix_ratio > 1.0)
        throw Error(ErrorKind::validation, where + ": mix_ratio must be in [0,1]");
    if (s.variant == Variant::mixed && (s.label != 1 || s.mix_ratio <= 0.0))
        throw Error(ErrorKind::validation, where + ": variant=mixed requires label=1 and mix_ratio>0");
}

std::string join_sentences(const std::vector<std::string>& sentences) {
    std::string out;
    for (std::size_t i = 0; i < sentences.size(); ++i) {
        if (i) out += ' ';
        out += sentences[i];
    }
    return out;
}

}  // namespace

std::string to_string(Variant v) {
    switch (v) {
        case Variant::original: return "original";
        case Variant::mixed: return "mixed";
        case Variant::paraphrase: return "paraphrase";
        case Variant::synthetic: return "synthetic";
    }
    return "original";
}

std::string to_string(Split s) {
    switch (s) {
        case Split::train: return "train";
        case Split::val: return "val";
        case Split::test: return "test";
    }
    return "train";
}

std::optional<Variant> variant_from_string(const std::string& s) {
    if (s == "original") return Variant::original;
    if (s == "mixed") return Variant::mixed;
    if (s == "paraphrase") return Variant::paraphrase;
    if (s == "synthetic") return Variant::synthetic;
    return std::nullopt;
}

std::vector<std::size_t> Corpus::indices_in(Split s) const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        auto it = split_of.find(samples[i].id);
        if (it != split_of.end() && it->second == s) out.push_back(i);
    }
    return out;
}

void SyntheticDist::validate() const {
    if (alphabet_size < 1)
        throw Error(ErrorKind::validation, "alphabet_size must be positive");
    if (static_cast<int>(h.size()) != alphabet_size || static_cast<int>(m.size()) != alphabet_size)
        throw Error(ErrorKind::validation, "h and m must both have length alphabet_size");
    for (const auto* v : {&h, &m}) {
        double sum = 0.0;
        for (double p : *v) {
            if (p < 0.0 || !std::isfinite(p))
                throw Error(ErrorKind::validation, "distribution entries must be nonnegative and finite");
            sum += p;
        }
        if (std::abs(sum - 1.0) > 1e-12)
            throw Error(ErrorKind::validation, "distribution must sum to 1 within 1e-12");
    }
}

std::string normalize_whitespace(const std::string& text) {
    std::string out;
    bool pending_space = false;
    for (char c : text) {
        if (is_space(c)) {
            if (!out.empty()) pending_space = true;
        } else {
            if (pending_space) out += ' ';
            pending_space = false;
            out += c;
        }
    }
    return out;
}

std::vector<std::string> split_sentences(const std::string& text) {
    const std::string norm = normalize_whitespace(text);
    std::vector<std::string> sentences;
    std::string current;
    for (std::size_t i = 0; i < norm.size(); ++i) {
        const char c = norm[i];
        if (c == ' ') {
            // A space right after sentence-final punctuation closes the sentence.
            if (!current.empty() && is_sentence_final(current.back())) {
                sentences.push_back(current);
                current.clear();
            } else {
                current += c;
            }
        } else {
            current += c;
        }
    }
    if (!current.empty()) sentences.push_back(current);
    return sentences;
}

Corpus load_jsonl(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::load, "cannot open corpus file: " + path);

    Corpus corpus;
    std::string line;
    std::size_t line_no = 0;
    std::set<std::string> seen_ids;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        const std::string where = path + ":" + std::to_string(line_no);

        nlohmann::json rec = nlohmann::json::parse(line, nullptr, false);
        if (rec.is_discarded() || !rec.is_object())
            throw Error(ErrorKind::load, where + ": malformed JSON record");
        if (!rec.contains("text") || !rec["text"].is_string())
            throw Error(ErrorKind::load, where + ": missing required string key \"text\"");
        if (!rec.contains("label") || !rec["label"].is_number_integer())
            throw Error(ErrorKind::load, where + ": missing required integer key \"label\"");

        TextSample s;
        s.text = rec["text"].get<std::string>();
        s.label = rec["label"].get<int>();
        s.id = rec.value("id", "r" + std::to_string(line_no));
        s.source_model = rec.value("model", "");
        s.domain = rec.value("domain", "");
        s.mix_ratio = rec.value("mix_ratio", 0.0);
        if (rec.contains("variant")) {
            auto v = variant_from_string(rec["variant"].get<std::string>());
            if (!v) throw Error(ErrorKind::validation, where + ": unknown variant \"" +
                                                           rec["variant"].get<std::string>() + "\"");
            s.variant = *v;
        }
        s.sentences = split_sentences(s.text);
        validate_sample(s, where);
        if (!seen_ids.insert(s.id).second)
            throw Error(ErrorKind::validation, where + ": duplicate id \"" + s.id + "\"");
        corpus.samples.push_back(std::move(s));
    }
    return corpus;
}

void save_jsonl(const Corpus& corpus, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorKind::load, "cannot write corpus file: " + path);
    for (const auto& s : corpus.samples) {
        nlohmann::ordered_json rec;
        rec["id"] = s.id;
        rec["text"] = s.text;
        rec["label"] = s.label;
        rec["model"] = s.source_model;
        rec["domain"] = s.domain;
        rec["variant"] = to_string(s.variant);
        rec["mix_ratio"] = s.mix_ratio;
        out << rec.dump() << '\n';
    }
}

Corpus split(Corpus corpus, double train_frac, std::uint64_t seed) {
    if (!(train_frac > 0.0 && train_frac < 1.0))
        throw Error(ErrorKind::input, "train_frac must be in (0,1)");
    const std::size_t n = corpus.samples.size();
    const auto n_train = static_cast<std::size_t>(train_frac * static_cast<double>(n));
    if (n_train < 1)
        throw Error(ErrorKind::validation,
                    "train split would be empty for N=" + std::to_string(n));

    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    Rng rng(seed);
    for (std::size_t i = n; i > 1; --i) {
        const std::size_t j = rng.below(i);
        std::swap(order[i - 1], order[j]);
    }

    const std::size_t n_val = (n - n_train) / 2;
    corpus.split_of.clear();
    bool train_has[2] = {false, false};
    for (std::size_t pos = 0; pos < n; ++pos) {
        const auto& s = corpus.samples[order[pos]];
        Split sp = pos < n_train             ? Split::train
                   : pos < n_train + n_val   ? Split::val
                                             : Split::test;
        corpus.split_of[s.id] = sp;
        if (sp == Split::train) train_has[s.label] = true;
    }
    for (int c : {0, 1})
        if (!train_has[c])
            corpus.warnings.push_back("train split contains no samples of class " + std::to_string(c));
    return corpus;
}

Corpus make_mixed(const Corpus& corpus, double fraction, std::uint64_t seed) {
    if (fraction < 0.0 || fraction > 1.0)
        throw Error(ErrorKind::input, "fraction must be in [0,1]");
    if (fraction == 0.0) return corpus;

    std::vector<std::string> hgt_pool;
    for (const auto& s : corpus.samples)
        if (s.label == 0)
            for (const auto& sent : s.sentences) hgt_pool.push_back(sent);

    bool any_mgt = std::any_of(corpus.samples.begin(), corpus.samples.end(),
                               [](const TextSample& s) { return s.label == 1; });
    if (any_mgt && hgt_pool.empty())
        throw Error(ErrorKind::construction, "no HGT sentences available to mix in");

    Corpus out = corpus;
    Rng rng(seed);
    for (auto& s : out.samples) {
        if (s.label != 1) continue;
        const std::size_t ns = s.sentences.size();
        if (ns < 2) {
            out.warnings.push_back("sample " + s.id + " too short to mix; left unchanged");
            continue;
        }
        std::size_t replace = static_cast<std::size_t>(
            std::llround(fraction * static_cast<double>(ns)));
        replace = std::max<std::size_t>(replace, 1);
        replace = std::min(replace, ns);

        // Draw `replace` distinct positions, then an HGT donor per position.
        std::vector<std::size_t> positions(ns);
        for (std::size_t i = 0; i < ns; ++i) positions[i] = i;
        for (std::size_t i = 0; i < replace; ++i) {
            const std::size_t j = i + rng.below(ns - i);
            std::swap(positions[i], positions[j]);
        }
        std::vector<std::size_t> chosen(positions.begin(), positions.begin() + static_cast<long>(replace));
        std::sort(chosen.begin(), chosen.end());
        for (std::size_t pos : chosen)
            s.sentences[pos] = hgt_pool[rng.below(hgt_pool.size())];

        s.text = join_sentences(s.sentences);
        s.variant = Variant::mixed;
        s.mix_ratio = fraction;
    }
    return out;
}

Corpus gen_synthetic(const SyntheticDist& dist, int n, int count_per_class,
                     double alpha, std::uint64_t seed) {
    dist.validate();
    if (n < 1) throw Error(ErrorKind::input, "n must be >= 1");
    if (count_per_class < 1) throw Error(ErrorKind::input, "count_per_class must be >= 1");
    if (alpha < 0.0 || alpha >= 1.0) throw Error(ErrorKind::input, "alpha must be in [0,1)");

    Corpus corpus;
    const double exact_human = alpha * n;
    const int human_count = static_cast<int>(std::llround(exact_human));
    if (std::abs(exact_human - human_count) > 1e-9)
        corpus.warnings.push_back("alpha*n not integral; rounded human token count to " +
                                  std::to_string(human_count));
    const int machine_count = n - human_count;

    Rng rng(seed);
    auto render = [&](std::span<const double> probs, int count, std::string* text) {
        for (int t = 0; t < count; ++t) {
            if (!text->empty()) *text += ' ';
            *text += 't' + std::to_string(rng.categorical(probs));
        }
    };

    char idbuf[32];
    for (int i = 0; i < count_per_class; ++i) {
        TextSample s;
        std::snprintf(idbuf, sizeof(idbuf), "h%06d", i);
        s.id = idbuf;
        render(dist.h, n, &s.text);
        s.sentences = split_sentences(s.text);
        s.label = 0;
        s.source_model = "human";
        s.domain = "synthetic";
        s.variant = Variant::synthetic;
        corpus.samples.push_back(std::move(s));
    }
    for (int i = 0; i < count_per_class; ++i) {
        TextSample s;
        std::snprintf(idbuf, sizeof(idbuf), "m%06d", i);
        s.id = idbuf;
        render(dist.m, machine_count, &s.text);
        render(dist.h, human_count, &s.text);
        s.sentences = split_sentences(s.text);
        s.label = 1;
        s.source_model = "synthetic";
        s.domain = "synthetic";
        s.variant = Variant::synthetic;
        s.mix_ratio = alpha;
        corpus.samples.push_back(std::move(s));
    }
    return corpus;
}

}  // namespace mgtd
