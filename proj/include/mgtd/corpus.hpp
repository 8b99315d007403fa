#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

namespace mgtd {

enum class Variant { original, mixed, paraphrase, synthetic };
enum class Split { train, val, test };

std::string to_string(Variant v);
std::string to_string(Split s);
std::optional<Variant> variant_from_string(const std::string& s);

/// One labeled text. label 0 = human-written (HGT), 1 = machine-generated (MGT).
/// mix_ratio is the human-content ratio alpha; 0 for pure samples.
struct TextSample {
    std::string id;
    std::string text;
    std::vector<std::string> sentences;
    int label = 0;
    std::string source_model;
    std::string domain;
    Variant variant = Variant::original;
    double mix_ratio = 0.0;
};

struct Corpus {
    std::vector<TextSample> samples;
    std::unordered_map<std::string, Split> split_of;
    std::vector<std::string> warnings;

    bool has_split() const { return !split_of.empty(); }
    std::vector<std::size_t> indices_in(Split s) const;
};

/// A pair of categorical token distributions over a finite alphabet:
/// h for human-generated tokens, m for machine-generated ones.
struct SyntheticDist {
    int alphabet_size = 0;
    std::vector<double> h;
    std::vector<double> m;

    /// Throws Error(validation) unless both vectors are nonnegative,
    /// sum to 1 within 1e-12 and have length alphabet_size.
    void validate() const;
};

/// Splits on sentence-final [.?!] followed by whitespace, collapsing
/// internal whitespace runs; joining the result with single spaces
/// reproduces the input up to whitespace normalization.
std::vector<std::string> split_sentences(const std::string& text);

/// Collapses whitespace runs to single spaces and trims the ends.
std::string normalize_whitespace(const std::string& text);

/// One JSON record per line: {"id"?, "text", "label", "model"?, "domain"?,
/// "variant"?, "mix_ratio"?}. Unknown keys are ignored. Errors name the line.
Corpus load_jsonl(const std::string& path);
void save_jsonl(const Corpus& corpus, const std::string& path);

/// Assigns floor(train_frac*N) samples to train by seeded shuffle and halves
/// the remainder into val/test. A class missing from the train split is
/// recorded as a warning on the returned corpus.
Corpus split(Corpus corpus, double train_frac, std::uint64_t seed);

/// Replaces round(fraction * num_sentences) sentences of every MGT sample
/// (at least one when fraction > 0 and the text has >= 2 sentences) with
/// uniformly drawn HGT sentences, in place. HGT samples pass through
/// byte-exactly; labels stay 1, variant becomes mixed.
Corpus make_mixed(const Corpus& corpus, double fraction, std::uint64_t seed);

/// Emits count_per_class HGT samples (n tokens i.i.d. from h) and
/// count_per_class MGT samples (ceil((1-alpha)*n) tokens from m followed by
/// the remaining tokens from h). Tokens render as "t<i>" words so the
/// whitespace tokenizer round-trips them losslessly.
Corpus gen_synthetic(const SyntheticDist& dist, int n, int count_per_class,
                     double alpha, std::uint64_t seed);

}  // namespace mgtd
