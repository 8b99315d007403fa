#include "mgtd/vocab.hpp"

#include <algorithm>
#include <set>
#include <sstream>

#include "mgtd/error.hpp"

namespace mgtd {

namespace {

std::vector<std::string> whitespace_tokens(const std::string& text) {
    std::vector<std::string> out;
    std::istringstream in(text);
    std::string word;
    while (in >> word) out.push_back(word);
    return out;
}

}  // namespace

std::uint64_t Vocab::hash() const {
    std::uint64_t h = 14695981039346656037ull;
    for (const auto& t : tokens) {
        for (char c : t) {
            h ^= static_cast<unsigned char>(c);
            h *= 1099511628211ull;
        }
        h ^= 0xFF;  // token separator
        h *= 1099511628211ull;
    }
    return h;
}

Vocab Vocab::from_tokens(std::vector<std::string> word_list) {
    Vocab v;
    v.tokens = {"<pad>", "<unk>"};
    for (auto& w : word_list)
        if (w != "<pad>" && w != "<unk>") v.tokens.push_back(std::move(w));
    for (std::size_t i = 0; i < v.tokens.size(); ++i)
        v.ids[v.tokens[i]] = static_cast<int>(i);
    return v;
}

Vocab build_vocab(const Corpus& corpus) {
    std::set<std::string> unique;
    for (const auto& s : corpus.samples)
        for (auto& w : whitespace_tokens(s.text)) unique.insert(std::move(w));
    return Vocab::from_tokens({unique.begin(), unique.end()});
}

TokenSeq tokenize(const TextSample& sample, const Vocab& vocab, int max_len) {
    if (max_len < 1) throw Error(ErrorKind::config, "max_len must be >= 1");
    TokenSeq seq;
    seq.ids.assign(static_cast<std::size_t>(max_len), vocab.pad_id);
    const auto words = whitespace_tokens(sample.text);
    seq.length = std::min<int>(static_cast<int>(words.size()), max_len);
    for (int i = 0; i < seq.length; ++i) {
        auto it = vocab.ids.find(words[static_cast<std::size_t>(i)]);
        seq.ids[static_cast<std::size_t>(i)] = it != vocab.ids.end() ? it->second : vocab.unk_id;
    }
    return seq;
}

}  // namespace mgtd
