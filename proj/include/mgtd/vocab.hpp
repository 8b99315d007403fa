#pragma once

#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

#include "mgtd/corpus.hpp"

namespace mgtd {

/// Whitespace-token vocabulary with reserved padding and unknown entries.
struct Vocab {
    std::vector<std::string> tokens;           // id -> token
    std::unordered_map<std::string, int> ids;  // token -> id
    int pad_id = 0;
    int unk_id = 1;

    int size() const { return static_cast<int>(tokens.size()); }
    std::uint64_t hash() const;  // FNV-1a over tokens in id order

    static Vocab from_tokens(std::vector<std::string> word_list);
};

/// Deterministic vocabulary: "<pad>", "<unk>", then the corpus's unique
/// whitespace tokens in sorted order.
Vocab build_vocab(const Corpus& corpus);

struct TokenSeq {
    std::vector<int> ids;  // padded to max_len
    int length = 0;        // tokens before padding
};

/// Whitespace tokenization with unknown fallback, truncated/padded to max_len.
TokenSeq tokenize(const TextSample& sample, const Vocab& vocab, int max_len);

}  // namespace mgtd
