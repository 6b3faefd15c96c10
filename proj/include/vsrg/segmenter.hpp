#pragma once

#include <cstdint>
#include <limits>
#include <string>
#include <unordered_map>
#include <vector>

#include "vsrg/corpus.hpp"
#include "vsrg/vocab.hpp"

namespace vsrg {

// Byte-level trie for greedy longest-match lookups. Transitions live in one
// flat hash map keyed by (node << 8 | byte).
class ByteTrie {
  public:
    ByteTrie() : values_(1, -1) {}

    void insert(std::string_view surface, int32_t value);

    // Longest token that is a prefix of s starting at pos. Returns
    // {value, byte length}, value -1 when nothing matches.
    std::pair<int32_t, std::size_t> longest(std::string_view s, std::size_t pos) const;

    // True when s is fully coverable by greedy longest-match segments.
    bool covers(std::string_view s) const;

  private:
    std::unordered_map<uint64_t, uint32_t> next_;
    std::vector<int32_t> values_;
};

struct TokenIdSequence {
    std::vector<TokenId> ids;
    std::size_t source_len_chars = 0;
};

struct DecodeResult {
    std::string text;
    bool had_invalid_utf8 = false;
};

struct FragmentationReport {
    double tokens_per_word = 0.0;
    uint64_t total_tokens = 0;
    uint64_t total_words = 0;
};

struct SegmenterOptions {
    // Word mode pre-tokenizes on whitespace and prefixes each word with the
    // boundary marker. Raw mode matches the bare character stream, which is
    // what surface-form mapping and tokenizer frequency analysis need.
    bool word_boundaries = true;
    // When false, unmatched code points emit UNK instead of their bytes,
    // mimicking teacher tokenizers without byte coverage.
    bool byte_fallback = true;
};

// Greedy longest-match segmentation over an immutable Vocabulary, with byte
// fallback so every Unicode string is encodable. Encode/decode are pure and
// callable concurrently.
class Segmenter {
  public:
    explicit Segmenter(const Vocabulary& vocab, SegmenterOptions options = {});

    const Vocabulary& vocab() const { return *vocab_; }

    TokenIdSequence encode(std::string_view text,
                           std::size_t max_len = std::numeric_limits<std::size_t>::max()) const;

    DecodeResult decode(const std::vector<TokenId>& ids) const;

    // Greedy match over a bare surface (no pre-tokenization, no marker).
    std::vector<TokenId> match(std::string_view surface) const;

    // Per-record segmentation used by frequency counting; honors the mode.
    std::vector<TokenId> segment_ids(std::string_view text) const;

    FragmentationReport fragmentation(const std::vector<CorpusRecord>& records) const;

  private:
    void match_into(std::string_view piece, std::vector<TokenId>& out, std::size_t max_len) const;

    const Vocabulary* vocab_;
    SegmenterOptions options_;
    ByteTrie trie_;
};

}  // namespace vsrg
