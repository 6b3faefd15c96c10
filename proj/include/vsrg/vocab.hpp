#pragma once

#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

#include "vsrg/corpus.hpp"

namespace vsrg {

struct SpecialIds {
    TokenId pad = 0;
    TokenId unk = 1;
    TokenId bos = 2;
    TokenId eos = 3;
};

inline constexpr std::size_t kNumSpecials = 4;
inline constexpr std::size_t kNumByteTokens = 256;
inline constexpr std::size_t kNumReserved = kNumSpecials + kNumByteTokens;

// Dense-id token inventory. Ids 0..3 are the specials, 4..259 the byte
// fallback tokens <0x00>..<0xFF>; lexical tokens follow.
struct Vocabulary {
    std::vector<std::string> tokens;
    std::unordered_map<std::string, TokenId> id_of;
    SpecialIds specials;
    TokenId byte_token_base = kNumSpecials;

    std::size_t size() const { return tokens.size(); }

    bool is_special(TokenId id) const { return id < kNumSpecials; }
    bool is_byte(TokenId id) const {
        return id >= byte_token_base && id < byte_token_base + kNumByteTokens;
    }
    uint8_t byte_value(TokenId id) const { return static_cast<uint8_t>(id - byte_token_base); }
    TokenId byte_token(uint8_t value) const { return byte_token_base + value; }

    // Lexical tokens start after the reserved block.
    TokenId first_lexical() const { return static_cast<TokenId>(kNumReserved); }

    TokenId lookup(std::string_view surface) const;  // throws if absent

    // Builds [specials][256 byte tokens][lexical...]; duplicate lexical
    // surfaces are rejected.
    static Vocabulary with_reserved(const std::vector<std::string>& lexical);
};

// select_top_k / prune_teacher / fill_multilingual / build ------------------

// The k highest-count tokens, ties broken lexicographically; all tokens if
// the table is smaller than k.
std::vector<std::string> select_top_k(const FrequencyTable& freq, std::size_t k);

// Teacher lexical tokens that survive pruning. A token is pruned iff it is
// itself in `retained` or its surface is fully coverable by greedy
// longest-match over the retained set. Survivors keep teacher order.
std::vector<std::string> prune_teacher(const Vocabulary& teacher_vocab,
                                       const std::vector<std::string>& retained);

struct BuildPlan {
    std::size_t monolingual_top_k = 0;
    std::size_t target_size = 0;
    std::vector<std::size_t> lengths;  // round-robin bucket order
    const Vocabulary* teacher_vocab = nullptr;
    const FrequencyTable* mono_freq = nullptr;
    const FrequencyTable* multi_freq = nullptr;
};

// Fills remaining slots round-robin over the length buckets, each bucket in
// (count desc, surface asc) order, skipping already-chosen surfaces. Throws
// "vocabulary underfull" when candidates run out before target_size.
std::vector<std::string> fill_multilingual(const BuildPlan& plan,
                                           const std::vector<std::string>& already_chosen);

// Layout: [specials][bytes][mono top-k][teacher survivors][multilingual fill],
// exactly plan.target_size tokens.
Vocabulary build_vocabulary(const BuildPlan& plan);

// Vocabulary file: line i = surface of id i, with \n, \t, \\ escapes; header
// lines `#size N`, `#specials pad=0 unk=1 bos=2 eos=3`, `#bytes base=4`.
void save_vocabulary(const Vocabulary& vocab, const std::string& path);
Vocabulary load_vocabulary(const std::string& path);

std::string serialize_vocabulary(const Vocabulary& vocab);
Vocabulary parse_vocabulary(std::string_view text);

std::string escape_surface(std::string_view s);
std::string unescape_surface(std::string_view s);

}  // namespace vsrg
