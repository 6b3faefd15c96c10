#pragma once

#include <cstdint>
#include <functional>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace vsrg {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};
// Unusable input data or configuration.
struct ValidationError : Error {
    using Error::Error;
};
// Filesystem / stream failures.
struct IoError : Error {
    using Error::Error;
};
// NaN/Inf or other numeric breakdown.
struct NumericError : Error {
    using Error::Error;
};

using TokenId = uint32_t;

// Word-boundary sentinel (U+2581 LOWER ONE EIGHTH BLOCK), the usual
// subword-tokenizer convention.
inline constexpr std::string_view kBoundaryMarker = "\xE2\x96\x81";

// ---- UTF-8 ----------------------------------------------------------------

// Byte length of the UTF-8 sequence starting at s[pos]. Returns 1 for an
// invalid lead byte so scanning always makes progress.
std::size_t utf8_seq_len(std::string_view s, std::size_t pos);

// Number of code points in s (invalid bytes count as one each).
std::size_t utf8_count(std::string_view s);

// Splits s into code-point substrings.
std::vector<std::string_view> utf8_chars(std::string_view s);

// Replaces every malformed sequence with U+FFFD. Sets `had_invalid` when a
// replacement happened.
std::string utf8_sanitize(std::string_view s, bool& had_invalid);

// ---- deterministic RNG -----------------------------------------------------

uint64_t splitmix64(uint64_t x);
uint64_t fnv1a64(std::string_view s);

// Stable seed derivation: identical (seed, salt) pairs give identical streams
// on every platform.
inline uint64_t mix_seed(uint64_t seed, uint64_t salt) {
    return splitmix64(seed ^ splitmix64(salt));
}
inline uint64_t mix_seed(uint64_t seed, std::string_view salt) {
    return mix_seed(seed, fnv1a64(salt));
}

// std::shuffle / std::uniform_int_distribution are implementation-defined;
// these are not.
template <typename T>
void seeded_shuffle(std::vector<T>& v, std::mt19937_64& gen) {
    for (std::size_t i = v.size(); i > 1; --i) {
        std::size_t j = static_cast<std::size_t>(gen() % i);
        std::swap(v[i - 1], v[j]);
    }
}

// Uniform double in [0, 1) from the top 53 bits.
inline double uniform01(std::mt19937_64& gen) {
    return static_cast<double>(gen() >> 11) * 0x1.0p-53;
}

// Box-Muller; deterministic given the engine state.
double gaussian(std::mt19937_64& gen);

// ---- misc ------------------------------------------------------------------

bool is_ascii_space(char c);

// Splits on runs of ASCII whitespace; no empty pieces.
std::vector<std::string_view> split_words(std::string_view text);

// Collapses whitespace runs to single spaces and trims the ends. This is the
// normalization the decoder round-trips to.
std::string normalize_whitespace(std::string_view text);

std::string_view trim(std::string_view s);

// Runs fn(begin, end) over [0, n) split into `threads` contiguous chunks.
// Chunk boundaries depend only on (n, threads), so any writer that touches
// disjoint state per index is deterministic.
void parallel_for(std::size_t n, unsigned threads,
                  const std::function<void(std::size_t, std::size_t)>& fn);

}  // namespace vsrg
