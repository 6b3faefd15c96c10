#include "vsrg/common.hpp"

#include <cmath>
#include <thread>

namespace vsrg {

std::size_t utf8_seq_len(std::string_view s, std::size_t pos) {
    unsigned char lead = static_cast<unsigned char>(s[pos]);
    std::size_t len = 1;
    if (lead < 0x80) {
        len = 1;
    } else if ((lead & 0xE0) == 0xC0) {
        len = 2;
    } else if ((lead & 0xF0) == 0xE0) {
        len = 3;
    } else if ((lead & 0xF8) == 0xF0) {
        len = 4;
    } else {
        return 1;  // stray continuation / invalid lead
    }
    if (pos + len > s.size()) return 1;
    for (std::size_t i = 1; i < len; ++i) {
        if ((static_cast<unsigned char>(s[pos + i]) & 0xC0) != 0x80) return 1;
    }
    return len;
}

std::size_t utf8_count(std::string_view s) {
    std::size_t n = 0;
    for (std::size_t pos = 0; pos < s.size(); pos += utf8_seq_len(s, pos)) ++n;
    return n;
}

std::vector<std::string_view> utf8_chars(std::string_view s) {
    std::vector<std::string_view> out;
    out.reserve(s.size());
    for (std::size_t pos = 0; pos < s.size();) {
        std::size_t len = utf8_seq_len(s, pos);
        out.push_back(s.substr(pos, len));
        pos += len;
    }
    return out;
}

namespace {

// Decodes one code point; returns false on malformed input.
bool decode_cp(std::string_view s, std::size_t pos, std::size_t len, uint32_t& cp) {
    unsigned char lead = static_cast<unsigned char>(s[pos]);
    switch (len) {
        case 1:
            cp = lead;
            return lead < 0x80;
        case 2:
            cp = (lead & 0x1Fu) << 6 | (static_cast<unsigned char>(s[pos + 1]) & 0x3Fu);
            return cp >= 0x80;
        case 3:
            cp = (lead & 0x0Fu) << 12 | (static_cast<unsigned char>(s[pos + 1]) & 0x3Fu) << 6 |
                 (static_cast<unsigned char>(s[pos + 2]) & 0x3Fu);
            return cp >= 0x800 && !(cp >= 0xD800 && cp <= 0xDFFF);
        case 4:
            cp = (lead & 0x07u) << 18 | (static_cast<unsigned char>(s[pos + 1]) & 0x3Fu) << 12 |
                 (static_cast<unsigned char>(s[pos + 2]) & 0x3Fu) << 6 |
                 (static_cast<unsigned char>(s[pos + 3]) & 0x3Fu);
            return cp >= 0x10000 && cp <= 0x10FFFF;
        default:
            return false;
    }
}

}  // namespace

std::string utf8_sanitize(std::string_view s, bool& had_invalid) {
    static constexpr std::string_view kReplacement = "\xEF\xBF\xBD";  // U+FFFD
    had_invalid = false;
    std::string out;
    out.reserve(s.size());
    for (std::size_t pos = 0; pos < s.size();) {
        std::size_t len = utf8_seq_len(s, pos);
        uint32_t cp = 0;
        if (decode_cp(s, pos, len, cp)) {
            out.append(s.substr(pos, len));
        } else {
            out.append(kReplacement);
            had_invalid = true;
        }
        pos += len;
    }
    return out;
}

uint64_t splitmix64(uint64_t x) {
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

uint64_t fnv1a64(std::string_view s) {
    uint64_t h = 1469598103934665603ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

double gaussian(std::mt19937_64& gen) {
    double u1 = uniform01(gen);
    double u2 = uniform01(gen);
    if (u1 < 1e-300) u1 = 1e-300;
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
}

bool is_ascii_space(char c) {
    return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
}

std::vector<std::string_view> split_words(std::string_view text) {
    std::vector<std::string_view> words;
    std::size_t i = 0;
    while (i < text.size()) {
        while (i < text.size() && is_ascii_space(text[i])) ++i;
        std::size_t start = i;
        while (i < text.size() && !is_ascii_space(text[i])) ++i;
        if (i > start) words.push_back(text.substr(start, i - start));
    }
    return words;
}

std::string normalize_whitespace(std::string_view text) {
    std::string out;
    out.reserve(text.size());
    for (std::string_view w : split_words(text)) {
        if (!out.empty()) out.push_back(' ');
        out.append(w);
    }
    return out;
}

std::string_view trim(std::string_view s) {
    std::size_t b = 0, e = s.size();
    while (b < e && is_ascii_space(s[b])) ++b;
    while (e > b && is_ascii_space(s[e - 1])) --e;
    return s.substr(b, e - b);
}

void parallel_for(std::size_t n, unsigned threads,
                  const std::function<void(std::size_t, std::size_t)>& fn) {
    if (threads <= 1 || n < 2) {
        fn(0, n);
        return;
    }
    unsigned t = std::min<std::size_t>(threads, n);
    std::vector<std::thread> pool;
    pool.reserve(t);
    std::size_t chunk = (n + t - 1) / t;
    for (unsigned i = 0; i < t; ++i) {
        std::size_t begin = i * chunk;
        std::size_t end = std::min(n, begin + chunk);
        if (begin >= end) break;
        pool.emplace_back(fn, begin, end);
    }
    for (auto& th : pool) th.join();
}

}  // namespace vsrg
