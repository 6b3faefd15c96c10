#include "vsrg/vocab.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "vsrg/segmenter.hpp"

namespace vsrg {

namespace {

const char* kSpecialSurfaces[kNumSpecials] = {"<pad>", "<unk>", "<bos>", "<eos>"};

std::string byte_surface(unsigned value) {
    char buf[8];
    std::snprintf(buf, sizeof(buf), "<0x%02X>", value);
    return buf;
}

}  // namespace

TokenId Vocabulary::lookup(std::string_view surface) const {
    auto it = id_of.find(std::string(surface));
    if (it == id_of.end()) throw ValidationError("token not in vocabulary: " + std::string(surface));
    return it->second;
}

Vocabulary Vocabulary::with_reserved(const std::vector<std::string>& lexical) {
    Vocabulary v;
    v.tokens.reserve(kNumReserved + lexical.size());
    for (const char* s : kSpecialSurfaces) v.tokens.emplace_back(s);
    for (unsigned b = 0; b < kNumByteTokens; ++b) v.tokens.push_back(byte_surface(b));
    for (const std::string& s : lexical) {
        if (s.empty()) throw ValidationError("empty token surface");
        v.tokens.push_back(s);
    }
    v.id_of.reserve(v.tokens.size());
    for (std::size_t i = 0; i < v.tokens.size(); ++i) {
        auto [it, inserted] = v.id_of.emplace(v.tokens[i], static_cast<TokenId>(i));
        if (!inserted) throw ValidationError("duplicate token surface: " + v.tokens[i]);
    }
    return v;
}

std::vector<std::string> select_top_k(const FrequencyTable& freq, std::size_t k) {
    std::vector<std::pair<std::string_view, uint64_t>> rows;
    rows.reserve(freq.entries.size());
    for (const auto& [token, count] : freq.entries) rows.emplace_back(token, count);
    std::sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) {
        if (a.second != b.second) return a.second > b.second;
        return a.first < b.first;
    });
    if (rows.size() > k) rows.resize(k);
    std::vector<std::string> out;
    out.reserve(rows.size());
    for (const auto& [token, count] : rows) out.emplace_back(token);
    return out;
}

std::vector<std::string> prune_teacher(const Vocabulary& teacher_vocab,
                                       const std::vector<std::string>& retained) {
    ByteTrie trie;
    std::unordered_map<std::string_view, bool> retained_set;
    for (std::size_t i = 0; i < retained.size(); ++i) {
        trie.insert(retained[i], static_cast<int32_t>(i));
        retained_set.emplace(retained[i], true);
    }

    std::vector<std::string> survivors;
    for (TokenId id = teacher_vocab.first_lexical();
         id < static_cast<TokenId>(teacher_vocab.size()); ++id) {
        const std::string& surface = teacher_vocab.tokens[id];
        if (retained_set.count(surface)) continue;  // already in the new vocab
        if (!retained.empty() && trie.covers(surface)) continue;  // resolvable
        survivors.push_back(surface);
    }
    return survivors;
}

std::vector<std::string> fill_multilingual(const BuildPlan& plan,
                                           const std::vector<std::string>& already_chosen) {
    if (plan.lengths.empty()) throw ValidationError("build plan has no length buckets");
    if (!plan.multi_freq) throw ValidationError("build plan has no multilingual table");
    if (already_chosen.size() > plan.target_size) {
        throw ValidationError("already-chosen tokens exceed the target size");
    }
    std::size_t free_slots = plan.target_size - already_chosen.size();
    if (free_slots == 0) return {};

    std::unordered_map<std::string_view, bool> chosen;
    chosen.reserve(already_chosen.size());
    for (const std::string& s : already_chosen) chosen.emplace(s, true);

    // bucket candidates by code-point length, each (count desc, surface asc)
    std::vector<std::vector<std::pair<std::string_view, uint64_t>>> buckets(plan.lengths.size());
    for (const auto& [token, count] : plan.multi_freq->entries) {
        std::size_t len = utf8_count(token);
        for (std::size_t b = 0; b < plan.lengths.size(); ++b) {
            if (plan.lengths[b] == len) {
                buckets[b].emplace_back(token, count);
                break;
            }
        }
    }
    for (auto& bucket : buckets) {
        std::sort(bucket.begin(), bucket.end(), [](const auto& a, const auto& b) {
            if (a.second != b.second) return a.second > b.second;
            return a.first < b.first;
        });
    }

    std::vector<std::string> out;
    out.reserve(free_slots);
    std::vector<std::size_t> cursor(buckets.size(), 0);
    while (out.size() < free_slots) {
        bool any = false;
        for (std::size_t b = 0; b < buckets.size() && out.size() < free_slots; ++b) {
            auto& pos = cursor[b];
            while (pos < buckets[b].size() && chosen.count(buckets[b][pos].first)) ++pos;
            if (pos >= buckets[b].size()) continue;
            std::string_view surface = buckets[b][pos].first;
            out.emplace_back(surface);
            chosen.emplace(surface, true);
            ++pos;
            any = true;
        }
        if (!any) {
            throw ValidationError("vocabulary underfull: " +
                                  std::to_string(free_slots - out.size()) +
                                  " slots could not be filled from the multilingual table");
        }
    }
    return out;
}

Vocabulary build_vocabulary(const BuildPlan& plan) {
    if (!plan.teacher_vocab || !plan.mono_freq || !plan.multi_freq) {
        throw ValidationError("build plan is missing inputs");
    }
    if (plan.target_size < kNumReserved) {
        throw ValidationError("target size " + std::to_string(plan.target_size) +
                              " is smaller than the reserved " + std::to_string(kNumReserved) +
                              " special/byte slots");
    }
    if (plan.monolingual_top_k + kNumReserved > plan.target_size) {
        throw ValidationError("monolingual top-k cannot fit under the target size");
    }

    std::vector<std::string> lexical;
    lexical.reserve(plan.target_size - kNumReserved);
    std::unordered_map<std::string_view, bool> seen;
    for (const char* s : kSpecialSurfaces) seen.emplace(s, true);
    std::vector<std::string> byte_surfaces;
    byte_surfaces.reserve(kNumByteTokens);
    for (unsigned b = 0; b < kNumByteTokens; ++b) {
        char buf[8];
        std::snprintf(buf, sizeof(buf), "<0x%02X>", b);
        byte_surfaces.emplace_back(buf);
        seen.emplace(byte_surfaces.back(), true);
    }

    auto push_unique = [&](const std::string& s) {
        if (seen.count(s)) return false;
        lexical.push_back(s);
        seen.emplace(lexical.back(), true);
        return true;
    };

    // monolingual block
    std::vector<std::string> mono = select_top_k(*plan.mono_freq, plan.monolingual_top_k);
    for (const std::string& s : mono) push_unique(s);

    // teacher survivors; when they overflow the remaining capacity, keep the
    // most frequent by multi_freq (fallback 0), ties by surface, and lay the
    // kept ones out in teacher order
    std::vector<std::string> survivors = prune_teacher(*plan.teacher_vocab, mono);
    std::size_t capacity = plan.target_size - kNumReserved - lexical.size();
    if (survivors.size() > capacity) {
        std::vector<std::size_t> order(survivors.size());
        for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
        auto count_of = [&](std::size_t i) {
            auto it = plan.multi_freq->entries.find(survivors[i]);
            return it == plan.multi_freq->entries.end() ? uint64_t{0} : it->second;
        };
        std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
            uint64_t ca = count_of(a), cb = count_of(b);
            if (ca != cb) return ca > cb;
            return survivors[a] < survivors[b];
        });
        order.resize(capacity);
        std::sort(order.begin(), order.end());  // back to teacher order
        std::vector<std::string> kept;
        kept.reserve(capacity);
        for (std::size_t i : order) kept.push_back(std::move(survivors[i]));
        survivors = std::move(kept);
    }
    for (const std::string& s : survivors) push_unique(s);

    // multilingual fill up to the exact target
    std::vector<std::string> chosen_so_far;
    chosen_so_far.reserve(kNumReserved + lexical.size());
    for (const char* s : kSpecialSurfaces) chosen_so_far.emplace_back(s);
    for (const std::string& s : byte_surfaces) chosen_so_far.push_back(s);
    for (const std::string& s : lexical) chosen_so_far.push_back(s);
    std::vector<std::string> fill = fill_multilingual(plan, chosen_so_far);
    for (const std::string& s : fill) push_unique(s);

    if (kNumReserved + lexical.size() != plan.target_size) {
        throw ValidationError("vocabulary build ended at size " +
                              std::to_string(kNumReserved + lexical.size()) + ", expected " +
                              std::to_string(plan.target_size));
    }
    return Vocabulary::with_reserved(lexical);
}

std::string escape_surface(std::string_view s) {
    std::string out;
    out.reserve(s.size());
    for (char c : s) {
        switch (c) {
            case '\n': out += "\\n"; break;
            case '\t': out += "\\t"; break;
            case '\\': out += "\\\\"; break;
            default: out.push_back(c);
        }
    }
    return out;
}

std::string unescape_surface(std::string_view s) {
    std::string out;
    out.reserve(s.size());
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (s[i] == '\\' && i + 1 < s.size()) {
            char next = s[i + 1];
            if (next == 'n') {
                out.push_back('\n');
                ++i;
                continue;
            }
            if (next == 't') {
                out.push_back('\t');
                ++i;
                continue;
            }
            if (next == '\\') {
                out.push_back('\\');
                ++i;
                continue;
            }
        }
        out.push_back(s[i]);
    }
    return out;
}

std::string serialize_vocabulary(const Vocabulary& vocab) {
    std::ostringstream out;
    out << "#size " << vocab.size() << "\n";
    out << "#specials pad=0 unk=1 bos=2 eos=3\n";
    out << "#bytes base=" << vocab.byte_token_base << "\n";
    for (const std::string& token : vocab.tokens) out << escape_surface(token) << "\n";
    return out.str();
}

Vocabulary parse_vocabulary(std::string_view text) {
    std::vector<std::string> surfaces;
    std::size_t declared_size = 0;
    std::size_t pos = 0;
    bool in_header = true;  // '#' only introduces headers before the first token line
    while (pos <= text.size()) {
        std::size_t nl = text.find('\n', pos);
        std::string_view line =
            nl == std::string_view::npos ? text.substr(pos) : text.substr(pos, nl - pos);
        pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        if (line.empty() && pos > text.size()) break;
        if (in_header && !line.empty() && line[0] == '#') {
            if (line.rfind("#size ", 0) == 0) {
                try {
                    declared_size = std::stoull(std::string(line.substr(6)));
                } catch (const std::exception&) {
                    throw ValidationError("malformed #size header in vocabulary file");
                }
            }
            continue;
        }
        if (line.empty()) continue;
        in_header = false;
        surfaces.push_back(unescape_surface(line));
    }
    if (surfaces.size() < kNumReserved) {
        throw ValidationError("vocabulary file too small: " + std::to_string(surfaces.size()) +
                              " tokens");
    }
    if (declared_size != 0 && declared_size != surfaces.size()) {
        throw ValidationError("vocabulary header size " + std::to_string(declared_size) +
                              " does not match " + std::to_string(surfaces.size()) + " tokens");
    }
    for (std::size_t i = 0; i < kNumSpecials; ++i) {
        if (surfaces[i] != kSpecialSurfaces[i]) {
            throw ValidationError("vocabulary specials out of order at id " + std::to_string(i));
        }
    }
    std::vector<std::string> lexical(surfaces.begin() + kNumReserved, surfaces.end());
    Vocabulary vocab = Vocabulary::with_reserved(lexical);
    for (std::size_t i = kNumSpecials; i < kNumReserved; ++i) {
        if (surfaces[i] != vocab.tokens[i]) {
            throw ValidationError("vocabulary byte block malformed at id " + std::to_string(i));
        }
    }
    return vocab;
}

void save_vocabulary(const Vocabulary& vocab, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write vocabulary: " + path);
    out << serialize_vocabulary(vocab);
    if (!out) throw IoError("write failure on vocabulary: " + path);
}

Vocabulary load_vocabulary(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open vocabulary: " + path);
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    if (in.bad()) throw IoError("read failure on vocabulary: " + path);
    return parse_vocabulary(text);
}

}  // namespace vsrg
