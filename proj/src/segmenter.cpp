#include "vsrg/segmenter.hpp"

#include <algorithm>

namespace vsrg {

void ByteTrie::insert(std::string_view surface, int32_t value) {
    uint64_t node = 0;
    for (unsigned char b : surface) {
        uint64_t key = node << 8 | b;
        auto it = next_.find(key);
        if (it == next_.end()) {
            uint32_t fresh = static_cast<uint32_t>(values_.size());
            values_.push_back(-1);
            next_.emplace(key, fresh);
            node = fresh;
        } else {
            node = it->second;
        }
    }
    values_[node] = value;
}

std::pair<int32_t, std::size_t> ByteTrie::longest(std::string_view s, std::size_t pos) const {
    uint64_t node = 0;
    int32_t best = -1;
    std::size_t best_len = 0;
    for (std::size_t i = pos; i < s.size(); ++i) {
        auto it = next_.find(node << 8 | static_cast<unsigned char>(s[i]));
        if (it == next_.end()) break;
        node = it->second;
        if (values_[node] >= 0) {
            best = values_[node];
            best_len = i - pos + 1;
        }
    }
    return {best, best_len};
}

bool ByteTrie::covers(std::string_view s) const {
    std::size_t pos = 0;
    while (pos < s.size()) {
        auto [value, len] = longest(s, pos);
        if (value < 0) return false;
        pos += len;
    }
    return !s.empty();
}

Segmenter::Segmenter(const Vocabulary& vocab, SegmenterOptions options)
    : vocab_(&vocab), options_(options) {
    if (vocab.size() < kNumReserved) throw ValidationError("segmenter needs a reserved block");
    // Byte and special tokens are emitted structurally, never by surface
    // match, so only lexical tokens enter the trie.
    for (TokenId id = vocab.first_lexical(); id < static_cast<TokenId>(vocab.size()); ++id) {
        trie_.insert(vocab.tokens[id], static_cast<int32_t>(id));
    }
}

void Segmenter::match_into(std::string_view piece, std::vector<TokenId>& out,
                           std::size_t max_len) const {
    std::size_t pos = 0;
    while (pos < piece.size() && out.size() < max_len) {
        auto [value, len] = trie_.longest(piece, pos);
        if (value >= 0) {
            out.push_back(static_cast<TokenId>(value));
            pos += len;
            continue;
        }
        // fallback covers the whole code point
        std::size_t cp_len = utf8_seq_len(piece, pos);
        if (options_.byte_fallback) {
            for (std::size_t i = 0; i < cp_len && out.size() < max_len; ++i) {
                out.push_back(vocab_->byte_token(static_cast<uint8_t>(piece[pos + i])));
            }
        } else {
            out.push_back(vocab_->specials.unk);
        }
        pos += cp_len;
    }
}

TokenIdSequence Segmenter::encode(std::string_view text, std::size_t max_len) const {
    if (max_len < 1) throw ValidationError("encode: max_len must be >= 1");
    TokenIdSequence seq;
    seq.source_len_chars = utf8_count(text);
    if (options_.word_boundaries) {
        std::string marked;
        for (std::string_view word : split_words(text)) {
            if (seq.ids.size() >= max_len) break;
            marked.assign(kBoundaryMarker);
            marked.append(word);
            match_into(marked, seq.ids, max_len);
        }
    } else {
        match_into(text, seq.ids, max_len);
    }
    return seq;
}

std::vector<TokenId> Segmenter::match(std::string_view surface) const {
    std::vector<TokenId> ids;
    match_into(surface, ids, std::numeric_limits<std::size_t>::max());
    return ids;
}

std::vector<TokenId> Segmenter::segment_ids(std::string_view text) const {
    return encode(text).ids;
}

DecodeResult Segmenter::decode(const std::vector<TokenId>& ids) const {
    std::string raw;
    for (TokenId id : ids) {
        if (id >= vocab_->size()) {
            throw ValidationError("decode: token id " + std::to_string(id) +
                                  " outside vocabulary of size " + std::to_string(vocab_->size()));
        }
        if (vocab_->is_byte(id)) {
            raw.push_back(static_cast<char>(vocab_->byte_value(id)));
        } else if (!vocab_->is_special(id)) {
            raw.append(vocab_->tokens[id]);
        }
    }
    // boundary markers become spaces
    std::string spaced;
    spaced.reserve(raw.size());
    for (std::size_t pos = 0; pos < raw.size();) {
        if (raw.compare(pos, kBoundaryMarker.size(), kBoundaryMarker) == 0) {
            spaced.push_back(' ');
            pos += kBoundaryMarker.size();
        } else {
            spaced.push_back(raw[pos]);
            ++pos;
        }
    }
    if (!spaced.empty() && spaced.front() == ' ') spaced.erase(spaced.begin());

    DecodeResult result;
    result.text = utf8_sanitize(spaced, result.had_invalid_utf8);
    return result;
}

FragmentationReport Segmenter::fragmentation(const std::vector<CorpusRecord>& records) const {
    FragmentationReport report;
    for (const CorpusRecord& rec : records) {
        report.total_words += split_words(rec.text).size();
        report.total_tokens += encode(rec.text).ids.size();
    }
    if (report.total_words == 0) throw ValidationError("fragmentation: no words in the stream");
    report.tokens_per_word =
        static_cast<double>(report.total_tokens) / static_cast<double>(report.total_words);
    return report;
}

}  // namespace vsrg
