#include "vsrg/corpus.hpp"

#include <algorithm>
#include <limits>

#include <json.hpp>

#include "vsrg/segmenter.hpp"

namespace vsrg {

bool valid_language_code(std::string_view lang) {
    return lang.size() == 2 && lang[0] >= 'a' && lang[0] <= 'z' && lang[1] >= 'a' &&
           lang[1] <= 'z';
}

void FrequencyTable::add(std::string_view token, uint64_t count) {
    if (token.empty() || count == 0) return;
    uint64_t& slot = entries[std::string(token)];
    if (slot > std::numeric_limits<uint64_t>::max() - count ||
        total_count > std::numeric_limits<uint64_t>::max() - count) {
        throw NumericError("frequency count overflow for token '" + std::string(token) + "'");
    }
    slot += count;
    total_count += count;
}

void FrequencyTable::merge(const FrequencyTable& other) {
    for (const auto& [token, count] : other.entries) add(token, count);
}

namespace {

bool ends_with(std::string_view s, std::string_view suffix) {
    return s.size() >= suffix.size() && s.substr(s.size() - suffix.size()) == suffix;
}

}  // namespace

CorpusReader::CorpusReader(const std::string& path, std::optional<std::string> language_field)
    : in_(path), path_(path) {
    if (!in_) throw IoError("cannot open corpus file: " + path);
    if (ends_with(path, ".jsonl") || ends_with(path, ".json")) {
        jsonl_ = true;
    } else if (ends_with(path, ".tsv")) {
        jsonl_ = false;
    } else {
        throw ValidationError("unknown corpus extension (want .jsonl or .tsv): " + path);
    }
    if (language_field) language_field_ = *language_field;
}

std::optional<CorpusRecord> CorpusReader::next() {
    std::string line;
    while (std::getline(in_, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (trim(line).empty()) continue;
        CorpusRecord rec;
        if (jsonl_) {
            auto parsed = nlohmann::json::parse(line, nullptr, false);
            if (parsed.is_discarded() || !parsed.is_object() || !parsed.contains("text") ||
                !parsed["text"].is_string() || !parsed.contains(language_field_) ||
                !parsed[language_field_].is_string()) {
                ++skipped_;
                continue;
            }
            rec.text = parsed["text"].get<std::string>();
            rec.language = parsed[language_field_].get<std::string>();
        } else {
            std::size_t tab = line.find('\t');
            if (tab == std::string::npos) {
                ++skipped_;
                continue;
            }
            rec.language = line.substr(0, tab);
            rec.text = line.substr(tab + 1);
        }
        if (trim(rec.text).empty() || !valid_language_code(rec.language)) {
            ++skipped_;
            continue;
        }
        ++read_;
        return rec;
    }
    if (in_.bad()) throw IoError("read failure on corpus file: " + path_);
    return std::nullopt;
}

IngestResult ingest_all(const std::string& path, std::optional<std::string> language_field) {
    CorpusReader reader(path, std::move(language_field));
    IngestResult result;
    while (auto rec = reader.next()) result.records.push_back(std::move(*rec));
    result.skipped = reader.skipped();
    return result;
}

FrequencyTable count_tokens(const std::vector<CorpusRecord>& records, const Segmenter& segmenter,
                            unsigned threads) {
    std::size_t shards = 1;
    if (threads > 1 && !records.empty()) {
        shards = std::min<std::size_t>(threads, records.size());
    }
    std::vector<FrequencyTable> partial(shards);
    std::size_t chunk = records.empty() ? 1 : (records.size() + shards - 1) / shards;
    parallel_for(shards, static_cast<unsigned>(shards), [&](std::size_t sb, std::size_t se) {
        for (std::size_t s = sb; s < se; ++s) {
            std::size_t lo = s * chunk;
            std::size_t hi = std::min(records.size(), lo + chunk);
            for (std::size_t i = lo; i < hi; ++i) {
                for (TokenId id : segmenter.segment_ids(records[i].text)) {
                    partial[s].add(segmenter.vocab().tokens[id]);
                }
            }
        }
    });
    FrequencyTable table;
    for (const auto& p : partial) table.merge(p);
    return table;
}

FrequencyTable count_substrings(const std::vector<CorpusRecord>& records,
                                const std::set<std::size_t>& lengths,
                                std::size_t top_n_per_length) {
    if (lengths.empty()) throw ValidationError("count_substrings: lengths must be non-empty");
    for (std::size_t len : lengths) {
        if (len == 0) throw ValidationError("count_substrings: lengths must be >= 1");
    }

    FrequencyTable raw;
    std::string marked;
    for (const CorpusRecord& rec : records) {
        for (std::string_view word : split_words(rec.text)) {
            marked.assign(kBoundaryMarker);
            marked.append(word);
            auto chars = utf8_chars(marked);
            for (std::size_t len : lengths) {
                if (chars.size() < len) continue;
                for (std::size_t i = 0; i + len <= chars.size(); ++i) {
                    const char* begin = chars[i].data();
                    const char* end = chars[i + len - 1].data() + chars[i + len - 1].size();
                    raw.add(std::string_view(begin, static_cast<std::size_t>(end - begin)));
                }
            }
        }
    }

    // keep the top_n per length bucket
    FrequencyTable out;
    if (top_n_per_length == 0) return out;
    for (std::size_t len : lengths) {
        std::vector<std::pair<std::string_view, uint64_t>> bucket;
        for (const auto& [gram, count] : raw.entries) {
            if (utf8_count(gram) == len) bucket.emplace_back(gram, count);
        }
        std::sort(bucket.begin(), bucket.end(), [](const auto& a, const auto& b) {
            if (a.second != b.second) return a.second > b.second;
            return a.first < b.first;
        });
        if (bucket.size() > top_n_per_length) bucket.resize(top_n_per_length);
        for (const auto& [gram, count] : bucket) out.add(gram, count);
    }
    return out;
}

void save_frequency_table(const FrequencyTable& table, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write frequency table: " + path);
    out << "#total\t" << table.total_count << "\n";
    std::vector<std::pair<std::string_view, uint64_t>> rows;
    rows.reserve(table.entries.size());
    for (const auto& [token, count] : table.entries) rows.emplace_back(token, count);
    std::sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) {
        if (a.second != b.second) return a.second > b.second;
        return a.first < b.first;
    });
    for (const auto& [token, count] : rows) out << token << '\t' << count << "\n";
    if (!out) throw IoError("write failure on frequency table: " + path);
}

FrequencyTable load_frequency_table(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open frequency table: " + path);
    FrequencyTable table;
    std::string line;
    bool first = true;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (first && line.rfind("#total\t", 0) == 0) {
            first = false;
            continue;  // recomputed from the entries
        }
        first = false;
        // the token may itself contain a tab; the count is after the last one
        std::size_t tab = line.rfind('\t');
        if (tab == std::string::npos) {
            throw ValidationError("malformed frequency table line: " + line);
        }
        uint64_t count = 0;
        try {
            count = std::stoull(line.substr(tab + 1));
        } catch (const std::exception&) {
            throw ValidationError("malformed count in frequency table line: " + line);
        }
        table.add(line.substr(0, tab), count);
    }
    return table;
}

}  // namespace vsrg
