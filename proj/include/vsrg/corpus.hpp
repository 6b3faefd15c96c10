#pragma once

#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "vsrg/common.hpp"

namespace vsrg {

struct CorpusRecord {
    std::string text;      // non-empty after whitespace trim
    std::string language;  // ISO-639-1, lowercase, 2 chars
};

bool valid_language_code(std::string_view lang);

struct FrequencyTable {
    std::map<std::string, uint64_t> entries;  // ordered: deterministic iteration
    uint64_t total_count = 0;

    // Overflow in either the entry or the total is fatal.
    void add(std::string_view token, uint64_t count = 1);
    void merge(const FrequencyTable& other);
};

// Streaming reader for JSONL ({"text":..., "language":...}) or TSV
// (language<TAB>text), auto-detected by extension. Records that violate the
// CorpusRecord invariants are skipped and counted.
class CorpusReader {
  public:
    explicit CorpusReader(const std::string& path,
                          std::optional<std::string> language_field = std::nullopt);

    std::optional<CorpusRecord> next();

    uint64_t skipped() const { return skipped_; }
    uint64_t read() const { return read_; }

  private:
    std::ifstream in_;
    std::string path_;
    bool jsonl_ = false;
    std::string language_field_ = "language";
    uint64_t skipped_ = 0;
    uint64_t read_ = 0;
};

// Reads the whole file into memory; convenience for tests and small corpora.
struct IngestResult {
    std::vector<CorpusRecord> records;
    uint64_t skipped = 0;
};
IngestResult ingest_all(const std::string& path,
                        std::optional<std::string> language_field = std::nullopt);

class Segmenter;  // segmenter.hpp

// Counts every token surface the segmenter emits over the stream.
// `threads` shards the records; the merged table is identical to a
// single-threaded pass.
FrequencyTable count_tokens(const std::vector<CorpusRecord>& records, const Segmenter& segmenter,
                            unsigned threads = 1);

// For each requested code-point length L, keeps the top_n_per_length most
// frequent L-grams (ties broken lexicographically). Grams are drawn from each
// whitespace-delimited word prefixed with the boundary marker, so word-initial
// and word-internal grams are distinct entries.
FrequencyTable count_substrings(const std::vector<CorpusRecord>& records,
                                const std::set<std::size_t>& lengths,
                                std::size_t top_n_per_length);

// Frequency table file: UTF-8 TSV `token<TAB>count`, sorted by
// (count desc, token asc), first line `#total<TAB><total_count>`.
void save_frequency_table(const FrequencyTable& table, const std::string& path);
FrequencyTable load_frequency_table(const std::string& path);

}  // namespace vsrg
