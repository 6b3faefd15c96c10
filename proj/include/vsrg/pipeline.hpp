#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "vsrg/distiller.hpp"
#include "vsrg/store.hpp"
#include "vsrg/vocab.hpp"

namespace vsrg {

// Flat INI-style config: [section] lines and key = value pairs.
class ConfigFile {
  public:
    static ConfigFile parse_file(const std::string& path);
    static ConfigFile parse_text(std::string_view text);

    bool has(const std::string& section, const std::string& key) const;
    std::string get(const std::string& section, const std::string& key) const;
    std::string get_or(const std::string& section, const std::string& key,
                       const std::string& fallback) const;
    uint64_t get_u64(const std::string& section, const std::string& key) const;
    uint64_t get_u64_or(const std::string& section, const std::string& key,
                        uint64_t fallback) const;
    double get_double_or(const std::string& section, const std::string& key,
                         double fallback) const;

    void set(const std::string& section, const std::string& key, const std::string& value);

  private:
    std::map<std::string, std::map<std::string, std::string>> sections_;
};

struct PipelineConfig {
    // [corpus]
    std::string mono_corpus;
    std::string multi_corpus;
    std::optional<std::string> language_field;
    // [vocab]
    std::size_t target_size = 0;
    std::size_t mono_top_k = 0;
    std::vector<std::size_t> lengths;
    std::size_t top_n_per_length = 0;
    // [teacher]
    std::string teacher_bundle;
    // [clone]
    std::string strategy = "mean";
    // [precompute]
    QuotaPolicy quota;
    uint64_t precompute_seed = 42;
    // [distill]
    TrainConfig train;
    // [eval]
    std::string sts_pairs;
    // [pipeline]
    std::string out_dir;
    unsigned threads = 1;

    static PipelineConfig from_config(const ConfigFile& file);
    void validate() const;  // referenced inputs exist, output dir writable
};

struct ManifestEntry {
    std::string stage;
    std::string path;  // relative to out_dir
    std::string sha256;
    uint64_t bytes = 0;
};

struct PipelineResult {
    std::vector<ManifestEntry> entries;
    std::string manifest_path;
};

// build-vocab -> clone -> precompute -> distill -> eval-sts, halting on the
// first failing stage (its name is prefixed to the error). Produced artifacts
// are listed in <out_dir>/manifest.json with content hashes.
PipelineResult run_pipeline(const PipelineConfig& config);

std::string sha256_file(const std::string& path);

}  // namespace vsrg
