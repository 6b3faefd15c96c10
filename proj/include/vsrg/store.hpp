#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "vsrg/corpus.hpp"
#include "vsrg/segmenter.hpp"

namespace vsrg {

struct TeacherRecord {
    std::string text;
    std::string language;
    std::vector<float> embedding_final;      // unit L2 norm
    std::vector<float> embedding_pre_dense;  // empty when absent
};

struct QuotaPolicy {
    std::map<std::string, uint64_t> caps;  // language -> max rows
    uint64_t default_cap = 0;

    uint64_t cap_for(const std::string& language) const;

    // "tr=100000,en=100000,default=10000"
    static QuotaPolicy parse(std::string_view spec);
};

struct TeacherDataset {
    uint32_t d = 0;
    uint32_t d_pre = 0;  // 0 when pre-dense vectors are absent
    std::vector<TeacherRecord> records;
};

// Per language: seeded shuffle, keep the first `cap` rows; output order is a
// seeded global shuffle. Identical (records, policy, seed) give a
// byte-identical dataset.
TeacherDataset apply_quota(TeacherDataset dataset, const QuotaPolicy& policy, uint64_t seed);

// One teacher inference result; `final` is normalized before storage.
struct EncoderOutput {
    std::vector<float> final;
    std::vector<float> pre_dense;  // optional
};
using EncoderFn = std::function<EncoderOutput(const std::string& text)>;

struct PrecomputeResult {
    TeacherDataset dataset;
    uint64_t skipped = 0;  // non-finite or zero-norm encoder outputs
};
PrecomputeResult precompute(const std::vector<CorpusRecord>& records, const EncoderFn& encoder);

// Columnar binary dataset: magic "VSDS", version, d, d_pre, row count,
// language table; fixed per-row blocks; text heap. Little-endian.
void write_dataset(const std::string& path, const TeacherDataset& dataset);
TeacherDataset read_dataset(const std::string& path);

// Rows whose stored final vector violates the unit-norm tolerance (1e-4).
std::vector<uint64_t> validate_dataset(const TeacherDataset& dataset);

enum class TargetKind { Final, PreDense };
TargetKind parse_target(std::string_view name);

struct Batch {
    std::size_t rows = 0;
    std::size_t cols = 0;                // padded sequence length
    std::vector<TokenId> ids;            // rows x cols, PAD padded
    std::vector<uint8_t> mask;           // rows x cols, 1 = real token
    std::vector<float> targets;          // rows x d, unit norm
    std::size_t target_dim = 0;
};

// Seeded epoch shuffling over the dataset; the final partial batch is
// emitted. Texts are encoded through the supplied segmenter.
class BatchStream {
  public:
    BatchStream(const TeacherDataset& dataset, const Segmenter& segmenter, TargetKind target,
                std::size_t batch_size, uint64_t seed, std::size_t max_len,
                std::size_t epochs = 1);

    // False once all epochs are exhausted.
    bool next(Batch& batch);

    std::size_t steps_per_epoch() const { return steps_per_epoch_; }
    std::size_t total_steps() const { return steps_per_epoch_ * epochs_; }

    // Jump to a global step (for checkpoint resume).
    void seek(std::size_t global_step);

  private:
    void start_epoch(std::size_t epoch);

    const TeacherDataset* dataset_;
    const Segmenter* segmenter_;
    TargetKind target_;
    std::size_t batch_size_;
    uint64_t seed_;
    std::size_t max_len_;
    std::size_t epochs_;
    std::size_t steps_per_epoch_;
    std::size_t epoch_ = 0;
    std::size_t cursor_ = 0;  // record index within the current epoch
    std::vector<uint32_t> order_;
};

}  // namespace vsrg
