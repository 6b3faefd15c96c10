#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "vsrg/corpus.hpp"
#include "vsrg/segmenter.hpp"
#include "vsrg/vocab.hpp"

namespace vsrg {

// Dense row-major V x d matrix of 32-bit reals.
struct EmbeddingMatrix {
    uint64_t rows = 0;
    uint64_t dim = 0;
    std::vector<float> data;

    static EmbeddingMatrix zeros(uint64_t rows, uint64_t dim);

    float* row(uint64_t r) { return data.data() + r * dim; }
    const float* row(uint64_t r) const { return data.data() + r * dim; }
    float& at(uint64_t r, uint64_t c) { return data[r * dim + c]; }
    float at(uint64_t r, uint64_t c) const { return data[r * dim + c]; }
};

enum class ComposeStrategy { Mean, Weighted, First, Last };

ComposeStrategy parse_strategy(std::string_view name);
std::string strategy_name(ComposeStrategy s);

// pi: target token id -> ordered teacher token ids. Empty sequences mark
// fallback entries (no usable teacher encoding).
struct TokenMapping {
    struct Entry {
        std::vector<TokenId> teacher_ids;
        std::vector<double> weights;  // Weighted only; positive, sums to 1
    };
    std::vector<Entry> entries;
    ComposeStrategy strategy = ComposeStrategy::Mean;
    std::size_t fallback_count = 0;
};

struct BundleConfig {
    uint64_t d = 0;
    uint64_t h = 0;
    uint64_t max_len = 0;
    uint64_t vocab_size = 0;
};

// Embedding table, named backbone tensors, bias-free two-projection head.
struct ModelBundle {
    EmbeddingMatrix embedding;
    std::map<std::string, EmbeddingMatrix> backbone_params;  // weight: d x d, bias: 1 x d
    std::map<std::string, EmbeddingMatrix> head_params;      // dense1: h x d, dense2: d x h
    BundleConfig config;
};

// For each target token, the teacher-tokenizer encoding of its surface form
// (boundary marker preserved; marker-stripped retry when the encoding comes
// back empty or UNK-only). Specials and byte tokens map by role.
TokenMapping build_mapping(const Vocabulary& target_vocab, const Segmenter& teacher_segmenter,
                           const Vocabulary& teacher_vocab, ComposeStrategy strategy,
                           const FrequencyTable* teacher_freq = nullptr);

// E'_j from the mapped teacher rows. Mean: uniform average; Weighted: weighted
// sum; First/Last: copy of the first/last mapped row. Fallback entries get the
// column-wise mean of the whole teacher table. Sums run in 64-bit, results are
// stored as 32-bit.
EmbeddingMatrix compose(const EmbeddingMatrix& teacher_embedding, const TokenMapping& mapping,
                        unsigned threads = 1);

// Non-embedding tensors are copied bit-exactly; the embedding table is
// rebuilt via compose(build_mapping(...)).
ModelBundle clone_model(const ModelBundle& teacher, const Vocabulary& teacher_vocab,
                        const Vocabulary& target_vocab, ComposeStrategy strategy,
                        const FrequencyTable* teacher_freq = nullptr, unsigned threads = 1);

// Bundle files embed their vocabulary ("__vocab__" tensor) so a bundle path
// is self-contained for the CLI.
void save_bundle(const std::string& path, const ModelBundle& bundle, const Vocabulary& vocab);

struct LoadedBundle {
    ModelBundle bundle;
    Vocabulary vocab;
};
LoadedBundle load_bundle(const std::string& path);

uint64_t parameter_count(const ModelBundle& bundle);

}  // namespace vsrg
