#include "vsrg/cloner.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>

#include "vsrg/tensor_io.hpp"

namespace vsrg {

EmbeddingMatrix EmbeddingMatrix::zeros(uint64_t rows, uint64_t dim) {
    EmbeddingMatrix m;
    m.rows = rows;
    m.dim = dim;
    m.data.assign(rows * dim, 0.0f);
    return m;
}

ComposeStrategy parse_strategy(std::string_view name) {
    if (name == "mean") return ComposeStrategy::Mean;
    if (name == "weighted") return ComposeStrategy::Weighted;
    if (name == "first") return ComposeStrategy::First;
    if (name == "last") return ComposeStrategy::Last;
    throw ValidationError("unknown composition strategy: " + std::string(name));
}

std::string strategy_name(ComposeStrategy s) {
    switch (s) {
        case ComposeStrategy::Mean: return "mean";
        case ComposeStrategy::Weighted: return "weighted";
        case ComposeStrategy::First: return "first";
        case ComposeStrategy::Last: return "last";
    }
    return "?";
}

TokenMapping build_mapping(const Vocabulary& target_vocab, const Segmenter& teacher_segmenter,
                           const Vocabulary& teacher_vocab, ComposeStrategy strategy,
                           const FrequencyTable* teacher_freq) {
    TokenMapping mapping;
    mapping.strategy = strategy;
    mapping.entries.resize(target_vocab.size());

    auto strip_unk = [&](std::vector<TokenId> ids) {
        std::vector<TokenId> out;
        out.reserve(ids.size());
        for (TokenId id : ids) {
            if (id != teacher_vocab.specials.unk) out.push_back(id);
        }
        return out;
    };

    for (TokenId j = 0; j < static_cast<TokenId>(target_vocab.size()); ++j) {
        TokenMapping::Entry& entry = mapping.entries[j];
        // specials and byte tokens map by role, never through surfaces
        if (target_vocab.is_special(j)) {
            TokenId role[] = {teacher_vocab.specials.pad, teacher_vocab.specials.unk,
                              teacher_vocab.specials.bos, teacher_vocab.specials.eos};
            entry.teacher_ids = {role[j]};
            continue;
        }
        if (target_vocab.is_byte(j)) {
            entry.teacher_ids = {teacher_vocab.byte_token(target_vocab.byte_value(j))};
            continue;
        }

        const std::string& surface = target_vocab.tokens[j];
        std::vector<TokenId> ids = strip_unk(teacher_segmenter.match(surface));
        if (ids.empty() && surface.size() > kBoundaryMarker.size() &&
            surface.compare(0, kBoundaryMarker.size(), kBoundaryMarker) == 0) {
            ids = strip_unk(teacher_segmenter.match(surface.substr(kBoundaryMarker.size())));
        }
        if (ids.empty()) {
            ++mapping.fallback_count;
            continue;
        }
        entry.teacher_ids = std::move(ids);

        if (strategy == ComposeStrategy::Weighted) {
            const auto& tids = entry.teacher_ids;
            std::vector<double> freq(tids.size(), 0.0);
            bool all_positive = teacher_freq != nullptr;
            double total = 0.0;
            for (std::size_t m = 0; m < tids.size() && all_positive; ++m) {
                auto it = teacher_freq->entries.find(teacher_vocab.tokens[tids[m]]);
                if (it == teacher_freq->entries.end() || it->second == 0) {
                    all_positive = false;
                } else {
                    freq[m] = static_cast<double>(it->second);
                    total += freq[m];
                }
            }
            entry.weights.resize(tids.size());
            if (all_positive && total > 0.0) {
                for (std::size_t m = 0; m < tids.size(); ++m) entry.weights[m] = freq[m] / total;
            } else {
                // no usable frequencies: degenerate to uniform
                double w = 1.0 / static_cast<double>(tids.size());
                for (double& x : entry.weights) x = w;
            }
        }
    }
    return mapping;
}

EmbeddingMatrix compose(const EmbeddingMatrix& teacher_embedding, const TokenMapping& mapping,
                        unsigned threads) {
    const uint64_t dim = teacher_embedding.dim;
    EmbeddingMatrix out = EmbeddingMatrix::zeros(mapping.entries.size(), dim);

    // fallback row: column-wise mean of the whole teacher table
    std::vector<double> fallback(dim, 0.0);
    bool need_fallback = false;
    for (const auto& e : mapping.entries) {
        if (e.teacher_ids.empty()) {
            need_fallback = true;
            break;
        }
    }
    if (need_fallback) {
        for (uint64_t r = 0; r < teacher_embedding.rows; ++r) {
            const float* row = teacher_embedding.row(r);
            for (uint64_t c = 0; c < dim; ++c) fallback[c] += row[c];
        }
        for (uint64_t c = 0; c < dim; ++c) {
            fallback[c] /= static_cast<double>(teacher_embedding.rows);
        }
    }

    // range errors are raised before fanning out; workers must not throw
    for (const auto& entry : mapping.entries) {
        for (TokenId id : entry.teacher_ids) {
            if (id >= teacher_embedding.rows) {
                throw ValidationError("mapping references teacher row " + std::to_string(id) +
                                      " outside table of " +
                                      std::to_string(teacher_embedding.rows));
            }
        }
    }

    std::vector<uint64_t> bad_rows;
    std::mutex bad_mutex;
    parallel_for(mapping.entries.size(), threads, [&](std::size_t begin, std::size_t end) {
        std::vector<double> acc(dim);
        for (std::size_t j = begin; j < end; ++j) {
            const TokenMapping::Entry& entry = mapping.entries[j];
            float* dst = out.row(j);
            if (entry.teacher_ids.empty()) {
                for (uint64_t c = 0; c < dim; ++c) dst[c] = static_cast<float>(fallback[c]);
                continue;
            }
            switch (mapping.strategy) {
                case ComposeStrategy::First: {
                    const float* src = teacher_embedding.row(entry.teacher_ids.front());
                    for (uint64_t c = 0; c < dim; ++c) dst[c] = src[c];
                    break;
                }
                case ComposeStrategy::Last: {
                    const float* src = teacher_embedding.row(entry.teacher_ids.back());
                    for (uint64_t c = 0; c < dim; ++c) dst[c] = src[c];
                    break;
                }
                case ComposeStrategy::Mean: {
                    std::fill(acc.begin(), acc.end(), 0.0);
                    for (TokenId id : entry.teacher_ids) {
                        const float* src = teacher_embedding.row(id);
                        for (uint64_t c = 0; c < dim; ++c) acc[c] += src[c];
                    }
                    double inv = 1.0 / static_cast<double>(entry.teacher_ids.size());
                    for (uint64_t c = 0; c < dim; ++c) dst[c] = static_cast<float>(acc[c] * inv);
                    break;
                }
                case ComposeStrategy::Weighted: {
                    std::fill(acc.begin(), acc.end(), 0.0);
                    for (std::size_t m = 0; m < entry.teacher_ids.size(); ++m) {
                        double w = entry.weights.empty()
                                       ? 1.0 / static_cast<double>(entry.teacher_ids.size())
                                       : entry.weights[m];
                        const float* src = teacher_embedding.row(entry.teacher_ids[m]);
                        for (uint64_t c = 0; c < dim; ++c) acc[c] += w * src[c];
                    }
                    for (uint64_t c = 0; c < dim; ++c) dst[c] = static_cast<float>(acc[c]);
                    break;
                }
            }
            for (uint64_t c = 0; c < dim; ++c) {
                if (!std::isfinite(dst[c])) {
                    std::lock_guard<std::mutex> lock(bad_mutex);
                    bad_rows.push_back(j);
                    break;
                }
            }
        }
    });
    if (!bad_rows.empty()) {
        throw NumericError("non-finite composed embedding at row " +
                           std::to_string(*std::min_element(bad_rows.begin(), bad_rows.end())));
    }
    return out;
}

ModelBundle clone_model(const ModelBundle& teacher, const Vocabulary& teacher_vocab,
                        const Vocabulary& target_vocab, ComposeStrategy strategy,
                        const FrequencyTable* teacher_freq, unsigned threads) {
    if (teacher.embedding.rows != teacher_vocab.size()) {
        throw ValidationError("teacher embedding rows " + std::to_string(teacher.embedding.rows) +
                              " do not match teacher vocabulary size " +
                              std::to_string(teacher_vocab.size()));
    }
    Segmenter teacher_segmenter(teacher_vocab, SegmenterOptions{.word_boundaries = false});
    TokenMapping mapping =
        build_mapping(target_vocab, teacher_segmenter, teacher_vocab, strategy, teacher_freq);

    ModelBundle student;
    student.embedding = compose(teacher.embedding, mapping, threads);
    student.backbone_params = teacher.backbone_params;  // bit-exact copies
    student.head_params = teacher.head_params;
    student.config = teacher.config;
    student.config.vocab_size = target_vocab.size();
    return student;
}

namespace {

TensorRecord matrix_tensor(const std::string& name, const EmbeddingMatrix& m) {
    return TensorRecord::f32(name, {m.rows, m.dim}, m.data);
}

EmbeddingMatrix tensor_matrix(const TensorRecord& t) {
    if (t.dims.size() != 2) throw ValidationError("tensor " + t.name + " is not 2-D");
    EmbeddingMatrix m;
    m.rows = t.dims[0];
    m.dim = t.dims[1];
    m.data = t.as_f32();
    return m;
}

constexpr std::string_view kBackbonePrefix = "backbone.";
constexpr std::string_view kHeadPrefix = "head.";

}  // namespace

void save_bundle(const std::string& path, const ModelBundle& bundle, const Vocabulary& vocab) {
    if (bundle.embedding.rows != vocab.size()) {
        throw ValidationError("bundle embedding rows do not match its vocabulary");
    }
    std::vector<TensorRecord> tensors;
    tensors.push_back(matrix_tensor("embedding", bundle.embedding));
    for (const auto& [name, m] : bundle.backbone_params) {
        tensors.push_back(matrix_tensor(std::string(kBackbonePrefix) + name, m));
    }
    for (const auto& [name, m] : bundle.head_params) {
        tensors.push_back(matrix_tensor(std::string(kHeadPrefix) + name, m));
    }
    tensors.push_back(TensorRecord::u64(
        "__config__", {4},
        {bundle.config.d, bundle.config.h, bundle.config.max_len, bundle.config.vocab_size}));
    std::string vocab_text = serialize_vocabulary(vocab);
    tensors.push_back(TensorRecord::u8(
        "__vocab__", std::vector<uint8_t>(vocab_text.begin(), vocab_text.end())));
    write_tensor_file(path, tensors);
}

LoadedBundle load_bundle(const std::string& path) {
    std::vector<TensorRecord> tensors = read_tensor_file(path);
    LoadedBundle loaded;
    loaded.bundle.embedding = tensor_matrix(require_tensor(tensors, "embedding"));
    for (const TensorRecord& t : tensors) {
        if (t.name.rfind(kBackbonePrefix, 0) == 0) {
            loaded.bundle.backbone_params[t.name.substr(kBackbonePrefix.size())] =
                tensor_matrix(t);
        } else if (t.name.rfind(kHeadPrefix, 0) == 0) {
            loaded.bundle.head_params[t.name.substr(kHeadPrefix.size())] = tensor_matrix(t);
        }
    }
    std::vector<uint64_t> cfg = require_tensor(tensors, "__config__").as_u64();
    if (cfg.size() != 4) throw ValidationError("bundle __config__ must have 4 entries");
    loaded.bundle.config = {cfg[0], cfg[1], cfg[2], cfg[3]};

    const TensorRecord& vocab_tensor = require_tensor(tensors, "__vocab__");
    loaded.vocab = parse_vocabulary(std::string_view(
        reinterpret_cast<const char*>(vocab_tensor.bytes.data()), vocab_tensor.bytes.size()));

    // shape sanity against the config
    const auto& cfgv = loaded.bundle.config;
    if (loaded.bundle.embedding.rows != cfgv.vocab_size ||
        loaded.bundle.embedding.dim != cfgv.d || loaded.vocab.size() != cfgv.vocab_size) {
        throw ValidationError("bundle shapes disagree with its config");
    }
    auto expect_shape = [&](const std::map<std::string, EmbeddingMatrix>& group,
                            const std::string& name, uint64_t rows, uint64_t cols) {
        auto it = group.find(name);
        if (it == group.end()) throw ValidationError("bundle is missing tensor " + name);
        if (it->second.rows != rows || it->second.dim != cols) {
            throw ValidationError("bundle tensor " + name + " has shape " +
                                  std::to_string(it->second.rows) + "x" +
                                  std::to_string(it->second.dim) + ", expected " +
                                  std::to_string(rows) + "x" + std::to_string(cols));
        }
    };
    expect_shape(loaded.bundle.backbone_params, "weight", cfgv.d, cfgv.d);
    expect_shape(loaded.bundle.backbone_params, "bias", 1, cfgv.d);
    expect_shape(loaded.bundle.head_params, "dense1", cfgv.h, cfgv.d);
    expect_shape(loaded.bundle.head_params, "dense2", cfgv.d, cfgv.h);
    return loaded;
}

uint64_t parameter_count(const ModelBundle& bundle) {
    uint64_t n = bundle.embedding.rows * bundle.embedding.dim;
    for (const auto& [name, m] : bundle.backbone_params) n += m.rows * m.dim;
    for (const auto& [name, m] : bundle.head_params) n += m.rows * m.dim;
    return n;
}

}  // namespace vsrg
