#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "vsrg/cloner.hpp"
#include "vsrg/store.hpp"

namespace vsrg {

// Student encoder: embedding lookup -> residual affine backbone -> masked
// mean pooling -> two bias-free projections -> L2 normalization.
//
// Parameters are stored as Scalar (float for training, double for gradient
// checks); every reduction accumulates in 64-bit regardless.
template <typename Scalar>
struct Net {
    std::size_t vocab_size = 0;
    std::size_t d = 0;
    std::size_t h = 0;
    std::vector<Scalar> embedding;        // V x d
    std::vector<Scalar> backbone_weight;  // d x d
    std::vector<Scalar> backbone_bias;    // d
    std::vector<Scalar> dense1;           // h x d
    std::vector<Scalar> dense2;           // d x h

    static Net from_bundle(const ModelBundle& bundle);
    ModelBundle to_bundle(const BundleConfig& config) const;
};

// Gradients accumulate in doubles for every instantiation.
struct Gradients {
    std::vector<double> embedding;
    std::vector<double> backbone_weight;
    std::vector<double> backbone_bias;
    std::vector<double> dense1;
    std::vector<double> dense2;

    void resize_like_net(std::size_t vocab, std::size_t d, std::size_t h);
    void zero();
    double global_norm(bool embedding_on, bool backbone_on, bool head_on) const;
    void scale(double factor);
};

template <typename Scalar>
struct ForwardCache {
    std::size_t rows = 0, cols = 0, d = 0, h = 0;
    std::vector<TokenId> ids;
    std::vector<uint8_t> mask;
    std::vector<double> inv_count;   // 1/n per row
    std::vector<double> mean_embed;  // rows x d, 64-bit pooled means
    std::vector<Scalar> pooled;      // rows x d   (p)
    std::vector<Scalar> hidden;     // rows x h   (q = W1 p)      [Final only]
    std::vector<Scalar> projected;  // rows x d   (z = W2 q)      [Final only]
    std::vector<double> norm;       // ||z|| (or ||p|| for PreDense)
    std::vector<Scalar> unit;       // rows x d   (s-hat)
    TargetKind target = TargetKind::Final;
};

// Unit-norm student vectors for the batch. Throws on an all-masked row or a
// degenerate (norm < 1e-12) embedding.
template <typename Scalar>
void net_forward(const Net<Scalar>& net, const std::vector<TokenId>& ids,
                 const std::vector<uint8_t>& mask, std::size_t rows, std::size_t cols,
                 TargetKind target, ForwardCache<Scalar>& cache);

// L = (1/N) sum_i (1 - s_i . t_i); gradient wrt each unit student vector is
// -t_i / N. Both sides must be unit within 1e-4.
struct CosineLoss {
    double loss = 0.0;
    std::vector<double> grad_unit;  // rows x d
};
template <typename Scalar>
CosineLoss cosine_loss(const std::vector<Scalar>& student_unit, const std::vector<float>& targets,
                       std::size_t rows, std::size_t d);

// Analytic chain through normalization, projections, pooling and lookup.
// Untouched embedding rows keep zero gradient; duplicate tokens accumulate.
template <typename Scalar>
void net_backward(const Net<Scalar>& net, const ForwardCache<Scalar>& cache,
                  const std::vector<double>& grad_unit, Gradients& grads);

enum class LossKind { Cosine };

struct TrainConfig {
    std::size_t epochs = 1;
    std::size_t batch_size = 256;
    double lr_peak = 5e-5;
    double warmup_ratio = 0.01;
    double weight_decay = 0.01;
    double max_grad_norm = 1.0;
    std::size_t checkpoint_every = 100;
    uint64_t seed = 42;
    TargetKind target = TargetKind::Final;
    LossKind loss = LossKind::Cosine;
    std::size_t max_len = 0;  // 0: use the bundle's configured max_len
    bool train_embedding = true;
    bool train_backbone = false;
    bool train_head = true;

    void validate() const;
};

// Linear warmup to lr_peak, then cosine decay to zero.
// warmup_steps = max(1, round(warmup_ratio * total_steps)).
double lr_at(std::size_t step, std::size_t total_steps, const TrainConfig& config);

struct MetricRow {
    std::size_t step = 0;
    double lr = 0.0;
    double loss = 0.0;
};

struct TrainResult {
    ModelBundle model;
    std::vector<MetricRow> log;
    std::string final_checkpoint;
};

// One deterministic training run: forward, cosine loss, backward, global-norm
// clip, moment update with decoupled weight decay, periodic checkpoints plus
// a final one. `out_dir` empty keeps everything in memory.
TrainResult train(const ModelBundle& start, const Vocabulary& vocab,
                  const TeacherDataset& dataset, const TrainConfig& config,
                  const std::string& out_dir = "", const std::string& resume_checkpoint = "");

extern template struct Net<float>;
extern template struct Net<double>;
extern template void net_forward<float>(const Net<float>&, const std::vector<TokenId>&,
                                        const std::vector<uint8_t>&, std::size_t, std::size_t,
                                        TargetKind, ForwardCache<float>&);
extern template void net_forward<double>(const Net<double>&, const std::vector<TokenId>&,
                                         const std::vector<uint8_t>&, std::size_t, std::size_t,
                                         TargetKind, ForwardCache<double>&);
extern template CosineLoss cosine_loss<float>(const std::vector<float>&, const std::vector<float>&,
                                              std::size_t, std::size_t);
extern template CosineLoss cosine_loss<double>(const std::vector<double>&,
                                               const std::vector<float>&, std::size_t,
                                               std::size_t);
extern template void net_backward<float>(const Net<float>&, const ForwardCache<float>&,
                                         const std::vector<double>&, Gradients&);
extern template void net_backward<double>(const Net<double>&, const ForwardCache<double>&,
                                          const std::vector<double>&, Gradients&);

}  // namespace vsrg
