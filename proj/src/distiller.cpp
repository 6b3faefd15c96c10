#include "vsrg/distiller.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "vsrg/tensor_io.hpp"

namespace vsrg {

template <typename Scalar>
Net<Scalar> Net<Scalar>::from_bundle(const ModelBundle& bundle) {
    Net<Scalar> net;
    net.vocab_size = bundle.embedding.rows;
    net.d = bundle.config.d;
    net.h = bundle.config.h;
    auto widen = [](const EmbeddingMatrix& m) {
        std::vector<Scalar> out(m.data.size());
        for (std::size_t i = 0; i < m.data.size(); ++i) out[i] = static_cast<Scalar>(m.data[i]);
        return out;
    };
    net.embedding = widen(bundle.embedding);
    net.backbone_weight = widen(bundle.backbone_params.at("weight"));
    net.backbone_bias = widen(bundle.backbone_params.at("bias"));
    net.dense1 = widen(bundle.head_params.at("dense1"));
    net.dense2 = widen(bundle.head_params.at("dense2"));
    return net;
}

template <typename Scalar>
ModelBundle Net<Scalar>::to_bundle(const BundleConfig& config) const {
    auto narrow = [](const std::vector<Scalar>& v, uint64_t rows, uint64_t cols) {
        EmbeddingMatrix m = EmbeddingMatrix::zeros(rows, cols);
        for (std::size_t i = 0; i < v.size(); ++i) m.data[i] = static_cast<float>(v[i]);
        return m;
    };
    ModelBundle bundle;
    bundle.embedding = narrow(embedding, vocab_size, d);
    bundle.backbone_params["weight"] = narrow(backbone_weight, d, d);
    bundle.backbone_params["bias"] = narrow(backbone_bias, 1, d);
    bundle.head_params["dense1"] = narrow(dense1, h, d);
    bundle.head_params["dense2"] = narrow(dense2, d, h);
    bundle.config = config;
    bundle.config.d = d;
    bundle.config.h = h;
    bundle.config.vocab_size = vocab_size;
    return bundle;
}

void Gradients::resize_like_net(std::size_t vocab, std::size_t d, std::size_t h) {
    embedding.assign(vocab * d, 0.0);
    backbone_weight.assign(d * d, 0.0);
    backbone_bias.assign(d, 0.0);
    dense1.assign(h * d, 0.0);
    dense2.assign(d * h, 0.0);
}

void Gradients::zero() {
    std::fill(embedding.begin(), embedding.end(), 0.0);
    std::fill(backbone_weight.begin(), backbone_weight.end(), 0.0);
    std::fill(backbone_bias.begin(), backbone_bias.end(), 0.0);
    std::fill(dense1.begin(), dense1.end(), 0.0);
    std::fill(dense2.begin(), dense2.end(), 0.0);
}

double Gradients::global_norm(bool embedding_on, bool backbone_on, bool head_on) const {
    double s = 0.0;
    auto add = [&s](const std::vector<double>& g) {
        for (double x : g) s += x * x;
    };
    if (embedding_on) add(embedding);
    if (backbone_on) {
        add(backbone_weight);
        add(backbone_bias);
    }
    if (head_on) {
        add(dense1);
        add(dense2);
    }
    return std::sqrt(s);
}

void Gradients::scale(double factor) {
    auto mul = [factor](std::vector<double>& g) {
        for (double& x : g) x *= factor;
    };
    mul(embedding);
    mul(backbone_weight);
    mul(backbone_bias);
    mul(dense1);
    mul(dense2);
}

template <typename Scalar>
void net_forward(const Net<Scalar>& net, const std::vector<TokenId>& ids,
                 const std::vector<uint8_t>& mask, std::size_t rows, std::size_t cols,
                 TargetKind target, ForwardCache<Scalar>& cache) {
    const std::size_t d = net.d, h = net.h;
    cache.rows = rows;
    cache.cols = cols;
    cache.d = d;
    cache.h = h;
    cache.ids = ids;
    cache.mask = mask;
    cache.target = target;
    cache.inv_count.assign(rows, 0.0);
    cache.mean_embed.assign(rows * d, 0.0);
    cache.pooled.assign(rows * d, Scalar(0));
    cache.norm.assign(rows, 0.0);
    cache.unit.assign(rows * d, Scalar(0));
    if (target == TargetKind::Final) {
        cache.hidden.assign(rows * h, Scalar(0));
        cache.projected.assign(rows * d, Scalar(0));
    } else {
        cache.hidden.clear();
        cache.projected.clear();
    }

    for (std::size_t r = 0; r < rows; ++r) {
        std::size_t count = 0;
        double* mean_e = cache.mean_embed.data() + r * d;
        for (std::size_t c = 0; c < cols; ++c) {
            if (!mask[r * cols + c]) continue;
            TokenId id = ids[r * cols + c];
            if (id >= net.vocab_size) {
                throw ValidationError("token id " + std::to_string(id) +
                                      " outside the student vocabulary");
            }
            const Scalar* e = net.embedding.data() + static_cast<std::size_t>(id) * d;
            for (std::size_t k = 0; k < d; ++k) mean_e[k] += static_cast<double>(e[k]);
            ++count;
        }
        if (count == 0) {
            throw ValidationError("all-masked row " + std::to_string(r) + " in forward batch");
        }
        double inv = 1.0 / static_cast<double>(count);
        cache.inv_count[r] = inv;
        for (std::size_t k = 0; k < d; ++k) mean_e[k] *= inv;

        // residual affine backbone applied to the pooled mean (pooling is
        // uniform, the backbone affine, so this equals pooling u_j)
        Scalar* p = cache.pooled.data() + r * d;
        for (std::size_t a = 0; a < d; ++a) {
            double acc = mean_e[a] + static_cast<double>(net.backbone_bias[a]);
            const Scalar* w = net.backbone_weight.data() + a * d;
            for (std::size_t k = 0; k < d; ++k) acc += static_cast<double>(w[k]) * mean_e[k];
            p[a] = static_cast<Scalar>(acc);
        }

        const Scalar* pre_norm = p;
        if (target == TargetKind::Final) {
            Scalar* q = cache.hidden.data() + r * h;
            for (std::size_t a = 0; a < h; ++a) {
                double acc = 0.0;
                const Scalar* w = net.dense1.data() + a * d;
                for (std::size_t k = 0; k < d; ++k) {
                    acc += static_cast<double>(w[k]) * static_cast<double>(p[k]);
                }
                q[a] = static_cast<Scalar>(acc);
            }
            Scalar* z = cache.projected.data() + r * d;
            for (std::size_t a = 0; a < d; ++a) {
                double acc = 0.0;
                const Scalar* w = net.dense2.data() + a * h;
                for (std::size_t k = 0; k < h; ++k) {
                    acc += static_cast<double>(w[k]) * static_cast<double>(q[k]);
                }
                z[a] = static_cast<Scalar>(acc);
            }
            pre_norm = z;
        }

        double norm_sq = 0.0;
        for (std::size_t k = 0; k < d; ++k) {
            norm_sq += static_cast<double>(pre_norm[k]) * static_cast<double>(pre_norm[k]);
        }
        double norm = std::sqrt(norm_sq);
        if (!(norm >= 1e-12)) {
            throw NumericError("degenerate embedding (norm " + std::to_string(norm) +
                               ") at batch row " + std::to_string(r));
        }
        cache.norm[r] = norm;
        Scalar* s = cache.unit.data() + r * d;
        for (std::size_t k = 0; k < d; ++k) {
            s[k] = static_cast<Scalar>(static_cast<double>(pre_norm[k]) / norm);
        }
    }
}

template <typename Scalar>
CosineLoss cosine_loss(const std::vector<Scalar>& student_unit, const std::vector<float>& targets,
                       std::size_t rows, std::size_t d) {
    if (student_unit.size() != rows * d || targets.size() != rows * d) {
        throw ValidationError("cosine loss shape mismatch");
    }
    CosineLoss result;
    result.grad_unit.assign(rows * d, 0.0);
    double inv_n = 1.0 / static_cast<double>(rows);
    for (std::size_t r = 0; r < rows; ++r) {
        double s_sq = 0.0, t_sq = 0.0, dot = 0.0;
        for (std::size_t k = 0; k < d; ++k) {
            double s = static_cast<double>(student_unit[r * d + k]);
            double t = static_cast<double>(targets[r * d + k]);
            s_sq += s * s;
            t_sq += t * t;
            dot += s * t;
        }
        if (std::abs(std::sqrt(t_sq) - 1.0) > 1e-4) {
            throw NumericError("non-unit target vector at batch row " + std::to_string(r));
        }
        if (std::abs(std::sqrt(s_sq) - 1.0) > 1e-4) {
            throw NumericError("non-unit student vector at batch row " + std::to_string(r));
        }
        // rounding can push the dot of two near-unit vectors past +-1; the
        // cosine itself cannot leave that range
        dot = std::min(1.0, std::max(-1.0, dot));
        result.loss += (1.0 - dot) * inv_n;
        for (std::size_t k = 0; k < d; ++k) {
            result.grad_unit[r * d + k] = -static_cast<double>(targets[r * d + k]) * inv_n;
        }
    }
    return result;
}

template <typename Scalar>
void net_backward(const Net<Scalar>& net, const ForwardCache<Scalar>& cache,
                  const std::vector<double>& grad_unit, Gradients& grads) {
    const std::size_t d = cache.d, h = cache.h, cols = cache.cols;
    if (grads.embedding.size() != net.vocab_size * d) {
        grads.resize_like_net(net.vocab_size, d, h);
    }

    std::vector<double> gz(d), gq(h), gp(d), g_mean(d);
    for (std::size_t r = 0; r < cache.rows; ++r) {
        const double* g = grad_unit.data() + r * d;
        const Scalar* s = cache.unit.data() + r * d;
        double norm = cache.norm[r];

        // through s = x / ||x||
        double dot_gs = 0.0;
        for (std::size_t k = 0; k < d; ++k) dot_gs += g[k] * static_cast<double>(s[k]);
        std::vector<double>& gx = cache.target == TargetKind::Final ? gz : gp;
        for (std::size_t k = 0; k < d; ++k) {
            gx[k] = (g[k] - dot_gs * static_cast<double>(s[k])) / norm;
        }

        if (cache.target == TargetKind::Final) {
            const Scalar* q = cache.hidden.data() + r * h;
            const Scalar* p = cache.pooled.data() + r * d;
            // z = W2 q
            for (std::size_t a = 0; a < d; ++a) {
                double* row = grads.dense2.data() + a * h;
                for (std::size_t k = 0; k < h; ++k) row[k] += gz[a] * static_cast<double>(q[k]);
            }
            for (std::size_t k = 0; k < h; ++k) {
                double acc = 0.0;
                for (std::size_t a = 0; a < d; ++a) {
                    acc += static_cast<double>(net.dense2[a * h + k]) * gz[a];
                }
                gq[k] = acc;
            }
            // q = W1 p
            for (std::size_t a = 0; a < h; ++a) {
                double* row = grads.dense1.data() + a * d;
                for (std::size_t k = 0; k < d; ++k) row[k] += gq[a] * static_cast<double>(p[k]);
            }
            for (std::size_t k = 0; k < d; ++k) {
                double acc = 0.0;
                for (std::size_t a = 0; a < h; ++a) {
                    acc += static_cast<double>(net.dense1[a * d + k]) * gq[a];
                }
                gp[k] = acc;
            }
        }

        // p = mean_e + Wb mean_e + bb
        const double* mean_e = cache.mean_embed.data() + r * d;
        for (std::size_t a = 0; a < d; ++a) {
            grads.backbone_bias[a] += gp[a];
            double* row = grads.backbone_weight.data() + a * d;
            for (std::size_t k = 0; k < d; ++k) row[k] += gp[a] * mean_e[k];
        }
        for (std::size_t k = 0; k < d; ++k) {
            double acc = gp[k];
            for (std::size_t a = 0; a < d; ++a) {
                acc += static_cast<double>(net.backbone_weight[a * d + k]) * gp[a];
            }
            g_mean[k] = acc;
        }

        // mean_e = (1/n) sum e_j; duplicate ids accumulate per position
        double inv = cache.inv_count[r];
        for (std::size_t c = 0; c < cols; ++c) {
            if (!cache.mask[r * cols + c]) continue;
            TokenId id = cache.ids[r * cols + c];
            double* row = grads.embedding.data() + static_cast<std::size_t>(id) * d;
            for (std::size_t k = 0; k < d; ++k) row[k] += inv * g_mean[k];
        }
    }
}

void TrainConfig::validate() const {
    if (!(warmup_ratio >= 0.0 && warmup_ratio < 1.0)) {
        throw ValidationError("warmup_ratio must be in [0, 1)");
    }
    if (!(lr_peak > 0.0)) throw ValidationError("lr_peak must be positive");
    if (batch_size < 1) throw ValidationError("batch_size must be >= 1");
    if (epochs < 1) throw ValidationError("epochs must be >= 1");
    if (!(max_grad_norm > 0.0)) throw ValidationError("max_grad_norm must be positive");
}

double lr_at(std::size_t step, std::size_t total_steps, const TrainConfig& config) {
    if (total_steps == 0) return 0.0;
    std::size_t warmup = std::max<std::size_t>(
        1, static_cast<std::size_t>(std::llround(config.warmup_ratio *
                                                 static_cast<double>(total_steps))));
    if (step < warmup) {
        return config.lr_peak * static_cast<double>(step + 1) / static_cast<double>(warmup);
    }
    if (step >= total_steps) return 0.0;
    double progress =
        static_cast<double>(step - warmup) / static_cast<double>(total_steps - warmup);
    if (progress >= 1.0) return 0.0;
    return config.lr_peak * 0.5 * (1.0 + std::cos(M_PI * progress));
}

namespace {

struct AdamSlot {
    std::vector<float>* weights;
    std::vector<double>* grad;
    std::vector<float> m;
    std::vector<float> v;
    bool trainable;
    const char* name;
};

constexpr double kBeta1 = 0.9;
constexpr double kBeta2 = 0.999;
constexpr double kEps = 1e-8;

// Moment update with decoupled weight decay. Every intermediate is computed
// in 64-bit from the stored 32-bit state so a checkpoint restore replays the
// exact same arithmetic.
void adam_step(AdamSlot& slot, double lr, double weight_decay, std::size_t t) {
    if (!slot.trainable) return;
    double bc1 = 1.0 - std::pow(kBeta1, static_cast<double>(t));
    double bc2 = 1.0 - std::pow(kBeta2, static_cast<double>(t));
    std::vector<float>& w = *slot.weights;
    const std::vector<double>& g = *slot.grad;
    for (std::size_t i = 0; i < w.size(); ++i) {
        double m = kBeta1 * static_cast<double>(slot.m[i]) + (1.0 - kBeta1) * g[i];
        double v = kBeta2 * static_cast<double>(slot.v[i]) + (1.0 - kBeta2) * g[i] * g[i];
        slot.m[i] = static_cast<float>(m);
        slot.v[i] = static_cast<float>(v);
        double m_hat = static_cast<double>(slot.m[i]) / bc1;
        double v_hat = static_cast<double>(slot.v[i]) / bc2;
        double wi = static_cast<double>(w[i]);
        wi -= lr * weight_decay * wi;
        wi -= lr * m_hat / (std::sqrt(v_hat) + kEps);
        w[i] = static_cast<float>(wi);
    }
}

std::string rng_to_string(const std::mt19937_64& gen) {
    std::ostringstream out;
    out << gen;
    return out.str();
}

void rng_from_string(std::mt19937_64& gen, const std::string& text) {
    std::istringstream in(text);
    in >> gen;
    if (!in) throw ValidationError("corrupt rng state in checkpoint");
}

void save_checkpoint(const std::string& path, const Net<float>& net, const BundleConfig& config,
                     const Vocabulary& vocab, const std::vector<AdamSlot>& slots,
                     std::size_t step, const std::mt19937_64& rng, double loss_sum,
                     uint64_t loss_count) {
    std::vector<TensorRecord> tensors;
    uint64_t d = net.d, h = net.h, vocab_size = net.vocab_size;
    tensors.push_back(TensorRecord::f32("embedding", {vocab_size, d}, net.embedding));
    tensors.push_back(TensorRecord::f32("backbone.weight", {d, d}, net.backbone_weight));
    tensors.push_back(TensorRecord::f32("backbone.bias", {1, d}, net.backbone_bias));
    tensors.push_back(TensorRecord::f32("head.dense1", {h, d}, net.dense1));
    tensors.push_back(TensorRecord::f32("head.dense2", {d, h}, net.dense2));
    tensors.push_back(TensorRecord::u64("__config__", {4},
                                        {config.d, config.h, config.max_len, vocab_size}));
    std::string vocab_text = serialize_vocabulary(vocab);
    tensors.push_back(TensorRecord::u8("__vocab__",
                                       std::vector<uint8_t>(vocab_text.begin(), vocab_text.end())));
    for (const AdamSlot& slot : slots) {
        tensors.push_back(TensorRecord::f32(std::string("__opt__.m.") + slot.name,
                                            {slot.m.size()}, slot.m));
        tensors.push_back(TensorRecord::f32(std::string("__opt__.v.") + slot.name,
                                            {slot.v.size()}, slot.v));
    }
    tensors.push_back(TensorRecord::u64("__state__.step", {1}, {step}));
    tensors.push_back(TensorRecord::f64("__state__.running_loss", {2},
                                        {loss_sum, static_cast<double>(loss_count)}));
    std::string rng_text = rng_to_string(rng);
    tensors.push_back(TensorRecord::u8("__state__.rng",
                                       std::vector<uint8_t>(rng_text.begin(), rng_text.end())));
    write_tensor_file(path, tensors);
}

void load_checkpoint(const std::string& path, Net<float>& net, std::vector<AdamSlot>& slots,
                     std::size_t& step, std::mt19937_64& rng, double& loss_sum,
                     uint64_t& loss_count) {
    std::vector<TensorRecord> tensors = read_tensor_file(path);
    auto take_f32 = [&](std::string_view name, std::vector<float>& dst) {
        std::vector<float> v = require_tensor(tensors, name).as_f32();
        if (v.size() != dst.size()) {
            throw ValidationError("checkpoint tensor " + std::string(name) + " has wrong size");
        }
        dst = std::move(v);
    };
    take_f32("embedding", net.embedding);
    take_f32("backbone.weight", net.backbone_weight);
    take_f32("backbone.bias", net.backbone_bias);
    take_f32("head.dense1", net.dense1);
    take_f32("head.dense2", net.dense2);
    for (AdamSlot& slot : slots) {
        take_f32(std::string("__opt__.m.") + slot.name, slot.m);
        take_f32(std::string("__opt__.v.") + slot.name, slot.v);
    }
    step = require_tensor(tensors, "__state__.step").as_u64().at(0);
    std::vector<double> running = require_tensor(tensors, "__state__.running_loss").as_f64();
    loss_sum = running.at(0);
    loss_count = static_cast<uint64_t>(running.at(1));
    const TensorRecord& rng_tensor = require_tensor(tensors, "__state__.rng");
    rng_from_string(rng, std::string(rng_tensor.bytes.begin(), rng_tensor.bytes.end()));
}

}  // namespace

TrainResult train(const ModelBundle& start, const Vocabulary& vocab,
                  const TeacherDataset& dataset, const TrainConfig& config,
                  const std::string& out_dir, const std::string& resume_checkpoint) {
    config.validate();
    if (dataset.records.empty()) throw ValidationError("training dataset is empty");
    {
        std::vector<uint64_t> bad = validate_dataset(dataset);
        if (!bad.empty()) {
            throw ValidationError("dataset failed unit-norm validation at row " +
                                  std::to_string(bad.front()) + " (and " +
                                  std::to_string(bad.size() - 1) + " more)");
        }
    }

    Net<float> net = Net<float>::from_bundle(start);
    Segmenter segmenter(vocab);
    std::size_t max_len = config.max_len ? config.max_len : start.config.max_len;
    if (max_len == 0) max_len = 8192;
    BatchStream stream(dataset, segmenter, config.target, config.batch_size, config.seed, max_len,
                       config.epochs);
    const std::size_t total_steps = stream.total_steps();

    Gradients grads;
    grads.resize_like_net(net.vocab_size, net.d, net.h);
    std::vector<AdamSlot> slots = {
        {&net.embedding, &grads.embedding, {}, {}, config.train_embedding, "embedding"},
        {&net.backbone_weight, &grads.backbone_weight, {}, {}, config.train_backbone,
         "backbone.weight"},
        {&net.backbone_bias, &grads.backbone_bias, {}, {}, config.train_backbone,
         "backbone.bias"},
        {&net.dense1, &grads.dense1, {}, {}, config.train_head, "head.dense1"},
        {&net.dense2, &grads.dense2, {}, {}, config.train_head, "head.dense2"},
    };
    for (AdamSlot& slot : slots) {
        slot.m.assign(slot.weights->size(), 0.0f);
        slot.v.assign(slot.weights->size(), 0.0f);
    }

    std::mt19937_64 master(mix_seed(config.seed, std::string_view("train")));
    std::size_t step0 = 0;
    double loss_sum = 0.0;
    uint64_t loss_count = 0;
    if (!resume_checkpoint.empty()) {
        load_checkpoint(resume_checkpoint, net, slots, step0, master, loss_sum, loss_count);
        if (step0 > total_steps) {
            throw ValidationError("checkpoint step exceeds the configured run length");
        }
        stream.seek(step0);
    }

    std::ofstream metrics;
    std::string last_checkpoint = resume_checkpoint;
    if (!out_dir.empty()) {
        std::filesystem::create_directories(out_dir);
        metrics.open(out_dir + "/metrics.tsv",
                     resume_checkpoint.empty() ? std::ios::trunc : std::ios::app);
        if (!metrics) throw IoError("cannot open metric log in " + out_dir);
        if (resume_checkpoint.empty()) metrics << "step\tlr\tloss\n" << std::flush;
    }

    auto checkpoint_path = [&](std::size_t completed) {
        char buf[32];
        std::snprintf(buf, sizeof(buf), "ckpt_%06zu.vsrg", completed);
        return out_dir + "/" + buf;
    };

    TrainResult result;
    Batch batch;
    ForwardCache<float> cache;
    for (std::size_t step = step0; step < total_steps; ++step) {
        if (!stream.next(batch)) {
            throw Error("batch stream ended early at step " + std::to_string(step));
        }
        net_forward(net, batch.ids, batch.mask, batch.rows, batch.cols, config.target, cache);
        CosineLoss loss = cosine_loss(cache.unit, batch.targets, batch.rows, batch.target_dim);
        if (!std::isfinite(loss.loss)) {
            throw NumericError("non-finite loss at step " + std::to_string(step) +
                               (last_checkpoint.empty() ? std::string("; no checkpoint written")
                                                        : "; last checkpoint: " + last_checkpoint));
        }
        grads.zero();
        net_backward(net, cache, loss.grad_unit, grads);

        double norm = grads.global_norm(config.train_embedding, config.train_backbone,
                                        config.train_head);
        if (norm > config.max_grad_norm) grads.scale(config.max_grad_norm / norm);

        double lr = lr_at(step, total_steps, config);
        for (AdamSlot& slot : slots) adam_step(slot, lr, config.weight_decay, step + 1);

        result.log.push_back({step, lr, loss.loss});
        loss_sum += loss.loss;
        ++loss_count;
        if (metrics.is_open()) {
            metrics << step << '\t' << lr << '\t' << loss.loss << '\n' << std::flush;
        }
        std::size_t completed = step + 1;
        if (!out_dir.empty() && config.checkpoint_every > 0 &&
            completed % config.checkpoint_every == 0) {
            last_checkpoint = checkpoint_path(completed);
            save_checkpoint(last_checkpoint, net, start.config, vocab, slots, completed, master,
                            loss_sum, loss_count);
        }
    }

    if (!out_dir.empty()) {
        // final checkpoint regardless of the modulus
        std::string final_path = checkpoint_path(total_steps);
        if (last_checkpoint != final_path) {
            save_checkpoint(final_path, net, start.config, vocab, slots, total_steps, master,
                            loss_sum, loss_count);
            last_checkpoint = final_path;
        }
    }

    result.model = net.to_bundle(start.config);
    result.final_checkpoint = last_checkpoint;
    if (!out_dir.empty()) {
        save_bundle(out_dir + "/model.vsrg", result.model, vocab);
    }
    return result;
}

template struct Net<float>;
template struct Net<double>;
template void net_forward<float>(const Net<float>&, const std::vector<TokenId>&,
                                 const std::vector<uint8_t>&, std::size_t, std::size_t,
                                 TargetKind, ForwardCache<float>&);
template void net_forward<double>(const Net<double>&, const std::vector<TokenId>&,
                                  const std::vector<uint8_t>&, std::size_t, std::size_t,
                                  TargetKind, ForwardCache<double>&);
template CosineLoss cosine_loss<float>(const std::vector<float>&, const std::vector<float>&,
                                       std::size_t, std::size_t);
template CosineLoss cosine_loss<double>(const std::vector<double>&, const std::vector<float>&,
                                        std::size_t, std::size_t);
template void net_backward<float>(const Net<float>&, const ForwardCache<float>&,
                                  const std::vector<double>&, Gradients&);
template void net_backward<double>(const Net<double>&, const ForwardCache<double>&,
                                   const std::vector<double>&, Gradients&);

}  // namespace vsrg
