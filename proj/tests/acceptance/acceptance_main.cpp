// Acceptance suite: runs every release criterion at its stated tolerance and
// prints one PASS/FAIL line per criterion. Exit status is the failure count.

#include <chrono>
#include <cmath>
#include <cstring>
#include <functional>
#include <iostream>
#include <random>
#include <set>
#include <vector>

#include "vsrg/cloner.hpp"
#include "vsrg/corpus.hpp"
#include "vsrg/distiller.hpp"
#include "vsrg/evaluator.hpp"
#include "vsrg/pipeline.hpp"
#include "vsrg/segmenter.hpp"
#include "vsrg/store.hpp"
#include "vsrg/vocab.hpp"

#include "../testutil.hpp"

using namespace vsrg;

namespace {

int failures = 0;

void run_criterion(int number, const std::string& name, const std::function<void()>& body) {
    auto start = std::chrono::steady_clock::now();
    std::string error;
    try {
        body();
    } catch (const std::exception& e) {
        error = e.what();
    }
    double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    char line[256];
    std::snprintf(line, sizeof(line), "[%s] criterion %2d: %-38s (%.2fs)%s%s",
                  error.empty() ? "PASS" : "FAIL", number, name.c_str(), seconds,
                  error.empty() ? "" : " -- ", error.c_str());
    std::cout << line << std::endl;
    if (!error.empty()) ++failures;
}

void require(bool ok, const std::string& message) {
    if (!ok) throw std::runtime_error(message);
}

template <typename T>
void require_eq(const T& got, const T& want, const std::string& what) {
    if (!(got == want)) {
        throw std::runtime_error(what + ": got " + std::to_string(got) + ", want " +
                                 std::to_string(want));
    }
}

// ---- criterion 1: vocabulary arithmetic at paper scale ---------------------

void criterion_vocab_arithmetic() {
    // synthetic tables shaped like the real inputs: 70k monolingual tokens,
    // a 256,000-token teacher, multilingual candidates for the fill
    FrequencyTable mono;
    for (int i = 0; i < 70000; ++i) mono.add("m" + std::to_string(i), 70000 - i);

    std::vector<std::string> teacher_lexical;
    teacher_lexical.reserve(256000 - kNumReserved);
    for (std::size_t i = 0; i < 256000 - kNumReserved; ++i) {
        teacher_lexical.push_back("T" + std::to_string(i));
    }
    Vocabulary teacher = Vocabulary::with_reserved(teacher_lexical);
    require_eq<std::size_t>(teacher.size(), 256000, "teacher vocabulary size");

    FrequencyTable multi;
    for (int i = 0; i < 4000; ++i) multi.add("w" + std::to_string(i), 4000 - i);

    BuildPlan plan;
    plan.monolingual_top_k = 65536;
    plan.target_size = 131072;
    plan.lengths = {1, 2, 3, 4};
    plan.teacher_vocab = &teacher;
    plan.mono_freq = &mono;
    plan.multi_freq = &multi;

    Vocabulary built = build_vocabulary(plan);
    require_eq<std::size_t>(built.size(), 131072, "built vocabulary size");

    const uint64_t d = 768;
    require_eq<uint64_t>(uint64_t(built.size()) * d, 100663296ull, "embedding parameters");
    const uint64_t teacher_params = 256000ull * d;
    require_eq<uint64_t>(teacher_params, 196608000ull, "teacher embedding parameters");
    double reduction = 1.0 - double(100663296ull) / double(teacher_params);
    require(std::abs(reduction - 0.488) < 1e-12, "embedding reduction is not 48.8%");
}

// ---- criterion 2: remap identity -------------------------------------------

void criterion_remap_identity() {
    std::vector<std::string> lexical;
    for (std::size_t i = 0; i < 512 - kNumReserved; ++i) {
        lexical.push_back("tok" + std::to_string(i));
    }
    Vocabulary vocab = Vocabulary::with_reserved(lexical);
    ModelBundle teacher = testutil::random_bundle(vocab, 16, 32, 64, 1001);

    ModelBundle student = clone_model(teacher, vocab, vocab, ComposeStrategy::Mean);
    require(std::memcmp(student.embedding.data.data(), teacher.embedding.data.data(),
                        teacher.embedding.data.size() * sizeof(float)) == 0,
            "embedding table is not bit-equal");
    for (const auto& [name, m] : teacher.backbone_params) {
        require(std::memcmp(student.backbone_params.at(name).data.data(), m.data.data(),
                            m.data.size() * sizeof(float)) == 0,
                "backbone tensor " + name + " changed");
    }
    for (const auto& [name, m] : teacher.head_params) {
        require(std::memcmp(student.head_params.at(name).data.data(), m.data.data(),
                            m.data.size() * sizeof(float)) == 0,
                "head tensor " + name + " changed");
    }
}

// ---- criterion 3: composition oracle ----------------------------------------

void criterion_composition_oracle() {
    std::mt19937_64 gen(1003);
    EmbeddingMatrix teacher = EmbeddingMatrix::zeros(64, 8);
    for (float& x : teacher.data) x = static_cast<float>(gaussian(gen));

    std::vector<double> fallback(8, 0.0);
    for (uint64_t r = 0; r < 64; ++r) {
        for (uint64_t c = 0; c < 8; ++c) fallback[c] += teacher.at(r, c);
    }
    for (double& x : fallback) x /= 64.0;

    double max_diff = 0.0;
    for (ComposeStrategy strategy : {ComposeStrategy::Mean, ComposeStrategy::Weighted,
                                     ComposeStrategy::First, ComposeStrategy::Last}) {
        TokenMapping mapping;
        mapping.strategy = strategy;
        mapping.entries.resize(100);
        for (auto& entry : mapping.entries) {
            std::size_t k = 1 + gen() % 3;
            if (gen() % 12 == 0) k = 0;
            for (std::size_t m = 0; m < k; ++m) {
                entry.teacher_ids.push_back(static_cast<TokenId>(gen() % 64));
            }
            if (strategy == ComposeStrategy::Weighted && k > 0) {
                double total = 0.0;
                for (std::size_t m = 0; m < k; ++m) {
                    entry.weights.push_back(0.5 + uniform01(gen));
                    total += entry.weights.back();
                }
                for (double& w : entry.weights) w /= total;
            }
        }
        EmbeddingMatrix out = compose(teacher, mapping);

        // brute-force recomputation
        for (std::size_t j = 0; j < mapping.entries.size(); ++j) {
            const auto& entry = mapping.entries[j];
            for (uint64_t c = 0; c < 8; ++c) {
                double expect = 0.0;
                if (entry.teacher_ids.empty()) {
                    expect = fallback[c];
                } else if (strategy == ComposeStrategy::First) {
                    expect = teacher.at(entry.teacher_ids.front(), c);
                } else if (strategy == ComposeStrategy::Last) {
                    expect = teacher.at(entry.teacher_ids.back(), c);
                } else {
                    for (std::size_t m = 0; m < entry.teacher_ids.size(); ++m) {
                        double w = strategy == ComposeStrategy::Mean
                                       ? 1.0 / double(entry.teacher_ids.size())
                                       : entry.weights[m];
                        expect += w * teacher.at(entry.teacher_ids[m], c);
                    }
                }
                max_diff = std::max(max_diff, std::abs(expect - double(out.at(j, c))));
            }
        }
    }
    require(max_diff < 1e-6,
            "composition differs from the oracle by " + std::to_string(max_diff));
}

// ---- criterion 4: gradient check --------------------------------------------

void criterion_gradient_check() {
    const std::size_t V = 32, d = 8, h = 16, rows = 4, cols = 5;
    const double eps = 1e-5;

    Net<double> net;
    net.vocab_size = V;
    net.d = d;
    net.h = h;
    std::mt19937_64 gen(1004);
    auto fill = [&](std::vector<double>& v, std::size_t n) {
        v.resize(n);
        for (double& x : v) x = gaussian(gen) * 0.5;
    };
    fill(net.embedding, V * d);
    fill(net.backbone_weight, d * d);
    fill(net.backbone_bias, d);
    fill(net.dense1, h * d);
    fill(net.dense2, d * h);

    std::vector<TokenId> ids(rows * cols);
    std::vector<uint8_t> mask(rows * cols, 0);
    for (std::size_t r = 0; r < rows; ++r) {
        std::size_t len = 2 + gen() % (cols - 1);
        for (std::size_t c = 0; c < cols; ++c) {
            ids[r * cols + c] = static_cast<TokenId>(gen() % V);
            mask[r * cols + c] = c < len ? 1 : 0;
        }
    }
    ids[1] = ids[0];  // duplicate-token coverage
    std::vector<float> targets(rows * d);
    for (std::size_t r = 0; r < rows; ++r) {
        double norm = 0.0;
        std::vector<double> t(d);
        for (std::size_t k = 0; k < d; ++k) {
            t[k] = gaussian(gen);
            norm += t[k] * t[k];
        }
        norm = std::sqrt(norm);
        for (std::size_t k = 0; k < d; ++k) targets[r * d + k] = float(t[k] / norm);
    }

    auto loss_value = [&]() {
        ForwardCache<double> cache;
        net_forward(net, ids, mask, rows, cols, TargetKind::Final, cache);
        return cosine_loss(cache.unit, targets, rows, d).loss;
    };

    ForwardCache<double> cache;
    net_forward(net, ids, mask, rows, cols, TargetKind::Final, cache);
    CosineLoss loss = cosine_loss(cache.unit, targets, rows, d);
    Gradients grads;
    grads.resize_like_net(V, d, h);
    net_backward(net, cache, loss.grad_unit, grads);

    double worst = 0.0;
    auto check = [&](std::vector<double>& param, const std::vector<double>& grad) {
        for (std::size_t i = 0; i < param.size(); ++i) {
            double keep = param[i];
            param[i] = keep + eps;
            double up = loss_value();
            param[i] = keep - eps;
            double down = loss_value();
            param[i] = keep;
            double fd = (up - down) / (2 * eps);
            double denom = std::max({std::abs(fd), std::abs(grad[i]), 1e-8});
            worst = std::max(worst, std::abs(fd - grad[i]) / denom);
        }
    };
    check(net.embedding, grads.embedding);
    check(net.backbone_weight, grads.backbone_weight);
    check(net.backbone_bias, grads.backbone_bias);
    check(net.dense1, grads.dense1);
    check(net.dense2, grads.dense2);
    require(worst < 1e-4, "max relative gradient error " + std::to_string(worst));
}

// ---- shared desk fixtures for the training criteria -------------------------

std::vector<std::string> token_texts(const Vocabulary& vocab, std::size_t n, uint64_t seed) {
    std::mt19937_64 gen(seed);
    std::vector<std::string> texts;
    for (std::size_t i = 0; i < n; ++i) {
        std::string text;
        std::size_t words = 1 + gen() % 4;
        for (std::size_t w = 0; w < words; ++w) {
            if (w) text.push_back(' ');
            TokenId id = vocab.first_lexical() +
                         static_cast<TokenId>(gen() % (vocab.size() - vocab.first_lexical()));
            text += vocab.tokens[id];
        }
        texts.push_back(text);
    }
    return texts;
}

TeacherDataset dataset_from_teacher(const ModelBundle& teacher, const Vocabulary& vocab,
                                    const std::vector<std::string>& texts) {
    Net<float> net = Net<float>::from_bundle(teacher);
    Segmenter seg(vocab);
    TeacherDataset ds;
    ds.d = static_cast<uint32_t>(teacher.config.d);
    ds.d_pre = 0;
    ForwardCache<float> cache;
    for (const std::string& text : texts) {
        TokenIdSequence ids = seg.encode(text, 32);
        std::vector<uint8_t> mask(ids.ids.size(), 1);
        net_forward(net, ids.ids, mask, 1, ids.ids.size(), TargetKind::Final, cache);
        TeacherRecord r;
        r.text = text;
        r.language = "xx";
        r.embedding_final = cache.unit;
        ds.records.push_back(std::move(r));
    }
    return ds;
}

// ---- criterion 5: distillation fixed point ----------------------------------

void criterion_fixed_point() {
    std::vector<std::string> lexical;
    for (int i = 0; i < 40; ++i) lexical.push_back("tok" + std::to_string(i));
    Vocabulary vocab = Vocabulary::with_reserved(lexical);
    ModelBundle teacher = testutil::random_bundle(vocab, 8, 16, 32, 1005);
    TeacherDataset ds = dataset_from_teacher(teacher, vocab, token_texts(vocab, 40, 1006));

    // the student IS the teacher (identity clone), targets are the teacher's
    // own outputs on the same inputs
    ModelBundle student = clone_model(teacher, vocab, vocab, ComposeStrategy::Mean);

    TrainConfig cfg;
    cfg.batch_size = 8;
    cfg.epochs = 10;  // 5 steps/epoch -> 50 steps
    cfg.seed = 5;
    cfg.checkpoint_every = 0;

    TrainResult result = train(student, vocab, ds, cfg);
    require_eq<std::size_t>(result.log.size(), 50, "step count");
    require(result.log.front().loss < 1e-6,
            "step-0 loss " + std::to_string(result.log.front().loss));
    for (const MetricRow& row : result.log) {
        require(row.loss < 1e-6, "loss left the fixed point at step " + std::to_string(row.step));
    }
}

// ---- criterion 6: distillation progress -------------------------------------

void criterion_distillation_progress() {
    std::vector<std::string> lexical;
    for (int i = 0; i < 64; ++i) lexical.push_back("t" + std::to_string(i));
    Vocabulary vocab = Vocabulary::with_reserved(lexical);  // 64 lexical tokens

    ModelBundle teacher = testutil::random_bundle(vocab, 8, 16, 32, 1007);
    ModelBundle student = teacher;
    std::mt19937_64 gen(1008);
    for (float& x : student.head_params["dense1"].data) {
        x += static_cast<float>(gaussian(gen) * 0.8);
    }
    for (float& x : student.head_params["dense2"].data) {
        x += static_cast<float>(gaussian(gen) * 0.8);
    }
    for (float& x : student.embedding.data) {
        x += static_cast<float>(gaussian(gen) * 0.24);
    }
    TeacherDataset ds = dataset_from_teacher(teacher, vocab, token_texts(vocab, 2000, 1009));

    TrainConfig cfg;
    cfg.batch_size = 4;  // 500 steps over one epoch
    cfg.epochs = 1;
    cfg.lr_peak = 1e-3;
    cfg.seed = 17;
    cfg.checkpoint_every = 0;

    TrainResult result = train(student, vocab, ds, cfg);
    require_eq<std::size_t>(result.log.size(), 500, "step count");

    double window[5] = {0, 0, 0, 0, 0};
    for (std::size_t i = 0; i < 500; ++i) {
        require(result.log[i].loss >= 0.0 && result.log[i].loss <= 2.0,
                "loss outside [0,2] at step " + std::to_string(i));
        window[i / 100] += result.log[i].loss;
    }
    for (int w = 0; w + 1 < 5; ++w) {
        require(window[w + 1] < window[w],
                "window " + std::to_string(w + 1) + " mean did not decrease (" +
                    std::to_string(window[w + 1] / 100) + " vs " +
                    std::to_string(window[w] / 100) + ")");
    }
}

// ---- criterion 7: schedule endpoints ----------------------------------------

void criterion_schedule_endpoints() {
    TrainConfig cfg;
    cfg.lr_peak = 5e-5;
    cfg.warmup_ratio = 0.01;
    const std::size_t total = 1000;
    // warmup_steps = round(0.01 * 1000) = 10
    require(lr_at(10, total, cfg) == 5e-5, "peak at warmup end is not exactly 5e-5");
    require(lr_at(total, total, cfg) < 1e-12, "final lr is not < 1e-12");
    double max_lr = 0.0;
    for (std::size_t s = 0; s <= total; ++s) max_lr = std::max(max_lr, lr_at(s, total, cfg));
    require(max_lr == 5e-5, "peak over the schedule is not 5e-5");
}

// ---- criterion 8: quota totals ----------------------------------------------

void criterion_quota_totals() {
    std::vector<std::string> langs = {"tr", "en"};
    for (char a = 'a'; a <= 'z' && langs.size() < 40; ++a) {
        for (char b = 'a'; b <= 'z' && langs.size() < 40; ++b) {
            std::string code{a, b};
            if (code != "tr" && code != "en") langs.push_back(code);
        }
    }

    auto totals_at = [&](uint64_t big_cap, uint64_t small_cap, uint64_t expect) {
        TeacherDataset ds;
        ds.d = 2;
        ds.d_pre = 0;
        TeacherRecord proto;
        proto.text = "t";
        proto.embedding_final = {1.0f, 0.0f};
        for (const std::string& lang : langs) {
            uint64_t surplus =
                (lang == "tr" || lang == "en") ? big_cap + big_cap / 10 : small_cap + small_cap / 5;
            proto.language = lang;
            for (uint64_t i = 0; i < surplus; ++i) ds.records.push_back(proto);
        }
        QuotaPolicy policy;
        policy.caps["tr"] = big_cap;
        policy.caps["en"] = big_cap;
        policy.default_cap = small_cap;
        TeacherDataset out = apply_quota(std::move(ds), policy, 42);
        require_eq<uint64_t>(out.records.size(), expect,
                             "quota total at caps " + std::to_string(big_cap) + "/" +
                                 std::to_string(small_cap));
    };

    totals_at(1000, 100, 2 * 1000 + 38 * 100);          // 1/100 scale: 5,800
    totals_at(100000, 10000, 2 * 100000 + 38 * 10000);  // full scale: 580,000
}

// ---- criterion 9: correlation oracle ----------------------------------------

void criterion_correlation_oracle() {
    std::mt19937_64 gen(1010);
    std::vector<double> x(50), y(50);
    for (int i = 0; i < 50; ++i) {
        x[i] = gaussian(gen) * 2 + 3;
        y[i] = 0.6 * x[i] + gaussian(gen);
    }
    // direct-formula oracle
    auto oracle = [](const std::vector<double>& a, const std::vector<double>& b) {
        double n = double(a.size()), sx = 0, sy = 0, sxx = 0, syy = 0, sxy = 0;
        for (std::size_t i = 0; i < a.size(); ++i) {
            sx += a[i];
            sy += b[i];
            sxx += a[i] * a[i];
            syy += b[i] * b[i];
            sxy += a[i] * b[i];
        }
        return (n * sxy - sx * sy) / std::sqrt((n * sxx - sx * sx) * (n * syy - sy * sy));
    };
    require(std::abs(pearson(x, y) - oracle(x, y)) < 1e-10, "pearson deviates from the oracle");
    require(std::abs(spearman(x, y) - oracle(average_ranks(x), average_ranks(y))) < 1e-10,
            "spearman deviates from the oracle");

    std::vector<double> ranks = average_ranks({1, 2, 2, 3});
    std::vector<double> expect = {1.0, 2.5, 2.5, 4.0};
    require(ranks == expect, "tie ranks are not averaged");
}

// ---- criterion 10: round-trip property --------------------------------------

void criterion_round_trip() {
    std::vector<std::string> lexical = {std::string(kBoundaryMarker) + "th", "the", "er",
                                        "a",  "ab", std::string(kBoundaryMarker) + "\xD0\xB0",
                                        "\xC3\xA7", "qu", "xyz"};
    Vocabulary vocab = Vocabulary::with_reserved(lexical);
    Segmenter seg(vocab);

    std::mt19937_64 gen(1011);
    auto random_text = [&]() {
        std::string out;
        std::size_t n = gen() % 32;
        for (std::size_t i = 0; i < n; ++i) {
            uint32_t cp;
            switch (gen() % 5) {
                case 0: cp = 0x20 + gen() % 0x5F; break;
                case 1: cp = 0x09; break;  // tab: whitespace normalization
                case 2: cp = 0xA0 + gen() % 0x500; break;
                case 3: cp = 0x3040 + gen() % 0x60; break;
                default: cp = 0x10000 + gen() % 0x2000; break;
            }
            if ((cp >= 0xD800 && cp <= 0xDFFF) || cp == 0x2581) cp = 0x20;
            if (cp < 0x80) {
                out.push_back(char(cp));
            } else if (cp < 0x800) {
                out.push_back(char(0xC0 | (cp >> 6)));
                out.push_back(char(0x80 | (cp & 0x3F)));
            } else if (cp < 0x10000) {
                out.push_back(char(0xE0 | (cp >> 12)));
                out.push_back(char(0x80 | ((cp >> 6) & 0x3F)));
                out.push_back(char(0x80 | (cp & 0x3F)));
            } else {
                out.push_back(char(0xF0 | (cp >> 18)));
                out.push_back(char(0x80 | ((cp >> 12) & 0x3F)));
                out.push_back(char(0x80 | ((cp >> 6) & 0x3F)));
                out.push_back(char(0x80 | (cp & 0x3F)));
            }
        }
        return out;
    };

    for (int i = 0; i < 10000; ++i) {
        std::string text = random_text();
        TokenIdSequence seq = seg.encode(text);  // must never throw
        DecodeResult out = seg.decode(seq.ids);
        std::string expect = normalize_whitespace(text);
        if (out.text != expect) {
            throw std::runtime_error("round-trip failed on sample " + std::to_string(i));
        }
    }
}

// ---- criterion 11: end-to-end determinism ------------------------------------

void criterion_pipeline_determinism() {
    testutil::TempDir dir("acc_pipe");
    std::mt19937_64 gen(1012);
    const char* words[] = {"ev", "evler", "kedi", "kitap", "deniz", "the", "cat", "sea"};
    auto make_corpus = [&](const std::string& path, const char* lang, std::size_t n) {
        std::string text;
        for (std::size_t i = 0; i < n; ++i) {
            text += lang;
            text += '\t';
            std::size_t count = 3 + gen() % 5;
            for (std::size_t w = 0; w < count; ++w) {
                if (w) text += ' ';
                if (gen() % 2) {
                    text += words[gen() % 8];
                } else {
                    std::size_t len = 3 + gen() % 6;
                    for (std::size_t c = 0; c < len; ++c) {
                        text += static_cast<char>('a' + gen() % 26);
                    }
                }
            }
            text += '\n';
        }
        testutil::write_file(path, text);
    };
    make_corpus(dir.file("mono.tsv"), "tr", 200);
    make_corpus(dir.file("multi.tsv"), "en", 200);

    std::vector<std::string> teacher_lexical;
    const std::string marker(kBoundaryMarker);
    for (const char* w : words) {
        teacher_lexical.push_back(marker + w);
        teacher_lexical.push_back(w);
    }
    for (char a = 'a'; a <= 'z'; ++a) {
        teacher_lexical.push_back(std::string(1, a));
        teacher_lexical.push_back(marker + std::string(1, a));
    }
    Vocabulary teacher_vocab = Vocabulary::with_reserved(teacher_lexical);
    ModelBundle teacher = testutil::random_bundle(teacher_vocab, 8, 16, 64, 1013);
    save_bundle(dir.file("teacher.vsrg"), teacher, teacher_vocab);
    testutil::write_file(dir.file("sts.tsv"),
                         "0.5\tev kedi\tkitap deniz\n"
                         "2.0\tevler deniz\tev deniz\n"
                         "3.5\tkedi kitap\tkedi kitap\n"
                         "5.0\tev ev\tev ev\n");

    auto config_for = [&](const std::string& out_dir) {
        std::string text =
            "[corpus]\nmono = " + dir.file("mono.tsv") + "\nmulti = " + dir.file("multi.tsv") +
            "\n[vocab]\ntarget_size = 1024\nmono_top_k = 300\nlengths = 1,2,3,4\n"
            "top_n_per_length = 300\n[teacher]\nbundle = " + dir.file("teacher.vsrg") +
            "\n[clone]\nstrategy = mean\n[precompute]\nquota = default=10000\nseed = 42\n"
            "[distill]\nbatch = 8\nlr = 1e-3\nepochs = 4\nckpt_every = 50\nseed = 42\n"
            "[eval]\npairs = " + dir.file("sts.tsv") + "\n[pipeline]\nout_dir = " + out_dir +
            "\n";
        std::string path = out_dir + ".cfg";
        testutil::write_file(path, text);
        return PipelineConfig::from_config(ConfigFile::parse_file(path));
    };

    run_pipeline(config_for(dir.file("run_a")));
    run_pipeline(config_for(dir.file("run_b")));

    std::string a = testutil::read_file(dir.file("run_a") + "/manifest.json");
    std::string b = testutil::read_file(dir.file("run_b") + "/manifest.json");
    require(!a.empty(), "manifest missing");
    require(a == b, "manifests differ between identical runs");

    // the manifest groups exactly the five pipeline stages
    require(a.find("build-vocab") != std::string::npos && a.find("clone") != std::string::npos &&
                a.find("precompute") != std::string::npos &&
                a.find("distill") != std::string::npos && a.find("eval-sts") != std::string::npos,
            "manifest does not list all five stages");
}

}  // namespace

int main() {
    std::cout << "acceptance suite\n";
    run_criterion(1, "vocabulary arithmetic (paper scale)", criterion_vocab_arithmetic);
    run_criterion(2, "remap identity (bit-exact clone)", criterion_remap_identity);
    run_criterion(3, "composition oracle (4 strategies)", criterion_composition_oracle);
    run_criterion(4, "gradient check (finite differences)", criterion_gradient_check);
    run_criterion(5, "distillation fixed point", criterion_fixed_point);
    run_criterion(6, "distillation progress (500 steps)", criterion_distillation_progress);
    run_criterion(7, "schedule endpoints", criterion_schedule_endpoints);
    run_criterion(8, "quota totals (both scales)", criterion_quota_totals);
    run_criterion(9, "correlation oracle", criterion_correlation_oracle);
    run_criterion(10, "round-trip (10k random strings)", criterion_round_trip);
    run_criterion(11, "end-to-end determinism", criterion_pipeline_determinism);

    if (failures == 0) {
        std::cout << "all 11 criteria passed\n";
    } else {
        std::cout << failures << " criteria FAILED\n";
    }
    return failures;
}
