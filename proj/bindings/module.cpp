#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <random>

#include "vsrg/cloner.hpp"
#include "vsrg/corpus.hpp"
#include "vsrg/distiller.hpp"
#include "vsrg/evaluator.hpp"
#include "vsrg/pipeline.hpp"
#include "vsrg/segmenter.hpp"
#include "vsrg/store.hpp"
#include "vsrg/vocab.hpp"

namespace py = pybind11;
using namespace vsrg;

namespace {

std::vector<CorpusRecord> to_records(const std::vector<std::pair<std::string, std::string>>& in) {
    std::vector<CorpusRecord> out;
    out.reserve(in.size());
    for (const auto& [text, lang] : in) out.push_back({text, lang});
    return out;
}

py::array_t<float> matrix_to_numpy(const EmbeddingMatrix& m) {
    std::vector<py::ssize_t> shape = {static_cast<py::ssize_t>(m.rows),
                                      static_cast<py::ssize_t>(m.dim)};
    py::array_t<float> arr(shape);
    std::memcpy(arr.mutable_data(), m.data.data(), m.data.size() * sizeof(float));
    return arr;
}

EmbeddingMatrix numpy_to_matrix(const py::array_t<float, py::array::c_style>& arr) {
    if (arr.ndim() != 2) throw ValidationError("expected a 2-D float32 array");
    EmbeddingMatrix m;
    m.rows = static_cast<uint64_t>(arr.shape(0));
    m.dim = static_cast<uint64_t>(arr.shape(1));
    m.data.resize(m.rows * m.dim);
    std::memcpy(m.data.data(), arr.data(), m.data.size() * sizeof(float));
    return m;
}

// Bundle + vocabulary pair: the unit the file format stores.
struct PyModel {
    ModelBundle bundle;
    Vocabulary vocab;
};

FrequencyTable table_from_dict(const std::map<std::string, uint64_t>& entries) {
    FrequencyTable t;
    for (const auto& [token, count] : entries) t.add(token, count);
    return t;
}

PyModel make_toy_model(const Vocabulary& vocab, uint64_t d, uint64_t h, uint64_t max_len,
                       uint64_t seed) {
    std::mt19937_64 gen(seed);
    auto fill = [&](EmbeddingMatrix& m) {
        for (float& x : m.data) x = static_cast<float>(gaussian(gen) * 0.5);
    };
    PyModel model;
    model.vocab = vocab;
    model.bundle.embedding = EmbeddingMatrix::zeros(vocab.size(), d);
    fill(model.bundle.embedding);
    model.bundle.backbone_params["weight"] = EmbeddingMatrix::zeros(d, d);
    fill(model.bundle.backbone_params["weight"]);
    model.bundle.backbone_params["bias"] = EmbeddingMatrix::zeros(1, d);
    fill(model.bundle.backbone_params["bias"]);
    model.bundle.head_params["dense1"] = EmbeddingMatrix::zeros(h, d);
    fill(model.bundle.head_params["dense1"]);
    model.bundle.head_params["dense2"] = EmbeddingMatrix::zeros(d, h);
    fill(model.bundle.head_params["dense2"]);
    model.bundle.config = {d, h, max_len, vocab.size()};
    return model;
}

py::array_t<float> embed_text(const PyModel& model, const std::string& text) {
    Net<float> net = Net<float>::from_bundle(model.bundle);
    Segmenter seg(model.vocab);
    std::size_t max_len = model.bundle.config.max_len ? model.bundle.config.max_len : 8192;
    TokenIdSequence ids = seg.encode(text, max_len);
    std::vector<uint8_t> mask(ids.ids.size(), 1);
    ForwardCache<float> cache;
    net_forward(net, ids.ids, mask, 1, ids.ids.size(), TargetKind::Final, cache);
    std::vector<py::ssize_t> shape = {static_cast<py::ssize_t>(net.d)};
    py::array_t<float> out(shape);
    std::memcpy(out.mutable_data(), cache.unit.data(), net.d * sizeof(float));
    return out;
}

}  // namespace

PYBIND11_MODULE(_vsrg, m) {
    m.doc() = "vocabulary surgery and offline distillation toolkit";

    py::register_exception<ValidationError>(m, "ValidationError", PyExc_ValueError);
    py::register_exception<IoError>(m, "IoError", PyExc_IOError);
    py::register_exception<NumericError>(m, "NumericError", PyExc_ArithmeticError);

    py::class_<Vocabulary>(m, "Vocabulary")
        .def_static("with_reserved", &Vocabulary::with_reserved, py::arg("lexical"))
        .def_static("load", &load_vocabulary, py::arg("path"))
        .def(
            "save",
            [](const Vocabulary& v, const std::string& path) { save_vocabulary(v, path); },
            py::arg("path"))
        .def("__len__", &Vocabulary::size)
        .def("token", [](const Vocabulary& v, TokenId id) { return v.tokens.at(id); })
        .def("id_of", [](const Vocabulary& v, const std::string& s) { return v.lookup(s); })
        .def("__contains__",
             [](const Vocabulary& v, const std::string& s) { return v.id_of.count(s) > 0; })
        .def_property_readonly("tokens", [](const Vocabulary& v) { return v.tokens; })
        .def_property_readonly("pad_id", [](const Vocabulary& v) { return v.specials.pad; })
        .def_property_readonly("unk_id", [](const Vocabulary& v) { return v.specials.unk; })
        .def_property_readonly("byte_token_base",
                               [](const Vocabulary& v) { return v.byte_token_base; });

    py::class_<TokenIdSequence>(m, "TokenIdSequence")
        .def_readonly("ids", &TokenIdSequence::ids)
        .def_readonly("source_len_chars", &TokenIdSequence::source_len_chars);

    py::class_<FragmentationReport>(m, "FragmentationReport")
        .def_readonly("tokens_per_word", &FragmentationReport::tokens_per_word)
        .def_readonly("total_tokens", &FragmentationReport::total_tokens)
        .def_readonly("total_words", &FragmentationReport::total_words);

    py::class_<Segmenter>(m, "Segmenter")
        .def(py::init([](const Vocabulary& vocab, bool word_boundaries, bool byte_fallback) {
                 return Segmenter(vocab, SegmenterOptions{word_boundaries, byte_fallback});
             }),
             py::arg("vocab"), py::arg("word_boundaries") = true, py::arg("byte_fallback") = true,
             py::keep_alive<1, 2>())
        .def(
            "encode",
            [](const Segmenter& s, const std::string& text, std::size_t max_len) {
                return s.encode(text, max_len).ids;
            },
            py::arg("text"), py::arg("max_len") = std::size_t(1) << 32)
        .def(
            "decode",
            [](const Segmenter& s, const std::vector<TokenId>& ids) {
                return s.decode(ids).text;
            },
            py::arg("ids"))
        .def(
            "fragmentation",
            [](const Segmenter& s, const std::vector<std::pair<std::string, std::string>>& recs) {
                return s.fragmentation(to_records(recs));
            },
            py::arg("records"));

    m.def(
        "count_tokens",
        [](const std::vector<std::pair<std::string, std::string>>& records,
           const Segmenter& segmenter, unsigned threads) {
            return count_tokens(to_records(records), segmenter, threads).entries;
        },
        py::arg("records"), py::arg("segmenter"), py::arg("threads") = 1);
    m.def(
        "count_substrings",
        [](const std::vector<std::pair<std::string, std::string>>& records,
           const std::set<std::size_t>& lengths, std::size_t top_n) {
            return count_substrings(to_records(records), lengths, top_n).entries;
        },
        py::arg("records"), py::arg("lengths"), py::arg("top_n_per_length"));
    m.def(
        "select_top_k",
        [](const std::map<std::string, uint64_t>& table, std::size_t k) {
            return select_top_k(table_from_dict(table), k);
        },
        py::arg("table"), py::arg("k"));
    m.def("prune_teacher",
          [](const Vocabulary& teacher, const std::vector<std::string>& retained) {
              return prune_teacher(teacher, retained);
          });
    m.def(
        "build_vocabulary",
        [](std::size_t target_size, std::size_t mono_top_k, const std::vector<std::size_t>& lengths,
           const Vocabulary& teacher, const std::map<std::string, uint64_t>& mono,
           const std::map<std::string, uint64_t>& multi) {
            FrequencyTable mono_t = table_from_dict(mono);
            FrequencyTable multi_t = table_from_dict(multi);
            BuildPlan plan;
            plan.target_size = target_size;
            plan.monolingual_top_k = mono_top_k;
            plan.lengths = lengths;
            plan.teacher_vocab = &teacher;
            plan.mono_freq = &mono_t;
            plan.multi_freq = &multi_t;
            return build_vocabulary(plan);
        },
        py::arg("target_size"), py::arg("mono_top_k"), py::arg("lengths"), py::arg("teacher_vocab"),
        py::arg("mono_freq"), py::arg("multi_freq"));

    py::class_<PyModel>(m, "Model")
        .def_static(
            "load",
            [](const std::string& path) {
                LoadedBundle loaded = load_bundle(path);
                return PyModel{std::move(loaded.bundle), std::move(loaded.vocab)};
            },
            py::arg("path"))
        .def("save",
             [](const PyModel& model, const std::string& path) {
                 save_bundle(path, model.bundle, model.vocab);
             })
        .def_property_readonly("vocab", [](const PyModel& model) { return model.vocab; })
        .def_property_readonly("embedding",
                               [](const PyModel& model) {
                                   return matrix_to_numpy(model.bundle.embedding);
                               })
        .def_property_readonly("d", [](const PyModel& model) { return model.bundle.config.d; })
        .def_property_readonly("h", [](const PyModel& model) { return model.bundle.config.h; })
        .def_property_readonly("max_len",
                               [](const PyModel& model) { return model.bundle.config.max_len; })
        .def("set_embedding",
             [](PyModel& model, const py::array_t<float, py::array::c_style>& arr) {
                 EmbeddingMatrix m = numpy_to_matrix(arr);
                 if (m.rows != model.vocab.size() || m.dim != model.bundle.config.d) {
                     throw ValidationError("embedding shape mismatch");
                 }
                 model.bundle.embedding = std::move(m);
             })
        .def("parameter_count",
             [](const PyModel& model) { return parameter_count(model.bundle); })
        .def("embed", &embed_text, py::arg("text"));

    m.def("make_toy_model", &make_toy_model, py::arg("vocab"), py::arg("d") = 16,
          py::arg("h") = 32, py::arg("max_len") = 128, py::arg("seed") = 42);

    m.def(
        "clone",
        [](const PyModel& teacher, const Vocabulary& target_vocab, const std::string& strategy,
           unsigned threads) {
            ModelBundle student = clone_model(teacher.bundle, teacher.vocab, target_vocab,
                                              parse_strategy(strategy), nullptr, threads);
            return PyModel{std::move(student), target_vocab};
        },
        py::arg("teacher"), py::arg("target_vocab"), py::arg("strategy") = "mean",
        py::arg("threads") = 1);

    m.def(
        "precompute",
        [](const PyModel& teacher, const std::vector<std::pair<std::string, std::string>>& records,
           const std::string& quota, uint64_t seed) {
            Net<float> net = Net<float>::from_bundle(teacher.bundle);
            Segmenter seg(teacher.vocab);
            std::size_t max_len =
                teacher.bundle.config.max_len ? teacher.bundle.config.max_len : 8192;
            ForwardCache<float> cache;
            EncoderFn encoder = [&](const std::string& text) {
                TokenIdSequence ids = seg.encode(text, max_len);
                std::vector<uint8_t> mask(ids.ids.size(), 1);
                net_forward(net, ids.ids, mask, 1, ids.ids.size(), TargetKind::Final, cache);
                EncoderOutput out;
                out.final = cache.unit;
                out.pre_dense.assign(cache.pooled.begin(), cache.pooled.end());
                return out;
            };
            PrecomputeResult pre = ::vsrg::precompute(to_records(records), encoder);
            return apply_quota(std::move(pre.dataset), QuotaPolicy::parse(quota), seed);
        },
        py::arg("teacher"), py::arg("records"),
        py::arg("quota") = "tr=100000,en=100000,default=10000", py::arg("seed") = 42);

    py::class_<TeacherDataset>(m, "Dataset")
        .def_static("load", &read_dataset, py::arg("path"))
        .def("save",
             [](const TeacherDataset& ds, const std::string& path) { write_dataset(path, ds); })
        .def("__len__", [](const TeacherDataset& ds) { return ds.records.size(); })
        .def_property_readonly("d", [](const TeacherDataset& ds) { return ds.d; })
        .def_property_readonly("d_pre", [](const TeacherDataset& ds) { return ds.d_pre; })
        .def("validate", &validate_dataset)
        .def("texts", [](const TeacherDataset& ds) {
            std::vector<std::string> out;
            out.reserve(ds.records.size());
            for (const auto& r : ds.records) out.push_back(r.text);
            return out;
        });

    m.def("lr_at",
          [](std::size_t step, std::size_t total, double lr_peak, double warmup_ratio) {
              TrainConfig cfg;
              cfg.lr_peak = lr_peak;
              cfg.warmup_ratio = warmup_ratio;
              return lr_at(step, total, cfg);
          },
          py::arg("step"), py::arg("total_steps"), py::arg("lr_peak") = 5e-5,
          py::arg("warmup_ratio") = 0.01);

    m.def(
        "distill",
        [](const PyModel& model, const TeacherDataset& dataset, std::size_t batch_size,
           double lr, double warmup_ratio, double weight_decay, double clip, std::size_t epochs,
           std::size_t ckpt_every, uint64_t seed, const std::string& target,
           const std::string& out_dir, const std::string& resume) {
            TrainConfig cfg;
            cfg.batch_size = batch_size;
            cfg.lr_peak = lr;
            cfg.warmup_ratio = warmup_ratio;
            cfg.weight_decay = weight_decay;
            cfg.max_grad_norm = clip;
            cfg.epochs = epochs;
            cfg.checkpoint_every = ckpt_every;
            cfg.seed = seed;
            cfg.target = parse_target(target);
            TrainResult result = train(model.bundle, model.vocab, dataset, cfg, out_dir, resume);
            std::vector<std::tuple<std::size_t, double, double>> log;
            log.reserve(result.log.size());
            for (const MetricRow& row : result.log) log.emplace_back(row.step, row.lr, row.loss);
            return py::make_tuple(PyModel{std::move(result.model), model.vocab}, log);
        },
        py::arg("model"), py::arg("dataset"), py::arg("batch") = 256, py::arg("lr") = 5e-5,
        py::arg("warmup_ratio") = 0.01, py::arg("weight_decay") = 0.01, py::arg("clip") = 1.0,
        py::arg("epochs") = 1, py::arg("ckpt_every") = 100, py::arg("seed") = 42,
        py::arg("target") = "final", py::arg("out_dir") = "", py::arg("resume") = "");

    m.def("pearson", &pearson, py::arg("x"), py::arg("y"));
    m.def("spearman", &spearman, py::arg("x"), py::arg("y"));
    m.def("average_ranks", &average_ranks, py::arg("values"));

    m.def(
        "evaluate_sts",
        [](const PyModel& model, const std::vector<std::tuple<std::string, std::string, double>>& pairs,
           unsigned threads) {
            std::vector<StsPair> sts;
            sts.reserve(pairs.size());
            for (const auto& [s1, s2, gold] : pairs) sts.push_back({s1, s2, gold});
            StsReport rep = evaluate_sts(model.bundle, model.vocab, sts, threads);
            py::dict out;
            out["pearson"] = rep.pearson_pct;
            out["spearman"] = rep.spearman_pct;
            out["n_pairs"] = rep.n_pairs;
            out["n_skipped"] = rep.n_skipped;
            return out;
        },
        py::arg("model"), py::arg("pairs"), py::arg("threads") = 1);

    m.def(
        "aggregate_report",
        [](const std::map<std::string, std::pair<std::string, double>>& task_scores) {
            CategoryReport rep = aggregate_report(task_scores);
            py::dict out;
            out["macro_average"] = rep.macro_average;
            out["categories"] = rep.category_means;
            out["tasks"] = rep.task_scores;
            return out;
        },
        py::arg("task_scores"));

    m.def(
        "run_pipeline",
        [](const std::string& config_path) {
            PipelineConfig config =
                PipelineConfig::from_config(ConfigFile::parse_file(config_path));
            PipelineResult result = run_pipeline(config);
            return result.manifest_path;
        },
        py::arg("config_path"));

    m.attr("__version__") = "0.1.0";
}
