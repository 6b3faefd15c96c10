#include <cstdlib>
#include <fstream>
#include <iostream>
#include <set>

#include <CLI11.hpp>

#include "vsrg/cloner.hpp"
#include "vsrg/corpus.hpp"
#include "vsrg/distiller.hpp"
#include "vsrg/evaluator.hpp"
#include "vsrg/pipeline.hpp"
#include "vsrg/segmenter.hpp"
#include "vsrg/store.hpp"
#include "vsrg/vocab.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitValidation = 1;
constexpr int kExitStage = 2;
constexpr int kExitIo = 3;

struct GlobalOpts {
    uint64_t seed = 42;
    unsigned threads = 0;  // 0: resolve from VSRG_THREADS, else 1
    bool verbose = false;

    unsigned resolve_threads() const {
        if (threads > 0) return threads;
        if (const char* env = std::getenv("VSRG_THREADS")) {
            long v = std::strtol(env, nullptr, 10);
            if (v > 0) return static_cast<unsigned>(v);
        }
        return 1;
    }
};

std::vector<std::size_t> parse_length_list(const std::string& text) {
    std::vector<std::size_t> lengths;
    std::size_t pos = 0;
    while (pos < text.size()) {
        std::size_t comma = text.find(',', pos);
        std::string item = comma == std::string::npos ? text.substr(pos)
                                                      : text.substr(pos, comma - pos);
        pos = comma == std::string::npos ? text.size() : comma + 1;
        if (!item.empty()) lengths.push_back(std::stoull(item));
    }
    return lengths;
}

int run_count(const GlobalOpts& global, const std::string& in, const std::string& mode,
              const std::string& vocab_path, const std::string& lengths_text, std::size_t top_n,
              bool raw, const std::string& language_field, const std::string& out) {
    std::optional<std::string> field;
    if (!language_field.empty()) field = language_field;
    vsrg::IngestResult ingest = vsrg::ingest_all(in, field);
    if (global.verbose) {
        std::cerr << "read " << ingest.records.size() << " records, skipped " << ingest.skipped
                  << "\n";
    }
    vsrg::FrequencyTable table;
    if (mode == "tokens") {
        if (vocab_path.empty()) throw vsrg::ValidationError("count --mode tokens needs --vocab");
        vsrg::Vocabulary vocab = vsrg::load_vocabulary(vocab_path);
        vsrg::Segmenter segmenter(vocab, vsrg::SegmenterOptions{.word_boundaries = !raw});
        table = vsrg::count_tokens(ingest.records, segmenter, global.resolve_threads());
    } else if (mode == "substrings") {
        std::vector<std::size_t> lengths = parse_length_list(lengths_text);
        table = vsrg::count_substrings(
            ingest.records, std::set<std::size_t>(lengths.begin(), lengths.end()), top_n);
    } else {
        throw vsrg::ValidationError("unknown count mode: " + mode);
    }
    vsrg::save_frequency_table(table, out);
    return kExitOk;
}

int run_build_vocab(const std::string& mono, const std::string& multi,
                    const std::string& teacher_path, std::size_t target_size, std::size_t top_k,
                    const std::string& lengths_text, const std::string& out) {
    vsrg::FrequencyTable mono_freq = vsrg::load_frequency_table(mono);
    vsrg::FrequencyTable multi_freq = vsrg::load_frequency_table(multi);
    vsrg::Vocabulary teacher_vocab;
    if (teacher_path.size() > 5 && teacher_path.substr(teacher_path.size() - 5) == ".vsrg") {
        teacher_vocab = vsrg::load_bundle(teacher_path).vocab;
    } else {
        teacher_vocab = vsrg::load_vocabulary(teacher_path);
    }
    vsrg::BuildPlan plan;
    plan.monolingual_top_k = top_k;
    plan.target_size = target_size;
    plan.lengths = parse_length_list(lengths_text);
    plan.teacher_vocab = &teacher_vocab;
    plan.mono_freq = &mono_freq;
    plan.multi_freq = &multi_freq;
    vsrg::Vocabulary vocab = vsrg::build_vocabulary(plan);
    vsrg::save_vocabulary(vocab, out);
    return kExitOk;
}

int run_encode(const std::string& vocab_path, std::size_t max_len) {
    vsrg::Vocabulary vocab = vsrg::load_vocabulary(vocab_path);
    vsrg::Segmenter segmenter(vocab);
    std::string line;
    while (std::getline(std::cin, line)) {
        vsrg::TokenIdSequence seq = segmenter.encode(line, max_len);
        for (std::size_t i = 0; i < seq.ids.size(); ++i) {
            if (i) std::cout << ' ';
            std::cout << seq.ids[i];
        }
        std::cout << '\n';
    }
    return kExitOk;
}

int run_clone(const GlobalOpts& global, const std::string& teacher_path,
              const std::string& vocab_path, const std::string& strategy,
              const std::string& freq_path, const std::string& out) {
    vsrg::LoadedBundle teacher = vsrg::load_bundle(teacher_path);
    vsrg::Vocabulary target_vocab = vsrg::load_vocabulary(vocab_path);
    vsrg::FrequencyTable freq;
    const vsrg::FrequencyTable* freq_ptr = nullptr;
    if (!freq_path.empty()) {
        freq = vsrg::load_frequency_table(freq_path);
        freq_ptr = &freq;
    }
    vsrg::ModelBundle student =
        vsrg::clone_model(teacher.bundle, teacher.vocab, target_vocab,
                          vsrg::parse_strategy(strategy), freq_ptr, global.resolve_threads());
    vsrg::save_bundle(out, student, target_vocab);
    if (global.verbose) {
        std::cerr << "cloned " << vsrg::parameter_count(student) << " parameters\n";
    }
    return kExitOk;
}

int run_precompute(const GlobalOpts& global, const std::string& teacher_path,
                   const std::string& in, const std::string& quota_text, uint64_t seed,
                   const std::string& language_field, const std::string& out) {
    vsrg::LoadedBundle teacher = vsrg::load_bundle(teacher_path);
    std::optional<std::string> field;
    if (!language_field.empty()) field = language_field;
    vsrg::IngestResult corpus = vsrg::ingest_all(in, field);

    vsrg::Net<float> net = vsrg::Net<float>::from_bundle(teacher.bundle);
    vsrg::Segmenter segmenter(teacher.vocab);
    std::size_t max_len = teacher.bundle.config.max_len ? teacher.bundle.config.max_len : 8192;
    vsrg::ForwardCache<float> cache;
    vsrg::EncoderFn encoder = [&](const std::string& text) {
        vsrg::TokenIdSequence seq = segmenter.encode(text, max_len);
        std::vector<uint8_t> mask(seq.ids.size(), 1);
        vsrg::net_forward(net, seq.ids, mask, 1, seq.ids.size(), vsrg::TargetKind::Final, cache);
        vsrg::EncoderOutput enc;
        enc.final = cache.unit;
        enc.pre_dense.assign(cache.pooled.begin(), cache.pooled.end());
        return enc;
    };
    vsrg::PrecomputeResult pre = vsrg::precompute(corpus.records, encoder);
    vsrg::TeacherDataset dataset =
        vsrg::apply_quota(std::move(pre.dataset), vsrg::QuotaPolicy::parse(quota_text), seed);
    vsrg::write_dataset(out, dataset);
    if (global.verbose) {
        std::cerr << "wrote " << dataset.records.size() << " rows, skipped " << pre.skipped
                  << "\n";
    }
    return kExitOk;
}

int run_distill(const std::string& model_path, const std::string& data_path,
                const vsrg::TrainConfig& config, const std::string& resume,
                const std::string& out_dir) {
    vsrg::LoadedBundle model = vsrg::load_bundle(model_path);
    vsrg::TeacherDataset dataset = vsrg::read_dataset(data_path);
    vsrg::TrainResult result =
        vsrg::train(model.bundle, model.vocab, dataset, config, out_dir, resume);
    std::cerr << "final checkpoint: " << result.final_checkpoint << "\n";
    return kExitOk;
}

int run_eval_sts(const GlobalOpts& global, const std::string& model_path,
                 const std::string& vocab_path, const std::string& pairs_path,
                 const std::string& out) {
    vsrg::LoadedBundle model = vsrg::load_bundle(model_path);
    vsrg::Vocabulary vocab =
        vocab_path.empty() ? std::move(model.vocab) : vsrg::load_vocabulary(vocab_path);
    std::vector<vsrg::StsPair> pairs = vsrg::load_sts_pairs(pairs_path);
    vsrg::StsReport report =
        vsrg::evaluate_sts(model.bundle, vocab, pairs, global.resolve_threads());
    std::string json = vsrg::sts_report_json(report);
    if (out.empty()) {
        std::cout << json;
    } else {
        std::ofstream file(out, std::ios::binary);
        if (!file) throw vsrg::IoError("cannot write report: " + out);
        file << json;
    }
    return kExitOk;
}

int run_report(const std::string& scores_path, const std::string& out) {
    auto scores = vsrg::load_task_scores(scores_path);
    vsrg::CategoryReport report = vsrg::aggregate_report(scores);
    std::string json = vsrg::category_report_json(report);
    if (out.empty()) {
        std::cout << json;
    } else {
        std::ofstream file(out, std::ios::binary);
        if (!file) throw vsrg::IoError("cannot write report: " + out);
        file << json;
    }
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"vsrg: vocabulary surgery and offline distillation toolkit"};
    app.require_subcommand(1);

    GlobalOpts global;
    app.add_option("--seed", global.seed, "global seed fallback");
    app.add_option("--threads", global.threads, "worker threads (env VSRG_THREADS as fallback)");
    app.add_flag("--verbose", global.verbose, "chatty progress output");

    // count
    auto* count = app.add_subcommand("count", "build a frequency table from a corpus");
    std::string count_in, count_mode = "substrings", count_vocab, count_lengths = "1,2,3,4";
    std::string count_lang_field, count_out;
    std::size_t count_top_n = 4096;
    bool count_raw = false;
    count->add_option("--in", count_in, "corpus file (.jsonl or .tsv)")->required();
    count->add_option("--mode", count_mode, "tokens | substrings");
    count->add_option("--vocab", count_vocab, "vocabulary for token counting");
    count->add_option("--lengths", count_lengths, "comma list of gram lengths");
    count->add_option("--top-n", count_top_n, "kept grams per length");
    count->add_flag("--raw", count_raw, "match the raw stream instead of marked words");
    count->add_option("--language-field", count_lang_field, "JSONL language key");
    count->add_option("--out", count_out, "output table path")->required();

    // build-vocab
    auto* build = app.add_subcommand("build-vocab", "build the hybrid target vocabulary");
    std::string build_mono, build_multi, build_teacher, build_lengths = "1,2,3,4", build_out;
    std::size_t build_target = 0, build_top_k = 0;
    build->add_option("--mono", build_mono, "monolingual frequency table")->required();
    build->add_option("--multi", build_multi, "multilingual frequency table")->required();
    build->add_option("--teacher-vocab", build_teacher, "teacher vocabulary or bundle")
        ->required();
    build->add_option("--target-size", build_target, "exact vocabulary size")->required();
    build->add_option("--top-k", build_top_k, "monolingual top-k block")->required();
    build->add_option("--lengths", build_lengths, "fill bucket order");
    build->add_option("--out", build_out, "output vocabulary path")->required();

    // encode
    auto* encode = app.add_subcommand("encode", "encode stdin lines to token ids");
    std::string encode_vocab;
    std::size_t encode_max_len = 8192;
    encode->add_option("--vocab", encode_vocab, "vocabulary file")->required();
    encode->add_option("--max-len", encode_max_len, "sequence cap");

    // clone
    auto* clone = app.add_subcommand("clone", "clone a teacher bundle onto a new vocabulary");
    std::string clone_teacher, clone_vocab, clone_strategy = "mean", clone_freq, clone_out;
    clone->add_option("--teacher", clone_teacher, "teacher bundle")->required();
    clone->add_option("--vocab", clone_vocab, "target vocabulary")->required();
    clone->add_option("--strategy", clone_strategy, "mean|weighted|first|last");
    clone->add_option("--freq", clone_freq, "teacher-token frequency table (weighted)");
    clone->add_option("--out", clone_out, "output bundle")->required();

    // precompute
    auto* pre = app.add_subcommand("precompute", "precompute teacher embeddings with quotas");
    std::string pre_teacher, pre_in, pre_quota = "tr=100000,en=100000,default=10000";
    std::string pre_lang_field, pre_out;
    uint64_t pre_seed = 42;
    pre->add_option("--teacher", pre_teacher, "teacher bundle")->required();
    pre->add_option("--in", pre_in, "corpus file")->required();
    pre->add_option("--quota", pre_quota, "per-language caps");
    pre->add_option("--seed", pre_seed, "quota shuffle seed");
    pre->add_option("--language-field", pre_lang_field, "JSONL language key");
    pre->add_option("--out", pre_out, "output dataset (.vsds)")->required();

    // distill
    auto* distill = app.add_subcommand("distill", "train the student against stored vectors");
    std::string distill_model, distill_data, distill_target = "final", distill_resume;
    std::string distill_out;
    vsrg::TrainConfig train_config;
    distill->add_option("--model", distill_model, "student bundle")->required();
    distill->add_option("--data", distill_data, "dataset (.vsds)")->required();
    distill->add_option("--target", distill_target, "final | pre_dense");
    distill->add_option("--batch", train_config.batch_size, "batch size");
    distill->add_option("--lr", train_config.lr_peak, "peak learning rate");
    distill->add_option("--warmup-ratio", train_config.warmup_ratio, "warmup fraction");
    distill->add_option("--weight-decay", train_config.weight_decay, "decoupled decay");
    distill->add_option("--clip", train_config.max_grad_norm, "max gradient norm");
    distill->add_option("--epochs", train_config.epochs, "epochs");
    distill->add_option("--ckpt-every", train_config.checkpoint_every, "checkpoint stride");
    distill->add_option("--seed", train_config.seed, "shuffle seed");
    distill->add_option("--max-len", train_config.max_len, "sequence cap (0: bundle default)");
    distill->add_option("--resume", distill_resume, "checkpoint to resume from");
    distill->add_option("--out", distill_out, "output directory")->required();

    // eval-sts
    auto* eval = app.add_subcommand("eval-sts", "STS correlation evaluation");
    std::string eval_model, eval_vocab, eval_pairs, eval_out;
    eval->add_option("--model", eval_model, "model bundle")->required();
    eval->add_option("--vocab", eval_vocab, "vocabulary override (default: bundle's)");
    eval->add_option("--pairs", eval_pairs, "TSV score<TAB>s1<TAB>s2")->required();
    eval->add_option("--out", eval_out, "report JSON path (default: stdout)");

    // report
    auto* report = app.add_subcommand("report", "macro-averaged category aggregation");
    std::string report_scores, report_out;
    report->add_option("--scores", report_scores, "TSV task<TAB>category<TAB>score")->required();
    report->add_option("--out", report_out, "report JSON path (default: stdout)");

    // pipeline
    auto* pipeline = app.add_subcommand("pipeline", "run all stages from a config file");
    std::string pipeline_config;
    pipeline->add_option("--config", pipeline_config, "pipeline config file")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (count->parsed()) {
            return run_count(global, count_in, count_mode, count_vocab, count_lengths,
                             count_top_n, count_raw, count_lang_field, count_out);
        }
        if (build->parsed()) {
            return run_build_vocab(build_mono, build_multi, build_teacher, build_target,
                                   build_top_k, build_lengths, build_out);
        }
        if (encode->parsed()) return run_encode(encode_vocab, encode_max_len);
        if (clone->parsed()) {
            return run_clone(global, clone_teacher, clone_vocab, clone_strategy, clone_freq,
                             clone_out);
        }
        if (pre->parsed()) {
            return run_precompute(global, pre_teacher, pre_in, pre_quota, pre_seed,
                                  pre_lang_field, pre_out);
        }
        if (distill->parsed()) {
            train_config.target = vsrg::parse_target(distill_target);
            return run_distill(distill_model, distill_data, train_config, distill_resume,
                               distill_out);
        }
        if (eval->parsed()) {
            return run_eval_sts(global, eval_model, eval_vocab, eval_pairs, eval_out);
        }
        if (report->parsed()) return run_report(report_scores, report_out);
        if (pipeline->parsed()) {
            vsrg::PipelineConfig config =
                vsrg::PipelineConfig::from_config(vsrg::ConfigFile::parse_file(pipeline_config));
            if (global.threads > 0) config.threads = global.resolve_threads();
            vsrg::PipelineResult result = vsrg::run_pipeline(config);
            std::cout << "manifest: " << result.manifest_path << "\n";
            return kExitOk;
        }
    } catch (const vsrg::ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitValidation;
    } catch (const vsrg::IoError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitIo;
    } catch (const vsrg::Error& e) {
        // stage and numeric failures
        std::cerr << "error: " << e.what() << "\n";
        return kExitStage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitStage;
    }
    return kExitValidation;
}
