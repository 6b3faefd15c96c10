#include "vsrg/pipeline.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>
#include <openssl/evp.h>

#include "vsrg/cloner.hpp"
#include "vsrg/evaluator.hpp"

namespace fs = std::filesystem;

namespace vsrg {

ConfigFile ConfigFile::parse_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open config file: " + path);
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return parse_text(text);
}

ConfigFile ConfigFile::parse_text(std::string_view text) {
    ConfigFile cfg;
    std::string section;
    std::size_t pos = 0;
    std::size_t line_no = 0;
    while (pos <= text.size()) {
        std::size_t nl = text.find('\n', pos);
        std::string_view line =
            nl == std::string_view::npos ? text.substr(pos) : text.substr(pos, nl - pos);
        pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        line = trim(line);
        if (line.empty() || line[0] == '#' || line[0] == ';') continue;
        if (line.front() == '[') {
            if (line.back() != ']' || line.size() < 3) {
                throw ValidationError("malformed section header on config line " +
                                      std::to_string(line_no));
            }
            section = std::string(trim(line.substr(1, line.size() - 2)));
            continue;
        }
        std::size_t eq = line.find('=');
        if (eq == std::string_view::npos) {
            throw ValidationError("expected key = value on config line " +
                                  std::to_string(line_no));
        }
        std::string key(trim(line.substr(0, eq)));
        std::string value(trim(line.substr(eq + 1)));
        if (key.empty()) {
            throw ValidationError("empty key on config line " + std::to_string(line_no));
        }
        cfg.sections_[section][key] = value;
    }
    return cfg;
}

bool ConfigFile::has(const std::string& section, const std::string& key) const {
    auto s = sections_.find(section);
    return s != sections_.end() && s->second.count(key) > 0;
}

std::string ConfigFile::get(const std::string& section, const std::string& key) const {
    auto s = sections_.find(section);
    if (s != sections_.end()) {
        auto k = s->second.find(key);
        if (k != s->second.end()) return k->second;
    }
    throw ValidationError("config is missing [" + section + "] " + key);
}

std::string ConfigFile::get_or(const std::string& section, const std::string& key,
                               const std::string& fallback) const {
    return has(section, key) ? get(section, key) : fallback;
}

uint64_t ConfigFile::get_u64(const std::string& section, const std::string& key) const {
    try {
        return std::stoull(get(section, key));
    } catch (const ValidationError&) {
        throw;
    } catch (const std::exception&) {
        throw ValidationError("config value [" + section + "] " + key + " is not an integer");
    }
}

uint64_t ConfigFile::get_u64_or(const std::string& section, const std::string& key,
                                uint64_t fallback) const {
    return has(section, key) ? get_u64(section, key) : fallback;
}

double ConfigFile::get_double_or(const std::string& section, const std::string& key,
                                 double fallback) const {
    if (!has(section, key)) return fallback;
    try {
        return std::stod(get(section, key));
    } catch (const std::exception&) {
        throw ValidationError("config value [" + section + "] " + key + " is not a number");
    }
}

void ConfigFile::set(const std::string& section, const std::string& key,
                     const std::string& value) {
    sections_[section][key] = value;
}

namespace {

std::vector<std::size_t> parse_lengths(std::string_view text) {
    std::vector<std::size_t> lengths;
    std::size_t pos = 0;
    while (pos < text.size()) {
        std::size_t comma = text.find(',', pos);
        std::string_view item =
            comma == std::string_view::npos ? text.substr(pos) : text.substr(pos, comma - pos);
        pos = comma == std::string_view::npos ? text.size() : comma + 1;
        item = trim(item);
        if (item.empty()) continue;
        try {
            lengths.push_back(std::stoull(std::string(item)));
        } catch (const std::exception&) {
            throw ValidationError("malformed length list entry: " + std::string(item));
        }
    }
    if (lengths.empty()) throw ValidationError("empty length list");
    return lengths;
}

}  // namespace

PipelineConfig PipelineConfig::from_config(const ConfigFile& file) {
    PipelineConfig cfg;
    cfg.mono_corpus = file.get("corpus", "mono");
    cfg.multi_corpus = file.get("corpus", "multi");
    if (file.has("corpus", "language_field")) {
        cfg.language_field = file.get("corpus", "language_field");
    }

    cfg.target_size = file.get_u64("vocab", "target_size");
    cfg.mono_top_k = file.get_u64("vocab", "mono_top_k");
    cfg.lengths = parse_lengths(file.get_or("vocab", "lengths", "1,2,3,4"));
    cfg.top_n_per_length = file.get_u64_or("vocab", "top_n_per_length", 4096);

    cfg.teacher_bundle = file.get("teacher", "bundle");
    cfg.strategy = file.get_or("clone", "strategy", "mean");

    cfg.quota = QuotaPolicy::parse(
        file.get_or("precompute", "quota", "tr=100000,en=100000,default=10000"));
    cfg.precompute_seed = file.get_u64_or("precompute", "seed", 42);

    cfg.train.batch_size = file.get_u64_or("distill", "batch", 256);
    cfg.train.lr_peak = file.get_double_or("distill", "lr", 5e-5);
    cfg.train.warmup_ratio = file.get_double_or("distill", "warmup_ratio", 0.01);
    cfg.train.weight_decay = file.get_double_or("distill", "weight_decay", 0.01);
    cfg.train.max_grad_norm = file.get_double_or("distill", "clip", 1.0);
    cfg.train.epochs = file.get_u64_or("distill", "epochs", 1);
    cfg.train.checkpoint_every = file.get_u64_or("distill", "ckpt_every", 100);
    cfg.train.seed = file.get_u64_or("distill", "seed", 42);
    cfg.train.target = parse_target(file.get_or("distill", "target", "final"));
    cfg.train.max_len = file.get_u64_or("distill", "max_len", 0);

    cfg.sts_pairs = file.get("eval", "pairs");
    cfg.out_dir = file.get("pipeline", "out_dir");
    cfg.threads = static_cast<unsigned>(file.get_u64_or("pipeline", "threads", 1));
    return cfg;
}

void PipelineConfig::validate() const {
    for (const std::string* path : {&mono_corpus, &multi_corpus, &teacher_bundle, &sts_pairs}) {
        if (!fs::exists(*path)) throw ValidationError("input does not exist: " + *path);
    }
    if (out_dir.empty()) throw ValidationError("pipeline out_dir is empty");
    parse_strategy(strategy);
    train.validate();
    std::error_code ec;
    fs::create_directories(out_dir, ec);
    if (ec) throw ValidationError("cannot create output dir " + out_dir + ": " + ec.message());
    std::string probe = out_dir + "/.write_probe";
    {
        std::ofstream test(probe);
        if (!test) throw ValidationError("output dir is not writable: " + out_dir);
    }
    fs::remove(probe, ec);
}

std::string sha256_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot hash missing file: " + path);
    EVP_MD_CTX* ctx = EVP_MD_CTX_new();
    if (!ctx) throw Error("EVP_MD_CTX_new failed");
    EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr);
    char buf[1 << 16];
    while (in) {
        in.read(buf, sizeof(buf));
        std::streamsize got = in.gcount();
        if (got > 0) EVP_DigestUpdate(ctx, buf, static_cast<std::size_t>(got));
    }
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    EVP_DigestFinal_ex(ctx, digest, &len);
    EVP_MD_CTX_free(ctx);
    static const char* hex = "0123456789abcdef";
    std::string out;
    out.reserve(len * 2);
    for (unsigned int i = 0; i < len; ++i) {
        out.push_back(hex[digest[i] >> 4]);
        out.push_back(hex[digest[i] & 0xF]);
    }
    return out;
}

namespace {

struct StageRunner {
    const PipelineConfig& cfg;
    std::vector<ManifestEntry>& entries;

    void record(const std::string& stage, const std::string& relative_path) {
        ManifestEntry e;
        e.stage = stage;
        e.path = relative_path;
        std::string full = cfg.out_dir + "/" + relative_path;
        e.sha256 = sha256_file(full);
        e.bytes = static_cast<uint64_t>(fs::file_size(full));
        entries.push_back(std::move(e));
    }

    template <typename Fn>
    void stage(const std::string& name, Fn&& fn) {
        try {
            fn();
        } catch (const Error& err) {
            throw Error("stage " + name + ": " + err.what());
        }
    }
};

}  // namespace

PipelineResult run_pipeline(const PipelineConfig& config) {
    config.validate();
    PipelineResult result;
    StageRunner runner{config, result.entries};

    LoadedBundle teacher = load_bundle(config.teacher_bundle);
    Vocabulary target_vocab;
    ModelBundle student;
    TeacherDataset dataset;

    // 1. build-vocab: frequency analysis on both corpora, then the hybrid build
    runner.stage("build-vocab", [&] {
        IngestResult mono = ingest_all(config.mono_corpus, config.language_field);
        IngestResult multi = ingest_all(config.multi_corpus, config.language_field);
        std::set<std::size_t> length_set(config.lengths.begin(), config.lengths.end());
        FrequencyTable mono_freq =
            count_substrings(mono.records, length_set, config.top_n_per_length);
        FrequencyTable multi_freq =
            count_substrings(multi.records, length_set, config.top_n_per_length);
        save_frequency_table(mono_freq, config.out_dir + "/mono_freq.tsv");
        save_frequency_table(multi_freq, config.out_dir + "/multi_freq.tsv");
        runner.record("build-vocab", "mono_freq.tsv");
        runner.record("build-vocab", "multi_freq.tsv");

        BuildPlan plan;
        plan.monolingual_top_k = config.mono_top_k;
        plan.target_size = config.target_size;
        plan.lengths = config.lengths;
        plan.teacher_vocab = &teacher.vocab;
        plan.mono_freq = &mono_freq;
        plan.multi_freq = &multi_freq;
        target_vocab = build_vocabulary(plan);
        save_vocabulary(target_vocab, config.out_dir + "/vocab.txt");
        runner.record("build-vocab", "vocab.txt");
    });

    // 2. clone
    runner.stage("clone", [&] {
        student = clone_model(teacher.bundle, teacher.vocab, target_vocab,
                              parse_strategy(config.strategy), nullptr, config.threads);
        save_bundle(config.out_dir + "/student.vsrg", student, target_vocab);
        runner.record("clone", "student.vsrg");
    });

    // 3. precompute (teacher encoder over the multilingual corpus, quota'd)
    runner.stage("precompute", [&] {
        IngestResult corpus = ingest_all(config.multi_corpus, config.language_field);
        Net<float> net = Net<float>::from_bundle(teacher.bundle);
        Segmenter segmenter(teacher.vocab);
        std::size_t max_len = teacher.bundle.config.max_len ? teacher.bundle.config.max_len : 8192;
        ForwardCache<float> cache;
        EncoderFn encoder = [&](const std::string& text) {
            TokenIdSequence seq = segmenter.encode(text, max_len);
            std::vector<uint8_t> mask(seq.ids.size(), 1);
            net_forward(net, seq.ids, mask, 1, seq.ids.size(), TargetKind::Final, cache);
            EncoderOutput out;
            out.final = cache.unit;
            out.pre_dense.assign(cache.pooled.begin(), cache.pooled.end());
            return out;
        };
        PrecomputeResult pre = precompute(corpus.records, encoder);
        dataset = apply_quota(std::move(pre.dataset), config.quota, config.precompute_seed);
        write_dataset(config.out_dir + "/data.vsds", dataset);
        runner.record("precompute", "data.vsds");
    });

    // 4. distill
    runner.stage("distill", [&] {
        TrainResult trained =
            train(student, target_vocab, dataset, config.train, config.out_dir + "/distill");
        student = std::move(trained.model);
        std::vector<std::string> produced;
        for (const auto& entry : fs::directory_iterator(config.out_dir + "/distill")) {
            if (entry.is_regular_file()) {
                produced.push_back("distill/" + entry.path().filename().string());
            }
        }
        std::sort(produced.begin(), produced.end());
        for (const std::string& rel : produced) runner.record("distill", rel);
    });

    // 5. eval-sts
    runner.stage("eval-sts", [&] {
        std::vector<StsPair> pairs = load_sts_pairs(config.sts_pairs);
        StsReport report = evaluate_sts(student, target_vocab, pairs, config.threads);
        std::ofstream out(config.out_dir + "/report.json", std::ios::binary);
        if (!out) throw IoError("cannot write report.json");
        out << sts_report_json(report);
        out.close();
        runner.record("eval-sts", "report.json");
    });

    // manifest: one group per stage, every produced file with its hash
    nlohmann::ordered_json j;
    j["stages"] = nlohmann::ordered_json::array();
    std::string current;
    for (const ManifestEntry& e : result.entries) {
        if (e.stage != current) {
            j["stages"].push_back({{"name", e.stage},
                                   {"artifacts", nlohmann::ordered_json::array()}});
            current = e.stage;
        }
        j["stages"].back()["artifacts"].push_back(
            {{"path", e.path}, {"sha256", e.sha256}, {"bytes", e.bytes}});
    }
    result.manifest_path = config.out_dir + "/manifest.json";
    std::ofstream manifest(result.manifest_path, std::ios::binary);
    if (!manifest) throw IoError("cannot write manifest.json");
    manifest << j.dump(2) << "\n";
    manifest.close();
    return result;
}

}  // namespace vsrg
