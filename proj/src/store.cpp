#include "vsrg/store.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>

namespace vsrg {

uint64_t QuotaPolicy::cap_for(const std::string& language) const {
    auto it = caps.find(language);
    return it == caps.end() ? default_cap : it->second;
}

QuotaPolicy QuotaPolicy::parse(std::string_view spec) {
    QuotaPolicy policy;
    std::size_t pos = 0;
    while (pos < spec.size()) {
        std::size_t comma = spec.find(',', pos);
        std::string_view item =
            comma == std::string_view::npos ? spec.substr(pos) : spec.substr(pos, comma - pos);
        pos = comma == std::string_view::npos ? spec.size() : comma + 1;
        item = trim(item);
        if (item.empty()) continue;
        std::size_t eq = item.find('=');
        if (eq == std::string_view::npos) {
            throw ValidationError("malformed quota item: " + std::string(item));
        }
        std::string key(trim(item.substr(0, eq)));
        uint64_t value = 0;
        try {
            value = std::stoull(std::string(trim(item.substr(eq + 1))));
        } catch (const std::exception&) {
            throw ValidationError("malformed quota value in: " + std::string(item));
        }
        if (key == "default") {
            policy.default_cap = value;
        } else if (valid_language_code(key)) {
            policy.caps[key] = value;
        } else {
            throw ValidationError("quota key is not a language code: " + key);
        }
    }
    return policy;
}

TeacherDataset apply_quota(TeacherDataset dataset, const QuotaPolicy& policy, uint64_t seed) {
    // group record indices by language, file order preserved within a group
    std::map<std::string, std::vector<uint32_t>> by_language;
    for (uint32_t i = 0; i < static_cast<uint32_t>(dataset.records.size()); ++i) {
        by_language[dataset.records[i].language].push_back(i);
    }

    std::vector<uint32_t> kept;
    for (auto& [language, indices] : by_language) {
        std::mt19937_64 gen(mix_seed(seed, language));
        seeded_shuffle(indices, gen);
        uint64_t cap = policy.cap_for(language);
        if (indices.size() > cap) indices.resize(cap);
        kept.insert(kept.end(), indices.begin(), indices.end());
    }

    std::mt19937_64 global(mix_seed(seed, std::string_view("__global__")));
    seeded_shuffle(kept, global);

    TeacherDataset out;
    out.d = dataset.d;
    out.d_pre = dataset.d_pre;
    out.records.reserve(kept.size());
    for (uint32_t i : kept) out.records.push_back(std::move(dataset.records[i]));
    return out;
}

namespace {

// L2 norm with 64-bit accumulation.
double l2_norm(const std::vector<float>& v) {
    double s = 0.0;
    for (float x : v) s += static_cast<double>(x) * static_cast<double>(x);
    return std::sqrt(s);
}

bool all_finite(const std::vector<float>& v) {
    for (float x : v) {
        if (!std::isfinite(x)) return false;
    }
    return true;
}

}  // namespace

PrecomputeResult precompute(const std::vector<CorpusRecord>& records, const EncoderFn& encoder) {
    PrecomputeResult result;
    for (const CorpusRecord& rec : records) {
        EncoderOutput out;
        try {
            out = encoder(rec.text);
        } catch (const NumericError&) {
            ++result.skipped;
            continue;
        }
        if (out.final.empty() || !all_finite(out.final) || !all_finite(out.pre_dense)) {
            ++result.skipped;
            continue;
        }
        double norm = l2_norm(out.final);
        if (norm < 1e-12) {
            ++result.skipped;
            continue;
        }
        TeacherRecord stored;
        stored.text = rec.text;
        stored.language = rec.language;
        stored.embedding_final.resize(out.final.size());
        for (std::size_t i = 0; i < out.final.size(); ++i) {
            stored.embedding_final[i] = static_cast<float>(out.final[i] / norm);
        }
        stored.embedding_pre_dense = std::move(out.pre_dense);

        if (result.dataset.records.empty()) {
            result.dataset.d = static_cast<uint32_t>(stored.embedding_final.size());
            result.dataset.d_pre = static_cast<uint32_t>(stored.embedding_pre_dense.size());
        } else if (stored.embedding_final.size() != result.dataset.d ||
                   stored.embedding_pre_dense.size() != result.dataset.d_pre) {
            throw ValidationError("encoder output dimensions changed mid-stream");
        }
        result.dataset.records.push_back(std::move(stored));
    }
    return result;
}

namespace {

constexpr char kDatasetMagic[4] = {'V', 'S', 'D', 'S'};
constexpr uint32_t kDatasetVersion = 1;

void put_u16(std::string& out, uint16_t v) {
    out.push_back(static_cast<char>(v & 0xFF));
    out.push_back(static_cast<char>((v >> 8) & 0xFF));
}
void put_u32(std::string& out, uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}
void put_u64(std::string& out, uint64_t v) {
    for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}
void put_f32(std::string& out, float f) {
    uint32_t v;
    std::memcpy(&v, &f, 4);
    put_u32(out, v);
}

struct Cursor {
    const std::string& buf;
    std::size_t pos = 0;
    void need(std::size_t n) const {
        if (pos + n > buf.size()) throw IoError("truncated dataset file");
    }
    uint16_t u16() {
        need(2);
        uint16_t v = static_cast<uint8_t>(buf[pos]) |
                     static_cast<uint16_t>(static_cast<uint8_t>(buf[pos + 1])) << 8;
        pos += 2;
        return v;
    }
    uint32_t u32() {
        need(4);
        uint32_t v = 0;
        for (int i = 0; i < 4; ++i) v |= static_cast<uint32_t>(static_cast<uint8_t>(buf[pos + i])) << (8 * i);
        pos += 4;
        return v;
    }
    uint64_t u64() {
        need(8);
        uint64_t v = 0;
        for (int i = 0; i < 8; ++i) v |= static_cast<uint64_t>(static_cast<uint8_t>(buf[pos + i])) << (8 * i);
        pos += 8;
        return v;
    }
    float f32() {
        uint32_t v = u32();
        float f;
        std::memcpy(&f, &v, 4);
        return f;
    }
};

}  // namespace

void write_dataset(const std::string& path, const TeacherDataset& dataset) {
    // language table, sorted for determinism
    std::map<std::string, uint16_t> lang_index;
    for (const TeacherRecord& r : dataset.records) lang_index.emplace(r.language, 0);
    if (lang_index.size() > 0xFFFF) throw ValidationError("too many languages for dataset file");
    {
        uint16_t next = 0;
        for (auto& [lang, idx] : lang_index) idx = next++;
    }

    std::string out;
    out.append(kDatasetMagic, 4);
    put_u32(out, kDatasetVersion);
    put_u32(out, dataset.d);
    put_u32(out, dataset.d_pre);
    put_u64(out, dataset.records.size());
    put_u16(out, static_cast<uint16_t>(lang_index.size()));
    for (const auto& [lang, idx] : lang_index) {
        if (lang.size() != 2) throw ValidationError("dataset language code must be 2 chars");
        out.append(lang);
    }

    // fixed-width row blocks, then the text heap
    std::string heap;
    for (const TeacherRecord& r : dataset.records) {
        if (r.embedding_final.size() != dataset.d ||
            r.embedding_pre_dense.size() != dataset.d_pre) {
            throw ValidationError("dataset row vectors disagree with the header dims");
        }
        put_u16(out, lang_index.at(r.language));
        put_u64(out, heap.size());
        put_u32(out, static_cast<uint32_t>(r.text.size()));
        for (float f : r.embedding_final) put_f32(out, f);
        for (float f : r.embedding_pre_dense) put_f32(out, f);
        heap.append(r.text);
    }
    out.append(heap);

    std::ofstream file(path, std::ios::binary);
    if (!file) throw IoError("cannot write dataset: " + path);
    file.write(out.data(), static_cast<std::streamsize>(out.size()));
    if (!file) throw IoError("write failure on dataset: " + path);
}

TeacherDataset read_dataset(const std::string& path) {
    std::ifstream file(path, std::ios::binary);
    if (!file) throw IoError("cannot open dataset: " + path);
    std::string buf((std::istreambuf_iterator<char>(file)), std::istreambuf_iterator<char>());
    if (file.bad()) throw IoError("read failure on dataset: " + path);
    if (buf.size() < 8 || std::memcmp(buf.data(), kDatasetMagic, 4) != 0) {
        throw IoError("not a VSDS dataset file: " + path);
    }

    Cursor cur{buf, 4};
    uint32_t version = cur.u32();
    if (version != kDatasetVersion) {
        throw IoError("unsupported dataset version " + std::to_string(version));
    }
    TeacherDataset dataset;
    dataset.d = cur.u32();
    dataset.d_pre = cur.u32();
    uint64_t rows = cur.u64();
    uint16_t lang_count = cur.u16();
    std::vector<std::string> langs(lang_count);
    for (auto& lang : langs) {
        cur.need(2);
        lang.assign(buf, cur.pos, 2);
        cur.pos += 2;
    }

    struct RowMeta {
        uint16_t lang;
        uint64_t offset;
        uint32_t len;
    };
    std::vector<RowMeta> meta(rows);
    dataset.records.resize(rows);
    for (uint64_t i = 0; i < rows; ++i) {
        meta[i].lang = cur.u16();
        meta[i].offset = cur.u64();
        meta[i].len = cur.u32();
        TeacherRecord& r = dataset.records[i];
        r.embedding_final.resize(dataset.d);
        for (uint32_t c = 0; c < dataset.d; ++c) r.embedding_final[c] = cur.f32();
        r.embedding_pre_dense.resize(dataset.d_pre);
        for (uint32_t c = 0; c < dataset.d_pre; ++c) r.embedding_pre_dense[c] = cur.f32();
    }
    std::size_t heap_start = cur.pos;
    for (uint64_t i = 0; i < rows; ++i) {
        if (meta[i].lang >= lang_count) throw IoError("dataset row has invalid language index");
        dataset.records[i].language = langs[meta[i].lang];
        std::size_t begin = heap_start + meta[i].offset;
        if (begin + meta[i].len > buf.size()) throw IoError("dataset text heap is truncated");
        dataset.records[i].text.assign(buf, begin, meta[i].len);
    }
    return dataset;
}

std::vector<uint64_t> validate_dataset(const TeacherDataset& dataset) {
    std::vector<uint64_t> bad;
    for (uint64_t i = 0; i < dataset.records.size(); ++i) {
        double norm = l2_norm(dataset.records[i].embedding_final);
        if (std::abs(norm - 1.0) > 1e-4) bad.push_back(i);
    }
    return bad;
}

TargetKind parse_target(std::string_view name) {
    if (name == "final") return TargetKind::Final;
    if (name == "pre_dense") return TargetKind::PreDense;
    throw ValidationError("unknown target kind: " + std::string(name));
}

BatchStream::BatchStream(const TeacherDataset& dataset, const Segmenter& segmenter,
                         TargetKind target, std::size_t batch_size, uint64_t seed,
                         std::size_t max_len, std::size_t epochs)
    : dataset_(&dataset),
      segmenter_(&segmenter),
      target_(target),
      batch_size_(batch_size),
      seed_(seed),
      max_len_(max_len),
      epochs_(epochs) {
    if (dataset.records.empty()) throw ValidationError("batch stream over an empty dataset");
    if (batch_size_ < 1) throw ValidationError("batch size must be >= 1");
    if (target_ == TargetKind::PreDense && dataset.d_pre == 0) {
        throw ValidationError("dataset has no pre-dense vectors");
    }
    steps_per_epoch_ = (dataset.records.size() + batch_size_ - 1) / batch_size_;
    start_epoch(0);
}

void BatchStream::start_epoch(std::size_t epoch) {
    epoch_ = epoch;
    cursor_ = 0;
    order_.resize(dataset_->records.size());
    for (uint32_t i = 0; i < static_cast<uint32_t>(order_.size()); ++i) order_[i] = i;
    std::mt19937_64 gen(mix_seed(seed_, 0x65706F63ull + epoch));  // "epoc" + index
    seeded_shuffle(order_, gen);
}

void BatchStream::seek(std::size_t global_step) {
    std::size_t epoch = global_step / steps_per_epoch_;
    if (epoch >= epochs_) {
        epoch_ = epochs_;
        cursor_ = 0;
        return;
    }
    start_epoch(epoch);
    cursor_ = (global_step % steps_per_epoch_) * batch_size_;
}

bool BatchStream::next(Batch& batch) {
    if (epoch_ >= epochs_) return false;
    if (cursor_ >= order_.size()) {
        if (epoch_ + 1 >= epochs_) return false;
        start_epoch(epoch_ + 1);
    }
    std::size_t take = std::min(batch_size_, order_.size() - cursor_);

    std::vector<std::vector<TokenId>> sequences(take);
    std::size_t width = 1;
    for (std::size_t r = 0; r < take; ++r) {
        const TeacherRecord& rec = dataset_->records[order_[cursor_ + r]];
        sequences[r] = segmenter_->encode(rec.text, max_len_).ids;
        width = std::max(width, sequences[r].size());
    }

    const TokenId pad = segmenter_->vocab().specials.pad;
    batch.rows = take;
    batch.cols = width;
    batch.ids.assign(take * width, pad);
    batch.mask.assign(take * width, 0);
    batch.target_dim = target_ == TargetKind::Final ? dataset_->d : dataset_->d_pre;
    batch.targets.assign(take * batch.target_dim, 0.0f);

    for (std::size_t r = 0; r < take; ++r) {
        for (std::size_t c = 0; c < sequences[r].size(); ++c) {
            batch.ids[r * width + c] = sequences[r][c];
            batch.mask[r * width + c] = 1;
        }
        const TeacherRecord& rec = dataset_->records[order_[cursor_ + r]];
        const std::vector<float>& src =
            target_ == TargetKind::Final ? rec.embedding_final : rec.embedding_pre_dense;
        if (target_ == TargetKind::Final) {
            std::copy(src.begin(), src.end(), batch.targets.begin() + r * batch.target_dim);
        } else {
            // pre-dense vectors are stored raw; the cosine target needs unit norm
            double norm = l2_norm(src);
            if (norm < 1e-12) {
                throw NumericError("zero-norm pre-dense target at dataset row " +
                                   std::to_string(order_[cursor_ + r]));
            }
            for (std::size_t c = 0; c < src.size(); ++c) {
                batch.targets[r * batch.target_dim + c] = static_cast<float>(src[c] / norm);
            }
        }
    }
    cursor_ += take;
    return true;
}

}  // namespace vsrg
