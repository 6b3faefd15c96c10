#include "vsrg/tensor_io.hpp"

#include <cstring>
#include <fstream>

namespace vsrg {

namespace {

constexpr char kMagic[4] = {'V', 'S', 'R', 'G'};
constexpr uint32_t kVersion = 1;
constexpr std::size_t kAlign = 64;

void put_u32(std::string& out, uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

void put_u64(std::string& out, uint64_t v) {
    for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

uint32_t get_u32(const std::string& buf, std::size_t& pos) {
    if (pos + 4 > buf.size()) throw IoError("truncated tensor file header");
    uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<uint32_t>(static_cast<uint8_t>(buf[pos + i])) << (8 * i);
    pos += 4;
    return v;
}

uint64_t get_u64(const std::string& buf, std::size_t& pos) {
    if (pos + 8 > buf.size()) throw IoError("truncated tensor file header");
    uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<uint64_t>(static_cast<uint8_t>(buf[pos + i])) << (8 * i);
    pos += 8;
    return v;
}

std::size_t align_up(std::size_t n) { return (n + kAlign - 1) / kAlign * kAlign; }

}  // namespace

std::size_t dtype_size(DType dtype) {
    switch (dtype) {
        case DType::F32: return 4;
        case DType::F64: return 8;
        case DType::U64: return 8;
        case DType::U8: return 1;
    }
    throw ValidationError("unknown dtype code");
}

uint64_t TensorRecord::element_count() const {
    uint64_t n = 1;
    for (uint64_t d : dims) n *= d;
    return n;
}

TensorRecord TensorRecord::f32(std::string name, std::vector<uint64_t> dims,
                               const std::vector<float>& values) {
    TensorRecord t;
    t.name = std::move(name);
    t.dtype = DType::F32;
    t.dims = std::move(dims);
    t.bytes.resize(values.size() * 4);
    static_assert(sizeof(float) == 4);
    std::memcpy(t.bytes.data(), values.data(), t.bytes.size());
    if (t.element_count() != values.size()) throw ValidationError("tensor dims/value mismatch");
    return t;
}

TensorRecord TensorRecord::f64(std::string name, std::vector<uint64_t> dims,
                               const std::vector<double>& values) {
    TensorRecord t;
    t.name = std::move(name);
    t.dtype = DType::F64;
    t.dims = std::move(dims);
    t.bytes.resize(values.size() * 8);
    std::memcpy(t.bytes.data(), values.data(), t.bytes.size());
    if (t.element_count() != values.size()) throw ValidationError("tensor dims/value mismatch");
    return t;
}

TensorRecord TensorRecord::u64(std::string name, std::vector<uint64_t> dims,
                               const std::vector<uint64_t>& values) {
    TensorRecord t;
    t.name = std::move(name);
    t.dtype = DType::U64;
    t.dims = std::move(dims);
    t.bytes.resize(values.size() * 8);
    std::memcpy(t.bytes.data(), values.data(), t.bytes.size());
    if (t.element_count() != values.size()) throw ValidationError("tensor dims/value mismatch");
    return t;
}

TensorRecord TensorRecord::u8(std::string name, std::vector<uint8_t> values) {
    TensorRecord t;
    t.name = std::move(name);
    t.dtype = DType::U8;
    t.dims = {values.size()};
    t.bytes = std::move(values);
    return t;
}

std::vector<float> TensorRecord::as_f32() const {
    if (dtype != DType::F32) throw ValidationError("tensor " + name + " is not f32");
    std::vector<float> out(bytes.size() / 4);
    std::memcpy(out.data(), bytes.data(), bytes.size());
    return out;
}

std::vector<double> TensorRecord::as_f64() const {
    if (dtype != DType::F64) throw ValidationError("tensor " + name + " is not f64");
    std::vector<double> out(bytes.size() / 8);
    std::memcpy(out.data(), bytes.data(), bytes.size());
    return out;
}

std::vector<uint64_t> TensorRecord::as_u64() const {
    if (dtype != DType::U64) throw ValidationError("tensor " + name + " is not u64");
    std::vector<uint64_t> out(bytes.size() / 8);
    std::memcpy(out.data(), bytes.data(), bytes.size());
    return out;
}

void write_tensor_file(const std::string& path, const std::vector<TensorRecord>& tensors) {
    std::string header;
    header.append(kMagic, 4);
    put_u32(header, kVersion);
    put_u32(header, static_cast<uint32_t>(tensors.size()));

    // first pass: data offsets
    std::vector<uint64_t> offsets(tensors.size());
    uint64_t cursor = 0;
    for (std::size_t i = 0; i < tensors.size(); ++i) {
        const TensorRecord& t = tensors[i];
        if (t.bytes.size() != t.element_count() * dtype_size(t.dtype)) {
            throw ValidationError("tensor " + t.name + " payload does not match dims");
        }
        offsets[i] = cursor;
        cursor = align_up(cursor + t.bytes.size());
    }
    for (std::size_t i = 0; i < tensors.size(); ++i) {
        const TensorRecord& t = tensors[i];
        put_u32(header, static_cast<uint32_t>(t.name.size()));
        header.append(t.name);
        put_u32(header, static_cast<uint32_t>(t.dims.size()));
        for (uint64_t d : t.dims) put_u64(header, d);
        put_u32(header, static_cast<uint32_t>(t.dtype));
        put_u64(header, offsets[i]);
    }

    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write tensor file: " + path);
    out.write(header.data(), static_cast<std::streamsize>(header.size()));
    std::size_t data_start = align_up(header.size());
    std::string pad(data_start - header.size(), '\0');
    out.write(pad.data(), static_cast<std::streamsize>(pad.size()));
    uint64_t written = 0;
    for (std::size_t i = 0; i < tensors.size(); ++i) {
        if (offsets[i] > written) {
            std::string gap(offsets[i] - written, '\0');
            out.write(gap.data(), static_cast<std::streamsize>(gap.size()));
            written = offsets[i];
        }
        out.write(reinterpret_cast<const char*>(tensors[i].bytes.data()),
                  static_cast<std::streamsize>(tensors[i].bytes.size()));
        written += tensors[i].bytes.size();
    }
    if (!out) throw IoError("write failure on tensor file: " + path);
}

std::vector<TensorRecord> read_tensor_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open tensor file: " + path);
    std::string buf((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    if (in.bad()) throw IoError("read failure on tensor file: " + path);

    if (buf.size() < 12 || std::memcmp(buf.data(), kMagic, 4) != 0) {
        throw IoError("not a VSRG tensor file: " + path);
    }
    std::size_t pos = 4;
    uint32_t version = get_u32(buf, pos);
    if (version != kVersion) {
        throw IoError("unsupported tensor file version " + std::to_string(version));
    }
    uint32_t count = get_u32(buf, pos);

    struct Entry {
        TensorRecord t;
        uint64_t offset;
    };
    std::vector<Entry> entries;
    entries.reserve(count);
    for (uint32_t i = 0; i < count; ++i) {
        Entry e;
        uint32_t name_len = get_u32(buf, pos);
        if (pos + name_len > buf.size()) throw IoError("truncated tensor name");
        e.t.name.assign(buf, pos, name_len);
        pos += name_len;
        uint32_t rank = get_u32(buf, pos);
        e.t.dims.resize(rank);
        for (uint32_t r = 0; r < rank; ++r) e.t.dims[r] = get_u64(buf, pos);
        uint32_t dtype = get_u32(buf, pos);
        if (dtype > 3) throw IoError("unknown dtype code " + std::to_string(dtype));
        e.t.dtype = static_cast<DType>(dtype);
        e.offset = get_u64(buf, pos);
        entries.push_back(std::move(e));
    }
    std::size_t data_start = align_up(pos);
    std::vector<TensorRecord> tensors;
    tensors.reserve(count);
    for (Entry& e : entries) {
        std::size_t nbytes = e.t.element_count() * dtype_size(e.t.dtype);
        std::size_t begin = data_start + e.offset;
        if (begin + nbytes > buf.size()) throw IoError("tensor " + e.t.name + " is truncated");
        e.t.bytes.assign(buf.begin() + static_cast<std::ptrdiff_t>(begin),
                         buf.begin() + static_cast<std::ptrdiff_t>(begin + nbytes));
        tensors.push_back(std::move(e.t));
    }
    return tensors;
}

const TensorRecord* find_tensor(const std::vector<TensorRecord>& tensors, std::string_view name) {
    for (const TensorRecord& t : tensors) {
        if (t.name == name) return &t;
    }
    return nullptr;
}

const TensorRecord& require_tensor(const std::vector<TensorRecord>& tensors,
                                   std::string_view name) {
    const TensorRecord* t = find_tensor(tensors, name);
    if (!t) throw ValidationError("missing tensor: " + std::string(name));
    return *t;
}

}  // namespace vsrg
