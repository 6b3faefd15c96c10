#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "vsrg/common.hpp"

namespace vsrg {

// Little-endian tensor container. Layout:
//   "VSRG" | version u32 | tensor count u32
//   per tensor: name_len u32, name bytes, rank u32, dims u64[rank],
//               dtype u32, offset u64 (relative to the data section)
//   data section, 64-byte aligned, each tensor offset 64-byte aligned
enum class DType : uint32_t {
    F32 = 0,
    F64 = 1,
    U64 = 2,
    U8 = 3,
};

std::size_t dtype_size(DType dtype);

struct TensorRecord {
    std::string name;
    DType dtype = DType::F32;
    std::vector<uint64_t> dims;
    std::vector<uint8_t> bytes;  // raw little-endian payload

    uint64_t element_count() const;

    static TensorRecord f32(std::string name, std::vector<uint64_t> dims,
                            const std::vector<float>& values);
    static TensorRecord f64(std::string name, std::vector<uint64_t> dims,
                            const std::vector<double>& values);
    static TensorRecord u64(std::string name, std::vector<uint64_t> dims,
                            const std::vector<uint64_t>& values);
    static TensorRecord u8(std::string name, std::vector<uint8_t> values);

    std::vector<float> as_f32() const;
    std::vector<double> as_f64() const;
    std::vector<uint64_t> as_u64() const;
};

void write_tensor_file(const std::string& path, const std::vector<TensorRecord>& tensors);
std::vector<TensorRecord> read_tensor_file(const std::string& path);

const TensorRecord* find_tensor(const std::vector<TensorRecord>& tensors, std::string_view name);
const TensorRecord& require_tensor(const std::vector<TensorRecord>& tensors,
                                   std::string_view name);

}  // namespace vsrg
