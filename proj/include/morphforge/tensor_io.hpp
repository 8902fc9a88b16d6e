#ifndef MORPHFORGE_TENSOR_IO_HPP
#define MORPHFORGE_TENSOR_IO_HPP

#include <cstdint>
#include <filesystem>
#include <vector>

namespace morphforge {

/// Wire tensor: little-endian {u32 rank, u32 dims[rank], f32 data[]}.
struct Tensor {
    std::vector<uint32_t> dims;
    std::vector<float> data;

    size_t element_count() const {
        size_t n = 1;
        for (uint32_t d : dims) n *= d;
        return n;
    }
};

void write_tensor(const Tensor& t, const std::filesystem::path& path);
Tensor read_tensor(const std::filesystem::path& path);

} // namespace morphforge

#endif
