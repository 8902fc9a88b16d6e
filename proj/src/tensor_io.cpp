#include "morphforge/tensor_io.hpp"

#include "morphforge/errors.hpp"
#include "morphforge/util.hpp"

#include <cstring>

namespace morphforge {

namespace {

void put_u32(std::vector<uint8_t>& out, uint32_t v) {
    out.push_back(static_cast<uint8_t>(v & 0xff));
    out.push_back(static_cast<uint8_t>((v >> 8) & 0xff));
    out.push_back(static_cast<uint8_t>((v >> 16) & 0xff));
    out.push_back(static_cast<uint8_t>((v >> 24) & 0xff));
}

uint32_t get_u32(const std::vector<uint8_t>& in, size_t& pos) {
    if (pos + 4 > in.size()) throw ParseError("tensor file truncated");
    const uint32_t v = static_cast<uint32_t>(in[pos]) | (static_cast<uint32_t>(in[pos + 1]) << 8) |
                       (static_cast<uint32_t>(in[pos + 2]) << 16) |
                       (static_cast<uint32_t>(in[pos + 3]) << 24);
    pos += 4;
    return v;
}

} // namespace

void write_tensor(const Tensor& t, const std::filesystem::path& path) {
    if (t.data.size() != t.element_count())
        throw ValidationError("tensor data size does not match dims");
    std::vector<uint8_t> bytes;
    bytes.reserve(4 + 4 * t.dims.size() + 4 * t.data.size());
    put_u32(bytes, static_cast<uint32_t>(t.dims.size()));
    for (uint32_t d : t.dims) put_u32(bytes, d);
    for (float f : t.data) {
        uint32_t u;
        std::memcpy(&u, &f, 4);
        put_u32(bytes, u);
    }
    atomic_write_file(path, bytes.data(), bytes.size());
}

Tensor read_tensor(const std::filesystem::path& path) {
    const auto bytes = read_binary_file(path);
    size_t pos = 0;
    Tensor t;
    const uint32_t rank = get_u32(bytes, pos);
    if (rank > 8) throw ParseError("tensor rank too large: " + std::to_string(rank));
    t.dims.resize(rank);
    for (uint32_t i = 0; i < rank; ++i) t.dims[i] = get_u32(bytes, pos);
    const size_t n = t.element_count();
    if (bytes.size() - pos != 4 * n)
        throw ParseError("tensor payload size mismatch in " + path.string());
    t.data.resize(n);
    for (size_t i = 0; i < n; ++i) {
        const uint32_t u = get_u32(bytes, pos);
        std::memcpy(&t.data[i], &u, 4);
    }
    return t;
}

} // namespace morphforge
