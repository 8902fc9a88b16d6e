#ifndef MORPHFORGE_UTIL_HPP
#define MORPHFORGE_UTIL_HPP

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace morphforge {

/// FNV-1a 64-bit over a byte range. Provenance fingerprinting only,
/// not a cryptographic hash.
uint64_t fnv1a64(const void* data, size_t size);
uint64_t fnv1a64(std::span<const double> values);

/// Digest of a file's contents, formatted as "fnv64:<16 hex digits>".
std::string file_digest(const std::filesystem::path& path);
std::string digest_string(uint64_t h);

std::string read_text_file(const std::filesystem::path& path);
std::vector<uint8_t> read_binary_file(const std::filesystem::path& path);

/// Write via temp file + rename so readers never observe partial output.
void atomic_write_file(const std::filesystem::path& path, const std::string& contents);
void atomic_write_file(const std::filesystem::path& path, const void* data, size_t size);

std::string base64_encode(const void* data, size_t size);
std::vector<uint8_t> base64_decode(const std::string& text);

/// Shortest round-trip decimal form of a double (deterministic output files).
std::string format_double(double v);

} // namespace morphforge

#endif
