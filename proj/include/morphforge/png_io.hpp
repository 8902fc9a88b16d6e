#ifndef MORPHFORGE_PNG_IO_HPP
#define MORPHFORGE_PNG_IO_HPP

#include "morphforge/image.hpp"

#include <filesystem>

namespace morphforge {

/// Decode an 8-bit PNG (gray / gray+alpha / RGB / RGBA / palette all
/// accepted, expanded to RGB). Pixels become v/255 in [0,1].
/// Throws ParseError on decode failure, IoError if unreadable.
FaceImage load_image(const std::filesystem::path& path);

/// Encode as 8-bit RGB PNG, quantizing with round(v*255). Deterministic
/// byte output for identical pixel data. load(save(x)) == x exactly when
/// x holds 8-bit-quantized values.
void save_image(const FaceImage& img, const std::filesystem::path& path);

} // namespace morphforge

#endif
