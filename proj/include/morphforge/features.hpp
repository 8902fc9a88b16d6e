#ifndef MORPHFORGE_FEATURES_HPP
#define MORPHFORGE_FEATURES_HPP

#include "morphforge/image.hpp"

#include <string>
#include <vector>

namespace morphforge::mad {

/// Single-channel plane with values in [0,1].
struct Plane {
    int width = 0;
    int height = 0;
    std::vector<double> values; // row-major

    Plane() = default;
    Plane(int w, int h, double fill = 0.0)
        : width(w), height(h), values(static_cast<size_t>(w) * h, fill) {}
    double at(int x, int y) const { return values[static_cast<size_t>(y) * width + x]; }
    double& at(int x, int y) { return values[static_cast<size_t>(y) * width + x]; }
};

enum class ColorSpace { RGB, YCbCr, HSV };

std::string to_string(ColorSpace cs);
ColorSpace color_space_from_string(const std::string& s);

/// Splits an image into three channel planes of the requested color space.
/// YCbCr follows ITU-R BT.601 full-range (offset-centered chroma), HSV the
/// standard hexcone model with H scaled to [0,1]. All outputs in [0,1].
std::array<Plane, 3> color_transform(const FaceImage& image, ColorSpace space);

/// Gaussian scale space: level 0 is the input; each next level is a
/// sigma=1 blur (7-tap kernel, replicated borders) followed by 2x
/// decimation (even indices). Requires the plane to be at least
/// 2^(levels-1) pixels per side.
std::vector<Plane> gaussian_pyramid(const Plane& channel, int levels);

/// 256-bin L1-normalized local binary pattern histogram: 8 circularly
/// sampled neighbors (bilinear) at the given radius, bit k set when
/// neighbor k >= center. Neighbor k sits at angle 2*pi*k/8, x right,
/// y up (image rows grow down).
std::vector<double> lbp_histogram(const Plane& plane, int radius, int neighbors = 8);

} // namespace morphforge::mad

#endif
