#ifndef MORPHFORGE_IMAGE_HPP
#define MORPHFORGE_IMAGE_HPP

#include <array>
#include <cstddef>
#include <vector>

namespace morphforge {

/// 3-channel raster with pixels in [0,1], row-major, channel-interleaved.
/// The unit flowing through every pipeline stage.
struct FaceImage {
    int width = 0;
    int height = 0;
    std::vector<double> pixels; // size = width * height * 3

    FaceImage() = default;
    FaceImage(int w, int h, double fill = 0.0)
        : width(w), height(h), pixels(static_cast<size_t>(w) * h * 3, fill) {}

    static constexpr int kChannels = 3;

    size_t index(int x, int y, int c) const {
        return (static_cast<size_t>(y) * width + x) * 3 + c;
    }
    double at(int x, int y, int c) const { return pixels[index(x, y, c)]; }
    double& at(int x, int y, int c) { return pixels[index(x, y, c)]; }

    std::array<double, 3> pixel(int x, int y) const {
        const size_t i = index(x, y, 0);
        return {pixels[i], pixels[i + 1], pixels[i + 2]};
    }
    void set_pixel(int x, int y, const std::array<double, 3>& v) {
        const size_t i = index(x, y, 0);
        pixels[i] = v[0];
        pixels[i + 1] = v[1];
        pixels[i + 2] = v[2];
    }

    bool same_shape(const FaceImage& o) const {
        return width == o.width && height == o.height;
    }
};

/// Enforces the FaceImage invariants required at pipeline boundaries:
/// finite pixels in [0,1], width/height >= 8, buffer size consistent.
/// Throws ValidationError. Scratch images used for low-level sampling
/// math may be smaller and skip this check.
void validate_face_image(const FaceImage& img);

/// Bilinear interpolation of the 4 neighboring pixels. Exact at integer
/// coordinates. (x,y) must lie in [0,width-1] x [0,height-1]; otherwise
/// throws ImageError -- callers clamp explicitly when they want clamping.
std::array<double, 3> bilinear_sample(const FaceImage& img, double x, double y);

/// bilinear_sample after clamping (x,y) into the valid sampling domain.
std::array<double, 3> bilinear_sample_clamped(const FaceImage& img, double x, double y);

/// Plain bilinear resize to out_w x out_h (used by toy backends and tools).
FaceImage resize_bilinear(const FaceImage& img, int out_w, int out_h);

/// Mean over |a - b| across all pixel components (test / reporting helper).
double mean_abs_diff(const FaceImage& a, const FaceImage& b);
double max_abs_diff(const FaceImage& a, const FaceImage& b);

} // namespace morphforge

#endif
