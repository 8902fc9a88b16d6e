#include "morphforge/image.hpp"

#include "morphforge/errors.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace morphforge {

void validate_face_image(const FaceImage& img) {
    if (img.width < 8 || img.height < 8)
        throw ValidationError("FaceImage must be at least 8x8, got " +
                              std::to_string(img.width) + "x" + std::to_string(img.height));
    const size_t expected = static_cast<size_t>(img.width) * img.height * 3;
    if (img.pixels.size() != expected)
        throw ValidationError("FaceImage pixel buffer size mismatch");
    for (double v : img.pixels) {
        if (!std::isfinite(v) || v < 0.0 || v > 1.0)
            throw ValidationError("FaceImage pixel outside [0,1]: " + std::to_string(v));
    }
}

std::array<double, 3> bilinear_sample(const FaceImage& img, double x, double y) {
    if (!(x >= 0.0 && x <= img.width - 1 && y >= 0.0 && y <= img.height - 1))
        throw ImageError("bilinear_sample out of bounds: (" + std::to_string(x) + "," +
                         std::to_string(y) + ") in " + std::to_string(img.width) + "x" +
                         std::to_string(img.height));
    const int x0 = std::min(static_cast<int>(x), img.width - 1);
    const int y0 = std::min(static_cast<int>(y), img.height - 1);
    const int x1 = std::min(x0 + 1, img.width - 1);
    const int y1 = std::min(y0 + 1, img.height - 1);
    const double fx = x - x0;
    const double fy = y - y0;

    std::array<double, 3> out{};
    for (int c = 0; c < 3; ++c) {
        const double top = (1.0 - fx) * img.at(x0, y0, c) + fx * img.at(x1, y0, c);
        const double bot = (1.0 - fx) * img.at(x0, y1, c) + fx * img.at(x1, y1, c);
        out[c] = (1.0 - fy) * top + fy * bot;
    }
    return out;
}

std::array<double, 3> bilinear_sample_clamped(const FaceImage& img, double x, double y) {
    const double cx = std::clamp(x, 0.0, static_cast<double>(img.width - 1));
    const double cy = std::clamp(y, 0.0, static_cast<double>(img.height - 1));
    return bilinear_sample(img, cx, cy);
}

FaceImage resize_bilinear(const FaceImage& img, int out_w, int out_h) {
    if (out_w < 1 || out_h < 1) throw ImageError("resize target must be positive");
    FaceImage out(out_w, out_h);
    const double sx = out_w > 1 ? static_cast<double>(img.width - 1) / (out_w - 1) : 0.0;
    const double sy = out_h > 1 ? static_cast<double>(img.height - 1) / (out_h - 1) : 0.0;
    for (int y = 0; y < out_h; ++y) {
        for (int x = 0; x < out_w; ++x) {
            out.set_pixel(x, y, bilinear_sample(img, x * sx, y * sy));
        }
    }
    return out;
}

double mean_abs_diff(const FaceImage& a, const FaceImage& b) {
    if (!a.same_shape(b)) throw ImageError("mean_abs_diff: shape mismatch");
    double acc = 0.0;
    for (size_t i = 0; i < a.pixels.size(); ++i) acc += std::abs(a.pixels[i] - b.pixels[i]);
    return a.pixels.empty() ? 0.0 : acc / static_cast<double>(a.pixels.size());
}

double max_abs_diff(const FaceImage& a, const FaceImage& b) {
    if (!a.same_shape(b)) throw ImageError("max_abs_diff: shape mismatch");
    double m = 0.0;
    for (size_t i = 0; i < a.pixels.size(); ++i) m = std::max(m, std::abs(a.pixels[i] - b.pixels[i]));
    return m;
}

} // namespace morphforge
