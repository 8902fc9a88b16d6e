#include "morphforge/features.hpp"

#include "morphforge/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace morphforge::mad {

std::string to_string(ColorSpace cs) {
    switch (cs) {
        case ColorSpace::RGB: return "RGB";
        case ColorSpace::YCbCr: return "YCbCr";
        case ColorSpace::HSV: return "HSV";
    }
    return "?";
}

ColorSpace color_space_from_string(const std::string& s) {
    if (s == "RGB") return ColorSpace::RGB;
    if (s == "YCbCr") return ColorSpace::YCbCr;
    if (s == "HSV") return ColorSpace::HSV;
    throw ParseError("unknown color space '" + s + "'");
}

std::array<Plane, 3> color_transform(const FaceImage& image, ColorSpace space) {
    std::array<Plane, 3> out{Plane(image.width, image.height), Plane(image.width, image.height),
                             Plane(image.width, image.height)};
    for (int y = 0; y < image.height; ++y) {
        for (int x = 0; x < image.width; ++x) {
            const double r = image.at(x, y, 0);
            const double g = image.at(x, y, 1);
            const double b = image.at(x, y, 2);
            double c0 = r, c1 = g, c2 = b;
            switch (space) {
                case ColorSpace::RGB:
                    break;
                case ColorSpace::YCbCr: {
                    // BT.601 full-range luma + offset-centered chroma.
                    c0 = 0.299 * r + 0.587 * g + 0.114 * b;
                    c1 = 0.5 + (b - c0) / 1.772;
                    c2 = 0.5 + (r - c0) / 1.402;
                    break;
                }
                case ColorSpace::HSV: {
                    const double mx = std::max({r, g, b});
                    const double mn = std::min({r, g, b});
                    const double d = mx - mn;
                    double h = 0.0;
                    if (d > 0.0) {
                        if (mx == r) h = std::fmod((g - b) / d, 6.0);
                        else if (mx == g) h = (b - r) / d + 2.0;
                        else h = (r - g) / d + 4.0;
                        h /= 6.0;
                        if (h < 0.0) h += 1.0;
                    }
                    c0 = h;
                    c1 = mx > 0.0 ? d / mx : 0.0;
                    c2 = mx;
                    break;
                }
            }
            out[0].at(x, y) = std::clamp(c0, 0.0, 1.0);
            out[1].at(x, y) = std::clamp(c1, 0.0, 1.0);
            out[2].at(x, y) = std::clamp(c2, 0.0, 1.0);
        }
    }
    return out;
}

namespace {

/// Normalized 7-tap sigma=1 Gaussian kernel.
std::array<double, 7> gaussian_kernel() {
    std::array<double, 7> k{};
    double sum = 0.0;
    for (int i = -3; i <= 3; ++i) {
        k[static_cast<size_t>(i + 3)] = std::exp(-0.5 * i * i);
        sum += k[static_cast<size_t>(i + 3)];
    }
    for (auto& v : k) v /= sum;
    return k;
}

int reflect_clamp(int i, int n) { return std::clamp(i, 0, n - 1); }

Plane blur_sigma1(const Plane& in) {
    const auto k = gaussian_kernel();
    Plane tmp(in.width, in.height);
    for (int y = 0; y < in.height; ++y) {
        for (int x = 0; x < in.width; ++x) {
            double acc = 0.0;
            for (int i = -3; i <= 3; ++i)
                acc += k[static_cast<size_t>(i + 3)] * in.at(reflect_clamp(x + i, in.width), y);
            tmp.at(x, y) = acc;
        }
    }
    Plane out(in.width, in.height);
    for (int y = 0; y < in.height; ++y) {
        for (int x = 0; x < in.width; ++x) {
            double acc = 0.0;
            for (int i = -3; i <= 3; ++i)
                acc += k[static_cast<size_t>(i + 3)] * tmp.at(x, reflect_clamp(y + i, in.height));
            out.at(x, y) = acc;
        }
    }
    return out;
}

Plane decimate2(const Plane& in) {
    Plane out((in.width + 1) / 2, (in.height + 1) / 2);
    for (int y = 0; y < out.height; ++y)
        for (int x = 0; x < out.width; ++x) out.at(x, y) = in.at(2 * x, 2 * y);
    return out;
}

} // namespace

std::vector<Plane> gaussian_pyramid(const Plane& channel, int levels) {
    if (levels < 1) throw ValidationError("pyramid needs levels >= 1");
    const int min_side = 1 << (levels - 1);
    if (channel.width < min_side || channel.height < min_side)
        throw ValidationError("plane too small for " + std::to_string(levels) +
                              " pyramid levels: " + std::to_string(channel.width) + "x" +
                              std::to_string(channel.height));
    std::vector<Plane> out;
    out.push_back(channel);
    for (int l = 1; l < levels; ++l) out.push_back(decimate2(blur_sigma1(out.back())));
    return out;
}

std::vector<double> lbp_histogram(const Plane& plane, int radius, int neighbors) {
    if (neighbors != 8) throw ValidationError("lbp_histogram supports exactly 8 neighbors");
    if (radius < 1) throw ValidationError("lbp radius must be positive");
    if (plane.width <= 2 * radius + 1 || plane.height <= 2 * radius + 1)
        throw ValidationError("plane too small for LBP radius " + std::to_string(radius));

    // Circular neighbor offsets; axis-aligned ones snapped to integers so
    // exact-tie comparisons behave identically everywhere.
    std::array<double, 8> dx{}, dy{};
    for (int k = 0; k < 8; ++k) {
        const double a = 2.0 * std::numbers::pi * k / 8.0;
        double ox = radius * std::cos(a);
        double oy = -radius * std::sin(a);
        if (std::abs(ox - std::round(ox)) < 1e-9) ox = std::round(ox);
        if (std::abs(oy - std::round(oy)) < 1e-9) oy = std::round(oy);
        dx[static_cast<size_t>(k)] = ox;
        dy[static_cast<size_t>(k)] = oy;
    }

    auto sample = [&](double x, double y) {
        const int x0 = static_cast<int>(std::floor(x));
        const int y0 = static_cast<int>(std::floor(y));
        const double fx = x - x0;
        const double fy = y - y0;
        const int x1 = std::min(x0 + 1, plane.width - 1);
        const int y1 = std::min(y0 + 1, plane.height - 1);
        const double top = (1.0 - fx) * plane.at(x0, y0) + fx * plane.at(x1, y0);
        const double bot = (1.0 - fx) * plane.at(x0, y1) + fx * plane.at(x1, y1);
        return (1.0 - fy) * top + fy * bot;
    };

    std::vector<double> hist(256, 0.0);
    long count = 0;
    for (int y = radius; y < plane.height - radius; ++y) {
        for (int x = radius; x < plane.width - radius; ++x) {
            const double center = plane.at(x, y);
            int code = 0;
            for (int k = 0; k < 8; ++k) {
                const double v = sample(x + dx[static_cast<size_t>(k)],
                                        y + dy[static_cast<size_t>(k)]);
                if (v >= center) code |= 1 << k;
            }
            hist[static_cast<size_t>(code)] += 1.0;
            ++count;
        }
    }
    for (auto& v : hist) v /= static_cast<double>(count);
    return hist;
}

} // namespace morphforge::mad
