#include "morphforge/morph.hpp"

#include "morphforge/errors.hpp"

#include <algorithm>
#include <cmath>

namespace morphforge::lma {

LandmarkSet interpolate_landmarks(const LandmarkSet& la, const LandmarkSet& lb, double alpha) {
    if (la.size() != lb.size())
        throw ValidationError("landmark cardinality mismatch: " + std::to_string(la.size()) +
                              " vs " + std::to_string(lb.size()));
    if (!(alpha >= 0.0 && alpha <= 1.0))
        throw ValidationError("alpha must lie in [0,1], got " + std::to_string(alpha));
    LandmarkSet out;
    out.points.reserve(la.size());
    for (size_t i = 0; i < la.size(); ++i) {
        out.points.push_back({(1.0 - alpha) * la[i].x + alpha * lb[i].x,
                              (1.0 - alpha) * la[i].y + alpha * lb[i].y});
    }
    return out;
}

AffineMatrix affine_from_triangles(const std::array<Point2, 3>& src,
                                   const std::array<Point2, 3>& dst) {
    // Solve [x1 y1 1; x2 y2 1; x3 y3 1] * row^T = dst component, per row.
    const double x1 = src[0].x, y1 = src[0].y;
    const double x2 = src[1].x, y2 = src[1].y;
    const double x3 = src[2].x, y3 = src[2].y;
    const double det = x1 * (y2 - y3) - y1 * (x2 - x3) + (x2 * y3 - x3 * y2);
    const double scale = std::abs(x1 * y2) + std::abs(y1 * x3) + std::abs(x2 * y3) + 1.0;
    if (std::abs(det) <= 1e-12 * scale)
        throw GeometryError("degenerate source triangle in affine solve");

    // Inverse of the source-vertex matrix by cofactors.
    const double i00 = (y2 - y3) / det, i01 = (y3 - y1) / det, i02 = (y1 - y2) / det;
    const double i10 = (x3 - x2) / det, i11 = (x1 - x3) / det, i12 = (x2 - x1) / det;
    const double i20 = (x2 * y3 - x3 * y2) / det, i21 = (x3 * y1 - x1 * y3) / det,
                 i22 = (x1 * y2 - x2 * y1) / det;

    AffineMatrix out;
    out.m[0][0] = i00 * dst[0].x + i01 * dst[1].x + i02 * dst[2].x;
    out.m[0][1] = i10 * dst[0].x + i11 * dst[1].x + i12 * dst[2].x;
    out.m[0][2] = i20 * dst[0].x + i21 * dst[1].x + i22 * dst[2].x;
    out.m[1][0] = i00 * dst[0].y + i01 * dst[1].y + i02 * dst[2].y;
    out.m[1][1] = i10 * dst[0].y + i11 * dst[1].y + i12 * dst[2].y;
    out.m[1][2] = i20 * dst[0].y + i21 * dst[1].y + i22 * dst[2].y;
    return out;
}

namespace {

/// Inclusive point-in-triangle test (edges and vertices count as inside).
bool point_in_triangle(const Point2& p, const Point2& a, const Point2& b, const Point2& c) {
    const double d1 = orient2d(a, b, p);
    const double d2 = orient2d(b, c, p);
    const double d3 = orient2d(c, a, p);
    const double tol = 1e-9 * (std::abs(d1) + std::abs(d2) + std::abs(d3) + 1.0);
    const bool has_neg = d1 < -tol || d2 < -tol || d3 < -tol;
    const bool has_pos = d1 > tol || d2 > tol || d3 > tol;
    return !(has_neg && has_pos);
}

std::array<Point2, 3> gather(const LandmarkSet& lm, const std::array<int, 3>& idx) {
    return {lm[static_cast<size_t>(idx[0])], lm[static_cast<size_t>(idx[1])],
            lm[static_cast<size_t>(idx[2])]};
}

} // namespace

FaceImage morph_pair(const FaceImage& img_a, const LandmarkSet& la, const FaceImage& img_b,
                     const LandmarkSet& lb, double alpha) {
    if (!img_a.same_shape(img_b))
        throw ValidationError("morph_pair: image dimensions differ");
    const LandmarkSet mid = interpolate_landmarks(la, lb, alpha);
    const TriangleMesh mesh = delaunay_triangulate(mid);

    const int w = img_a.width;
    const int h = img_a.height;
    FaceImage out(w, h);
    std::vector<uint8_t> filled(static_cast<size_t>(w) * h, 0);

    for (const auto& tri : mesh.triangles) {
        const auto dst = gather(mid, tri);
        const AffineMatrix to_a = affine_from_triangles(dst, gather(la, tri));
        const AffineMatrix to_b = affine_from_triangles(dst, gather(lb, tri));

        const int x0 = std::max(0, static_cast<int>(std::floor(std::min({dst[0].x, dst[1].x, dst[2].x}))));
        const int x1 = std::min(w - 1, static_cast<int>(std::ceil(std::max({dst[0].x, dst[1].x, dst[2].x}))));
        const int y0 = std::max(0, static_cast<int>(std::floor(std::min({dst[0].y, dst[1].y, dst[2].y}))));
        const int y1 = std::min(h - 1, static_cast<int>(std::ceil(std::max({dst[0].y, dst[1].y, dst[2].y}))));

        for (int y = y0; y <= y1; ++y) {
            for (int x = x0; x <= x1; ++x) {
                const size_t fi = static_cast<size_t>(y) * w + x;
                if (filled[fi]) continue;
                const Point2 p{static_cast<double>(x), static_cast<double>(y)};
                if (!point_in_triangle(p, dst[0], dst[1], dst[2])) continue;
                const Point2 sa = to_a.apply(p);
                const Point2 sb = to_b.apply(p);
                const auto pa = bilinear_sample_clamped(img_a, sa.x, sa.y);
                const auto pb = bilinear_sample_clamped(img_b, sb.x, sb.y);
                for (int c = 0; c < 3; ++c)
                    out.at(x, y, c) =
                        std::clamp((1.0 - alpha) * pa[static_cast<size_t>(c)] +
                                       alpha * pb[static_cast<size_t>(c)],
                                   0.0, 1.0);
                filled[fi] = 1;
            }
        }
    }

    // Outside the landmark hull: plain cross-dissolve.
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            const size_t fi = static_cast<size_t>(y) * w + x;
            if (filled[fi]) continue;
            for (int c = 0; c < 3; ++c)
                out.at(x, y, c) = std::clamp(
                    (1.0 - alpha) * img_a.at(x, y, c) + alpha * img_b.at(x, y, c), 0.0, 1.0);
        }
    }
    return out;
}

} // namespace morphforge::lma
