#include "morphforge/align.hpp"

#include "morphforge/errors.hpp"

#include <Eigen/Dense>

#include <cmath>

namespace morphforge {

double SimilarityTransform::scale() const { return std::sqrt(a * a + b * b); }

SimilarityTransform fit_similarity(const LandmarkSet& src, const LandmarkSet& dst) {
    const size_t n = src.size();
    if (n < 2 || dst.size() != n)
        throw GeometryError("similarity fit needs >= 2 corresponding points");

    // Spread check: coincident source points leave rotation/scale unconstrained.
    double mx = 0.0, my = 0.0;
    for (const auto& p : src.points) {
        mx += p.x;
        my += p.y;
    }
    mx /= static_cast<double>(n);
    my /= static_cast<double>(n);
    double spread = 0.0;
    for (const auto& p : src.points)
        spread += (p.x - mx) * (p.x - mx) + (p.y - my) * (p.y - my);
    if (spread <= 1e-18) throw GeometryError("degenerate landmarks: all points coincident");

    // Linear least squares in (a, b, tx, ty):
    //   x' = a x - b y + tx
    //   y' = b x + a y + ty
    Eigen::MatrixXd A(2 * n, 4);
    Eigen::VectorXd rhs(2 * n);
    for (size_t i = 0; i < n; ++i) {
        A(2 * i, 0) = src[i].x;
        A(2 * i, 1) = -src[i].y;
        A(2 * i, 2) = 1.0;
        A(2 * i, 3) = 0.0;
        rhs(2 * i) = dst[i].x;
        A(2 * i + 1, 0) = src[i].y;
        A(2 * i + 1, 1) = src[i].x;
        A(2 * i + 1, 2) = 0.0;
        A(2 * i + 1, 3) = 1.0;
        rhs(2 * i + 1) = dst[i].y;
    }
    const Eigen::Vector4d sol = A.colPivHouseholderQr().solve(rhs);
    SimilarityTransform t;
    t.a = sol(0);
    t.b = sol(1);
    t.tx = sol(2);
    t.ty = sol(3);
    if (!std::isfinite(t.a) || !std::isfinite(t.b) || t.a * t.a + t.b * t.b <= 1e-18)
        throw GeometryError("similarity fit collapsed to zero scale");
    return t;
}

AlignResult align_face(const FaceImage& image, const LandmarkSet& landmarks,
                       const LandmarkSet& template_landmarks, int out_size) {
    if (out_size < 1) throw ImageError("align_face: out_size must be positive");
    const SimilarityTransform t = fit_similarity(landmarks, template_landmarks);

    AlignResult res;
    res.transform = t;
    res.image = FaceImage(out_size, out_size);
    // Least-squares fits carry ~1e-15 fuzz; snap coordinates that miss the
    // sampling domain by no more than 1e-9 so borders are not zero-filled.
    const auto snap = [](double v, double limit) {
        if (v >= -1e-9 && v < 0.0) return 0.0;
        if (v > limit && v <= limit + 1e-9) return limit;
        return v;
    };
    for (int y = 0; y < out_size; ++y) {
        for (int x = 0; x < out_size; ++x) {
            Point2 s = t.apply_inverse({static_cast<double>(x), static_cast<double>(y)});
            s.x = snap(s.x, static_cast<double>(image.width - 1));
            s.y = snap(s.y, static_cast<double>(image.height - 1));
            if (s.x >= 0.0 && s.x <= image.width - 1 && s.y >= 0.0 && s.y <= image.height - 1) {
                res.image.set_pixel(x, y, bilinear_sample(image, s.x, s.y));
            }
            // else: stays 0 (out-of-source fill)
        }
    }
    res.landmarks.points.reserve(landmarks.size());
    for (const auto& p : landmarks.points) res.landmarks.points.push_back(t.apply(p));
    return res;
}

LandmarkSet bbox_fit_template(const LandmarkSet& lm, int out_size, double margin_fraction) {
    if (lm.points.empty()) throw GeometryError("bbox_fit_template: empty landmark set");
    auto [lo, hi] = landmark_bbox(lm);
    const double w = hi.x - lo.x;
    const double h = hi.y - lo.y;
    if (w <= 1e-12 && h <= 1e-12)
        throw GeometryError("bbox_fit_template: degenerate landmark extent");
    const double span = std::max(w, h);
    const double target = (out_size - 1) * (1.0 - 2.0 * margin_fraction);
    const double s = target / span;
    // Center the scaled box in the output frame.
    const double cx = (lo.x + hi.x) / 2.0;
    const double cy = (lo.y + hi.y) / 2.0;
    const double ox = (out_size - 1) / 2.0;
    const double oy = (out_size - 1) / 2.0;
    LandmarkSet out;
    out.points.reserve(lm.size());
    for (const auto& p : lm.points)
        out.points.push_back({ox + (p.x - cx) * s, oy + (p.y - cy) * s});
    return out;
}

} // namespace morphforge
