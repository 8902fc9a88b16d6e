#ifndef MORPHFORGE_TESTS_ORACLES_HPP
#define MORPHFORGE_TESTS_ORACLES_HPP

// Independent brute-force oracles for the metric, geometry and warping
// operations. These deliberately re-derive everything from the documented
// definitions with plain loops so they share no shortcuts with the
// library implementations they check.

#include "morphforge/features.hpp"
#include "morphforge/image.hpp"
#include "morphforge/landmarks.hpp"
#include "morphforge/morph.hpp"
#include "morphforge/vuln.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <set>
#include <vector>

namespace morphforge::test {

// ------------------------------------------------------------ vuln metrics

/// MMPMR by direct recount: per morph, per subject, aggregate over probes
/// (max), succeed when every subject's aggregate beats tau.
inline double oracle_mmpmr(const vuln::ScoreTable& table, double tau) {
    std::set<std::string> morph_ids;
    for (const auto& r : table.rows) morph_ids.insert(r.morph_id);
    if (morph_ids.empty()) return 0.0;
    long wins = 0;
    for (const auto& morph : morph_ids) {
        std::map<std::string, double> best;
        for (const auto& r : table.rows) {
            if (r.morph_id != morph) continue;
            auto it = best.find(r.subject_id);
            if (it == best.end() || r.score > it->second) best[r.subject_id] = r.score;
        }
        bool all_above = true;
        for (const auto& [_, s] : best) all_above = all_above && s > tau;
        if (all_above) ++wins;
    }
    return static_cast<double>(wins) / static_cast<double>(morph_ids.size());
}

inline double oracle_fmmpmr(const std::vector<std::vector<std::array<double, 2>>>& attempts,
                            double tau) {
    long total = 0, wins = 0;
    for (const auto& morph : attempts) {
        for (const auto& a : morph) {
            ++total;
            if (a[0] > tau && a[1] > tau) ++wins;
        }
    }
    return static_cast<double>(wins) / static_cast<double>(total);
}

/// Smallest candidate tau (taken from the scores themselves) whose strict
/// exceedance fraction is within the target.
inline vuln::Threshold oracle_fmr_threshold(std::vector<double> scores, double target) {
    std::sort(scores.begin(), scores.end());
    for (double tau : scores) {
        long above = 0;
        for (double s : scores)
            if (s > tau) ++above;
        const double fmr = static_cast<double>(above) / static_cast<double>(scores.size());
        if (fmr <= target) return {tau, fmr};
    }
    return {scores.back(), 0.0};
}

// -------------------------------------------------------------- det curves

struct OracleDet {
    double d_eer = 0.0;
    double bpcer_at_05 = 1.0;
    double bpcer_at_10 = 1.0;
    std::vector<std::array<double, 3>> roc; // tau, apcer, bpcer
};

inline OracleDet oracle_det(const std::vector<double>& attacks,
                            const std::vector<double>& bonafide) {
    std::vector<double> taus;
    for (double s : attacks) taus.push_back(s);
    for (double s : bonafide) taus.push_back(s);
    std::sort(taus.begin(), taus.end());
    taus.erase(std::unique(taus.begin(), taus.end()), taus.end());
    taus.push_back(taus.back() + 1.0);

    OracleDet out;
    for (double tau : taus) {
        long a = 0, b = 0;
        for (double s : attacks)
            if (s < tau) ++a;
        for (double s : bonafide)
            if (s >= tau) ++b;
        const double apcer = static_cast<double>(a) / static_cast<double>(attacks.size());
        const double bpcer = static_cast<double>(b) / static_cast<double>(bonafide.size());
        out.roc.push_back({tau, apcer, bpcer});
    }

    bool found = false;
    for (size_t i = 0; i < out.roc.size() && !found; ++i) {
        const double apcer = out.roc[i][1];
        const double bpcer = out.roc[i][2];
        if (apcer == bpcer) {
            out.d_eer = apcer;
            found = true;
        } else if (apcer > bpcer) {
            const double a0 = out.roc[i - 1][1], b0 = out.roc[i - 1][2];
            const double a1 = apcer, b1 = bpcer;
            const double t = (b0 - a0) / ((a1 - a0) - (b1 - b0));
            out.d_eer = a0 + t * (a1 - a0);
            found = true;
        }
    }
    if (!found) out.d_eer = out.roc.back()[1];

    for (const auto& [tau, apcer, bpcer] : out.roc) {
        if (apcer <= 0.05) out.bpcer_at_05 = std::min(out.bpcer_at_05, bpcer);
        if (apcer <= 0.10) out.bpcer_at_10 = std::min(out.bpcer_at_10, bpcer);
    }
    return out;
}

// ---------------------------------------------------------------- geometry

/// Circumcircle of a triangle (center + squared radius) via perpendicular
/// bisectors. Returns nothing for (near-)degenerate triangles.
inline std::optional<std::array<double, 3>> circumcircle(const Point2& a, const Point2& b,
                                                         const Point2& c) {
    const double d = 2.0 * (a.x * (b.y - c.y) + b.x * (c.y - a.y) + c.x * (a.y - b.y));
    if (std::abs(d) < 1e-12) return std::nullopt;
    const double ux = ((a.x * a.x + a.y * a.y) * (b.y - c.y) +
                       (b.x * b.x + b.y * b.y) * (c.y - a.y) +
                       (c.x * c.x + c.y * c.y) * (a.y - b.y)) /
                      d;
    const double uy = ((a.x * a.x + a.y * a.y) * (c.x - b.x) +
                       (b.x * b.x + b.y * b.y) * (a.x - c.x) +
                       (c.x * c.x + c.y * c.y) * (b.x - a.x)) /
                      d;
    const double r2 = (a.x - ux) * (a.x - ux) + (a.y - uy) * (a.y - uy);
    return std::array<double, 3>{ux, uy, r2};
}

/// Empty-circumcircle check over every triangle/point combination, with a
/// relative tolerance so cocircular points do not count as violations.
inline bool oracle_delaunay_empty_circumcircles(const lma::TriangleMesh& mesh) {
    for (const auto& tri : mesh.triangles) {
        const Point2& a = mesh.vertices[static_cast<size_t>(tri[0])];
        const Point2& b = mesh.vertices[static_cast<size_t>(tri[1])];
        const Point2& c = mesh.vertices[static_cast<size_t>(tri[2])];
        const auto circle = circumcircle(a, b, c);
        if (!circle) return false;
        const auto [ux, uy, r2] = *circle;
        for (size_t p = 0; p < mesh.vertices.size(); ++p) {
            const int pi = static_cast<int>(p);
            if (pi == tri[0] || pi == tri[1] || pi == tri[2]) continue;
            const Point2& q = mesh.vertices[p];
            const double d2 = (q.x - ux) * (q.x - ux) + (q.y - uy) * (q.y - uy);
            if (d2 < r2 * (1.0 - 1e-9)) return false;
        }
    }
    return true;
}

inline bool oracle_point_in_triangle(const Point2& p, const Point2& a, const Point2& b,
                                     const Point2& c) {
    auto cross = [](const Point2& o, const Point2& u, const Point2& v) {
        return (u.x - o.x) * (v.y - o.y) - (u.y - o.y) * (v.x - o.x);
    };
    const double d1 = cross(a, b, p);
    const double d2 = cross(b, c, p);
    const double d3 = cross(c, a, p);
    const double tol = 1e-9 * (std::abs(d1) + std::abs(d2) + std::abs(d3) + 1.0);
    const bool neg = d1 < -tol || d2 < -tol || d3 < -tol;
    const bool pos = d1 > tol || d2 > tol || d3 > tol;
    return !(neg && pos);
}

// ----------------------------------------------------------------- warping

/// Direct per-pixel warp: for every output pixel, find the containing
/// triangle of the interpolated mesh by scanning all triangles, map back
/// through affine_from_triangles and blend two clamped bilinear samples.
inline FaceImage oracle_morph(const FaceImage& img_a, const LandmarkSet& la,
                              const FaceImage& img_b, const LandmarkSet& lb, double alpha) {
    LandmarkSet mid;
    for (size_t i = 0; i < la.size(); ++i)
        mid.points.push_back({(1.0 - alpha) * la[i].x + alpha * lb[i].x,
                              (1.0 - alpha) * la[i].y + alpha * lb[i].y});
    const lma::TriangleMesh mesh = lma::delaunay_triangulate(mid);

    FaceImage out(img_a.width, img_a.height);
    for (int y = 0; y < out.height; ++y) {
        for (int x = 0; x < out.width; ++x) {
            const Point2 p{static_cast<double>(x), static_cast<double>(y)};
            bool covered = false;
            for (const auto& tri : mesh.triangles) {
                const std::array<Point2, 3> dst{mid[static_cast<size_t>(tri[0])],
                                                mid[static_cast<size_t>(tri[1])],
                                                mid[static_cast<size_t>(tri[2])]};
                if (!oracle_point_in_triangle(p, dst[0], dst[1], dst[2])) continue;
                const std::array<Point2, 3> src_a{la[static_cast<size_t>(tri[0])],
                                                  la[static_cast<size_t>(tri[1])],
                                                  la[static_cast<size_t>(tri[2])]};
                const std::array<Point2, 3> src_b{lb[static_cast<size_t>(tri[0])],
                                                  lb[static_cast<size_t>(tri[1])],
                                                  lb[static_cast<size_t>(tri[2])]};
                const Point2 pa = lma::affine_from_triangles(dst, src_a).apply(p);
                const Point2 pb = lma::affine_from_triangles(dst, src_b).apply(p);
                const auto sa = bilinear_sample_clamped(img_a, pa.x, pa.y);
                const auto sb = bilinear_sample_clamped(img_b, pb.x, pb.y);
                for (int c = 0; c < 3; ++c)
                    out.at(x, y, c) = (1.0 - alpha) * sa[static_cast<size_t>(c)] +
                                      alpha * sb[static_cast<size_t>(c)];
                covered = true;
                break;
            }
            if (!covered) {
                for (int c = 0; c < 3; ++c)
                    out.at(x, y, c) =
                        (1.0 - alpha) * img_a.at(x, y, c) + alpha * img_b.at(x, y, c);
            }
        }
    }
    return out;
}

// ------------------------------------------------------------- scale space

/// Full 2-D convolution with the separable product kernel, replicated
/// borders, then even-index decimation.
inline mad::Plane oracle_blur_decimate(const mad::Plane& in) {
    double k1[7];
    double sum = 0.0;
    for (int i = -3; i <= 3; ++i) {
        k1[i + 3] = std::exp(-0.5 * i * i);
        sum += k1[i + 3];
    }
    for (double& v : k1) v /= sum;

    mad::Plane blurred(in.width, in.height);
    for (int y = 0; y < in.height; ++y) {
        for (int x = 0; x < in.width; ++x) {
            double acc = 0.0;
            for (int dy = -3; dy <= 3; ++dy) {
                for (int dx = -3; dx <= 3; ++dx) {
                    const int sx = std::clamp(x + dx, 0, in.width - 1);
                    const int sy = std::clamp(y + dy, 0, in.height - 1);
                    acc += k1[dx + 3] * k1[dy + 3] * in.at(sx, sy);
                }
            }
            blurred.at(x, y) = acc;
        }
    }
    mad::Plane out((in.width + 1) / 2, (in.height + 1) / 2);
    for (int y = 0; y < out.height; ++y)
        for (int x = 0; x < out.width; ++x) out.at(x, y) = blurred.at(2 * x, 2 * y);
    return out;
}

// -------------------------------------------------------------------- LBP

/// Independent LBP: explicit neighbor table and its own bilinear read.
inline int oracle_lbp_code(const mad::Plane& plane, int x, int y, int radius) {
    const double r = radius;
    const double s = 0.7071067811865476 * r; // sqrt(2)/2 * r
    const double offs[8][2] = {{r, 0.0},  {s, -s},  {0.0, -r}, {-s, -s},
                               {-r, 0.0}, {-s, s},  {0.0, r},  {s, s}};
    const double center = plane.at(x, y);
    int code = 0;
    for (int k = 0; k < 8; ++k) {
        const double px = x + offs[k][0];
        const double py = y + offs[k][1];
        const int x0 = static_cast<int>(std::floor(px));
        const int y0 = static_cast<int>(std::floor(py));
        const double fx = px - x0;
        const double fy = py - y0;
        double v = 0.0;
        v += (1.0 - fx) * (1.0 - fy) * plane.at(x0, y0);
        if (fx > 0.0) v += fx * (1.0 - fy) * plane.at(x0 + 1, y0);
        if (fy > 0.0) v += (1.0 - fx) * fy * plane.at(x0, y0 + 1);
        if (fx > 0.0 && fy > 0.0) v += fx * fy * plane.at(x0 + 1, y0 + 1);
        if (v >= center) code |= 1 << k;
    }
    return code;
}

} // namespace morphforge::test

#endif
