#ifndef MORPHFORGE_MORPH_HPP
#define MORPHFORGE_MORPH_HPP

#include "morphforge/delaunay.hpp"
#include "morphforge/image.hpp"
#include "morphforge/landmarks.hpp"

#include <array>

namespace morphforge::lma {

/// 2x3 affine matrix M: (x,y) -> (m[0][0] x + m[0][1] y + m[0][2],
///                                m[1][0] x + m[1][1] y + m[1][2]).
struct AffineMatrix {
    std::array<std::array<double, 3>, 2> m{{{1.0, 0.0, 0.0}, {0.0, 1.0, 0.0}}};

    Point2 apply(const Point2& p) const {
        return {m[0][0] * p.x + m[0][1] * p.y + m[0][2],
                m[1][0] * p.x + m[1][1] * p.y + m[1][2]};
    }
};

/// point_i = (1-alpha) * la_i + alpha * lb_i.
/// Throws ValidationError on cardinality mismatch or alpha outside [0,1].
LandmarkSet interpolate_landmarks(const LandmarkSet& la, const LandmarkSet& lb, double alpha);

/// Exact affine mapping src triangle onto dst triangle (residual < 1e-9).
/// Throws GeometryError for a degenerate source triangle.
AffineMatrix affine_from_triangles(const std::array<Point2, 3>& src,
                                   const std::array<Point2, 3>& dst);

/// Landmark-based morph: interpolate landmarks, triangulate the blend
/// shape once, inverse-warp both sources per destination pixel and
/// cross-dissolve with the same alpha. Pixels outside the mesh hull fall
/// back to a direct cross-dissolve of the inputs.
FaceImage morph_pair(const FaceImage& img_a, const LandmarkSet& la, const FaceImage& img_b,
                     const LandmarkSet& lb, double alpha);

} // namespace morphforge::lma

#endif
