#ifndef MORPHFORGE_DELAUNAY_HPP
#define MORPHFORGE_DELAUNAY_HPP

#include "morphforge/landmarks.hpp"

#include <array>
#include <vector>

namespace morphforge::lma {

/// Triangulation of a landmark set. Triangles are stored with vertex
/// indices sorted ascending and the list sorted lexicographically, so a
/// given input always produces the identical mesh.
struct TriangleMesh {
    LandmarkSet vertices;
    std::vector<std::array<int, 3>> triangles;
};

/// Signed twice-area of (a,b,c); positive for counter-clockwise order.
double orient2d(const Point2& a, const Point2& b, const Point2& c);

/// Bowyer-Watson Delaunay triangulation. Points on a circumcircle (within
/// a relative tolerance) count as outside, so cocircular configurations
/// resolve by insertion order, which is the input order.
/// Throws GeometryError when all points are collinear.
TriangleMesh delaunay_triangulate(const LandmarkSet& points);

void validate_mesh(const TriangleMesh& mesh);

} // namespace morphforge::lma

#endif
