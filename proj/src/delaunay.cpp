#include "morphforge/delaunay.hpp"

#include "morphforge/errors.hpp"

#include <algorithm>
#include <cmath>
#include <map>

namespace morphforge::lma {

double orient2d(const Point2& a, const Point2& b, const Point2& c) {
    return (b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x);
}

namespace {

/// In-circumcircle predicate with a relative tolerance: returns true only
/// when d lies strictly inside the circumcircle of (a,b,c). Near-cocircular
/// points report "outside".
bool in_circumcircle(const Point2& a, const Point2& b, const Point2& c, const Point2& d) {
    Point2 p = a, q = b, r = c;
    if (orient2d(p, q, r) < 0.0) std::swap(q, r);

    const double adx = p.x - d.x, ady = p.y - d.y;
    const double bdx = q.x - d.x, bdy = q.y - d.y;
    const double cdx = r.x - d.x, cdy = r.y - d.y;
    const double ad = adx * adx + ady * ady;
    const double bd = bdx * bdx + bdy * bdy;
    const double cd = cdx * cdx + cdy * cdy;

    const double t1 = adx * (bdy * cd - cdy * bd);
    const double t2 = ady * (bdx * cd - cdx * bd);
    const double t3 = ad * (bdx * cdy - cdx * bdy);
    const double det = t1 - t2 + t3;
    const double eps = 1e-12 * (std::abs(t1) + std::abs(t2) + std::abs(t3));
    return det > eps;
}

struct Tri {
    int a, b, c;
};

} // namespace

TriangleMesh delaunay_triangulate(const LandmarkSet& points) {
    validate_landmarks(points);
    const int n = static_cast<int>(points.size());

    // Super-triangle comfortably enclosing all input points.
    auto [lo, hi] = landmark_bbox(points);
    const double cx = (lo.x + hi.x) / 2.0;
    const double cy = (lo.y + hi.y) / 2.0;
    const double d = std::max({hi.x - lo.x, hi.y - lo.y, 1.0}) * 64.0;

    std::vector<Point2> pts(points.points);
    pts.push_back({cx - 2.0 * d, cy - d});
    pts.push_back({cx + 2.0 * d, cy - d});
    pts.push_back({cx, cy + 2.0 * d});

    std::vector<Tri> tris{{n, n + 1, n + 2}};

    for (int i = 0; i < n; ++i) {
        const Point2& p = pts[static_cast<size_t>(i)];

        std::vector<size_t> bad;
        for (size_t t = 0; t < tris.size(); ++t) {
            const Tri& tr = tris[t];
            if (in_circumcircle(pts[static_cast<size_t>(tr.a)], pts[static_cast<size_t>(tr.b)],
                                pts[static_cast<size_t>(tr.c)], p))
                bad.push_back(t);
        }
        if (bad.empty())
            throw GeometryError("triangulation failed: point " + std::to_string(i) +
                                " not inside any circumcircle");

        // Cavity boundary = undirected edges used by exactly one bad triangle.
        std::map<std::pair<int, int>, int> edge_count;
        auto note = [&](int u, int v) {
            edge_count[u < v ? std::make_pair(u, v) : std::make_pair(v, u)] += 1;
        };
        for (size_t t : bad) {
            note(tris[t].a, tris[t].b);
            note(tris[t].b, tris[t].c);
            note(tris[t].c, tris[t].a);
        }
        std::vector<std::pair<int, int>> boundary;
        for (const auto& [edge, count] : edge_count)
            if (count == 1) boundary.push_back(edge);

        for (auto it = bad.rbegin(); it != bad.rend(); ++it)
            tris.erase(tris.begin() + static_cast<long>(*it));
        for (const auto& [u, v] : boundary) tris.push_back({u, v, i});
    }

    TriangleMesh mesh;
    mesh.vertices = points;
    for (const Tri& t : tris) {
        if (t.a >= n || t.b >= n || t.c >= n) continue; // touches super-triangle
        std::array<int, 3> idx{t.a, t.b, t.c};
        std::sort(idx.begin(), idx.end());
        const double area2 = std::abs(orient2d(pts[static_cast<size_t>(idx[0])],
                                               pts[static_cast<size_t>(idx[1])],
                                               pts[static_cast<size_t>(idx[2])]));
        if (area2 / 2.0 <= 1e-12) continue;
        mesh.triangles.push_back(idx);
    }
    std::sort(mesh.triangles.begin(), mesh.triangles.end());
    if (mesh.triangles.empty())
        throw GeometryError("triangulation produced no triangles (collinear input?)");
    validate_mesh(mesh);
    return mesh;
}

void validate_mesh(const TriangleMesh& mesh) {
    const int n = static_cast<int>(mesh.vertices.size());
    for (const auto& t : mesh.triangles) {
        for (int idx : t)
            if (idx < 0 || idx >= n)
                throw ValidationError("mesh triangle index out of range");
        const double area2 = std::abs(orient2d(mesh.vertices[static_cast<size_t>(t[0])],
                                               mesh.vertices[static_cast<size_t>(t[1])],
                                               mesh.vertices[static_cast<size_t>(t[2])]));
        if (area2 / 2.0 <= 1e-12) throw ValidationError("degenerate mesh triangle");
    }
}

} // namespace morphforge::lma
