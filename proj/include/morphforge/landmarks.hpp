#ifndef MORPHFORGE_LANDMARKS_HPP
#define MORPHFORGE_LANDMARKS_HPP

#include <array>
#include <filesystem>
#include <string>
#include <vector>

namespace morphforge {

struct Point2 {
    double x = 0.0;
    double y = 0.0;
};

/// Ordered 2-D facial control points driving interpolation and warping.
/// File convention: 68 facial points; the toolkit appends 8 border anchor
/// points (4 corners + 4 edge midpoints) before triangulation.
struct LandmarkSet {
    std::vector<Point2> points;

    size_t size() const { return points.size(); }
    const Point2& operator[](size_t i) const { return points[i]; }
    Point2& operator[](size_t i) { return points[i]; }
};

/// Invariants: >=3 points, no two coincident (tol 1e-9), not all collinear.
/// Throws ValidationError.
void validate_landmarks(const LandmarkSet& lm);

/// Landmark file payload: {"image_id": str, "points": [[x,y],...]}.
struct LandmarkFile {
    std::string image_id;
    LandmarkSet landmarks;
};

LandmarkFile load_landmarks(const std::filesystem::path& path);
void save_landmarks(const LandmarkFile& lf, const std::filesystem::path& path);

/// Returns a copy with the 8 border anchors for a w x h frame appended:
/// corners (0,0),(w-1,0),(0,h-1),(w-1,h-1) then edge midpoints.
LandmarkSet with_border_anchors(const LandmarkSet& lm, int width, int height);

/// Axis-aligned bounding box of a point set as (min, max) corners.
std::pair<Point2, Point2> landmark_bbox(const LandmarkSet& lm);

} // namespace morphforge

#endif
