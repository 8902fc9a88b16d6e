#ifndef MORPHFORGE_ALIGN_HPP
#define MORPHFORGE_ALIGN_HPP

#include "morphforge/image.hpp"
#include "morphforge/landmarks.hpp"

namespace morphforge {

/// Non-reflective 2-D similarity: p -> [a -b; b a] p + (tx, ty).
struct SimilarityTransform {
    double a = 1.0;
    double b = 0.0;
    double tx = 0.0;
    double ty = 0.0;

    Point2 apply(const Point2& p) const {
        return {a * p.x - b * p.y + tx, b * p.x + a * p.y + ty};
    }
    Point2 apply_inverse(const Point2& q) const {
        const double det = a * a + b * b;
        const double x = q.x - tx;
        const double y = q.y - ty;
        return {(a * x + b * y) / det, (-b * x + a * y) / det};
    }
    double scale() const;

    static SimilarityTransform identity() { return {}; }
};

/// Least-squares similarity (rotation + uniform scale + translation)
/// mapping src points toward dst points. Needs >= 2 points per side.
/// Throws GeometryError when src points are (near-)coincident.
SimilarityTransform fit_similarity(const LandmarkSet& src, const LandmarkSet& dst);

struct AlignResult {
    FaceImage image;
    LandmarkSet landmarks; // input landmarks mapped through the fitted transform
    SimilarityTransform transform;
};

/// Fits the similarity mapping `landmarks` toward `template_landmarks`,
/// resamples the image bilinearly into an out_size x out_size frame and
/// returns the warped image plus transformed landmarks. Destination pixels
/// falling outside the source are filled with 0.
AlignResult align_face(const FaceImage& image, const LandmarkSet& landmarks,
                       const LandmarkSet& template_landmarks, int out_size);

/// Template that maps a landmark bounding box into an out_size frame with
/// the given margin fraction on every side (used to align morphs for the
/// regeneration encoder when no canonical template is supplied).
LandmarkSet bbox_fit_template(const LandmarkSet& lm, int out_size, double margin_fraction);

} // namespace morphforge

#endif
