#include "morphforge/landmarks.hpp"

#include "morphforge/errors.hpp"
#include "morphforge/util.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <limits>

namespace morphforge {

void validate_landmarks(const LandmarkSet& lm) {
    const auto& p = lm.points;
    if (p.size() < 3) throw ValidationError("LandmarkSet needs at least 3 points");
    for (const auto& q : p) {
        if (!std::isfinite(q.x) || !std::isfinite(q.y))
            throw ValidationError("landmark coordinate not finite");
    }
    for (size_t i = 0; i < p.size(); ++i) {
        for (size_t j = i + 1; j < p.size(); ++j) {
            const double dx = p[i].x - p[j].x;
            const double dy = p[i].y - p[j].y;
            if (std::sqrt(dx * dx + dy * dy) <= 1e-9)
                throw ValidationError("coincident landmarks at indices " + std::to_string(i) +
                                      " and " + std::to_string(j));
        }
    }
    // Collinearity: all cross products relative to the first edge vanish.
    bool non_collinear = false;
    const Point2 a = p[0];
    const Point2 b = p[1];
    for (size_t i = 2; i < p.size(); ++i) {
        const double cross = (b.x - a.x) * (p[i].y - a.y) - (b.y - a.y) * (p[i].x - a.x);
        if (std::abs(cross) > 1e-9) {
            non_collinear = true;
            break;
        }
    }
    if (!non_collinear) throw ValidationError("all landmarks collinear");
}

LandmarkFile load_landmarks(const std::filesystem::path& path) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(read_text_file(path));
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError("landmark file " + path.string() + ": " + e.what());
    }
    if (!j.is_object() || !j.contains("image_id") || !j.contains("points"))
        throw ParseError("landmark file " + path.string() + ": expected image_id and points");
    for (const auto& [key, _] : j.items()) {
        if (key != "image_id" && key != "points")
            throw ParseError("landmark file " + path.string() + ": unknown field '" + key + "'");
    }
    LandmarkFile lf;
    lf.image_id = j.at("image_id").get<std::string>();
    for (const auto& entry : j.at("points")) {
        if (!entry.is_array() || entry.size() != 2)
            throw ParseError("landmark file " + path.string() + ": point must be [x,y]");
        lf.landmarks.points.push_back({entry[0].get<double>(), entry[1].get<double>()});
    }
    return lf;
}

void save_landmarks(const LandmarkFile& lf, const std::filesystem::path& path) {
    nlohmann::json j;
    j["image_id"] = lf.image_id;
    auto pts = nlohmann::json::array();
    for (const auto& p : lf.landmarks.points) pts.push_back({p.x, p.y});
    j["points"] = pts;
    atomic_write_file(path, j.dump(2) + "\n");
}

LandmarkSet with_border_anchors(const LandmarkSet& lm, int width, int height) {
    const double w = width - 1;
    const double h = height - 1;
    LandmarkSet out = lm;
    out.points.push_back({0.0, 0.0});
    out.points.push_back({w, 0.0});
    out.points.push_back({0.0, h});
    out.points.push_back({w, h});
    out.points.push_back({w / 2.0, 0.0});
    out.points.push_back({w / 2.0, h});
    out.points.push_back({0.0, h / 2.0});
    out.points.push_back({w, h / 2.0});
    return out;
}

std::pair<Point2, Point2> landmark_bbox(const LandmarkSet& lm) {
    Point2 lo{std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity()};
    Point2 hi{-std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity()};
    for (const auto& p : lm.points) {
        lo.x = std::min(lo.x, p.x);
        lo.y = std::min(lo.y, p.y);
        hi.x = std::max(hi.x, p.x);
        hi.y = std::max(hi.y, p.y);
    }
    return {lo, hi};
}

} // namespace morphforge
