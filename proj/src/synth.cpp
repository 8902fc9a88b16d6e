#include "morphforge/synth.hpp"

#include "morphforge/errors.hpp"
#include "morphforge/png_io.hpp"
#include "morphforge/rng.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace morphforge::synth {

namespace {

double smoothstep(double edge0, double edge1, double x) {
    const double t = std::clamp((x - edge0) / (edge1 - edge0), 0.0, 1.0);
    return t * t * (3.0 - 2.0 * t);
}

struct Canvas {
    FaceImage img;
    double px; // pixels per unit

    explicit Canvas(int size) : img(size, size), px(size) {}

    /// Soft-edged filled ellipse; coordinates/radii in unit space.
    void ellipse(double cx, double cy, double rx, double ry, const std::array<double, 3>& color,
                 double alpha = 1.0) {
        const double soft = 1.0 / px; // ~1 pixel of antialiasing
        const int x0 = std::max(0, static_cast<int>((cx - rx - 2.0 * soft) * px));
        const int x1 = std::min(img.width - 1, static_cast<int>((cx + rx + 2.0 * soft) * px) + 1);
        const int y0 = std::max(0, static_cast<int>((cy - ry - 2.0 * soft) * px));
        const int y1 = std::min(img.height - 1, static_cast<int>((cy + ry + 2.0 * soft) * px) + 1);
        for (int y = y0; y <= y1; ++y) {
            for (int x = x0; x <= x1; ++x) {
                const double ux = (x + 0.5) / px;
                const double uy = (y + 0.5) / px;
                const double dx = (ux - cx) / rx;
                const double dy = (uy - cy) / ry;
                const double d = std::sqrt(dx * dx + dy * dy);
                const double a = alpha * (1.0 - smoothstep(1.0 - soft / rx, 1.0 + soft / rx, d));
                if (a <= 0.0) continue;
                for (int c = 0; c < 3; ++c)
                    img.at(x, y, c) =
                        std::clamp(img.at(x, y, c) * (1.0 - a) + color[static_cast<size_t>(c)] * a,
                                   0.0, 1.0);
            }
        }
    }

    void fill(const std::array<double, 3>& color) {
        for (int y = 0; y < img.height; ++y)
            for (int x = 0; x < img.width; ++x)
                for (int c = 0; c < 3; ++c) img.at(x, y, c) = color[static_cast<size_t>(c)];
    }
};

std::array<double, 3> scale_color(const std::array<double, 3>& c, double f) {
    return {std::clamp(c[0] * f, 0.0, 1.0), std::clamp(c[1] * f, 0.0, 1.0),
            std::clamp(c[2] * f, 0.0, 1.0)};
}

/// Geometry after jitter: shift/scale about the frame center.
struct Placed {
    double shift_x, shift_y, scale;
    double x(double ux) const { return 0.5 + (ux - 0.5) * scale + shift_x; }
    double y(double uy) const { return 0.5 + (uy - 0.5) * scale + shift_y; }
    double r(double ur) const { return ur * scale; }
};

} // namespace

FaceSpriteParams identity_params(uint64_t identity_seed) {
    Rng rng(identity_seed * 0x9e3779b97f4a7c15ull + 0x51ull);
    FaceSpriteParams p;
    p.background = {0.65 + 0.3 * rng.next_unit(), 0.65 + 0.3 * rng.next_unit(),
                    0.65 + 0.3 * rng.next_unit()};
    p.hair = {0.05 + 0.5 * rng.next_unit(), 0.05 + 0.4 * rng.next_unit(),
              0.05 + 0.3 * rng.next_unit()};
    const double tone = 0.45 + 0.45 * rng.next_unit();
    p.skin = {tone, tone * (0.78 + 0.1 * rng.next_unit()), tone * (0.6 + 0.15 * rng.next_unit())};
    p.iris = {0.1 + 0.5 * rng.next_unit(), 0.2 + 0.5 * rng.next_unit(),
              0.3 + 0.6 * rng.next_unit()};
    p.lips = {0.5 + 0.35 * rng.next_unit(), 0.15 + 0.25 * rng.next_unit(),
              0.2 + 0.25 * rng.next_unit()};
    p.face_rx = 0.26 + 0.07 * rng.next_unit();
    p.face_ry = 0.33 + 0.08 * rng.next_unit();
    p.eye_dx = 0.10 + 0.05 * rng.next_unit();
    p.eye_y = 0.40 + 0.05 * rng.next_unit();
    p.eye_rx = 0.045 + 0.02 * rng.next_unit();
    p.eye_ry = 0.025 + 0.015 * rng.next_unit();
    p.brow_dy = 0.05 + 0.025 * rng.next_unit();
    p.brow_h = 0.008 + 0.008 * rng.next_unit();
    p.nose_w = 0.025 + 0.02 * rng.next_unit();
    p.nose_len = 0.12 + 0.07 * rng.next_unit();
    p.mouth_y = 0.66 + 0.06 * rng.next_unit();
    p.mouth_w = 0.07 + 0.05 * rng.next_unit();
    p.mouth_h = 0.02 + 0.02 * rng.next_unit();
    return p;
}

FaceSpriteParams jitter_params(const FaceSpriteParams& base, uint64_t image_seed, bool probe) {
    Rng rng(image_seed * 0xbf58476d1ce4e5b9ull + 0x97ull);
    FaceSpriteParams p = base;
    const double amp = probe ? 1.0 : 0.35;
    p.shift_x = amp * 0.02 * (2.0 * rng.next_unit() - 1.0);
    p.shift_y = amp * 0.02 * (2.0 * rng.next_unit() - 1.0);
    p.scale = 1.0 + amp * 0.04 * (2.0 * rng.next_unit() - 1.0);
    p.brightness = 1.0 + amp * 0.12 * (2.0 * rng.next_unit() - 1.0);
    p.mouth_h = base.mouth_h * (1.0 + amp * 0.25 * (2.0 * rng.next_unit() - 1.0));
    return p;
}

FaceImage render_face_sprite(const FaceSpriteParams& p, int size) {
    if (size < 8) throw ValidationError("sprite size must be >= 8");
    Canvas cv(size);
    const Placed t{p.shift_x, p.shift_y, p.scale};
    const double b = p.brightness;

    cv.fill(scale_color(p.background, b));
    // hair halo, face, then features
    cv.ellipse(t.x(0.5), t.y(0.47), t.r(p.face_rx * 1.22), t.r(p.face_ry * 1.18),
               scale_color(p.hair, b));
    cv.ellipse(t.x(0.5), t.y(0.52), t.r(p.face_rx), t.r(p.face_ry), scale_color(p.skin, b));

    for (int side : {-1, 1}) {
        const double ex = 0.5 + side * p.eye_dx;
        cv.ellipse(t.x(ex), t.y(p.eye_y), t.r(p.eye_rx), t.r(p.eye_ry),
                   scale_color({0.97, 0.97, 0.97}, b));
        cv.ellipse(t.x(ex), t.y(p.eye_y), t.r(p.eye_ry * 0.8), t.r(p.eye_ry * 0.8),
                   scale_color(p.iris, b));
        cv.ellipse(t.x(ex), t.y(p.eye_y), t.r(p.eye_ry * 0.35), t.r(p.eye_ry * 0.35),
                   scale_color({0.05, 0.05, 0.05}, b));
        cv.ellipse(t.x(ex), t.y(p.eye_y - p.brow_dy), t.r(p.eye_rx * 1.15), t.r(p.brow_h),
                   scale_color(p.hair, b * 0.8));
    }

    const double nose_top = p.eye_y + 0.02;
    cv.ellipse(t.x(0.5), t.y(nose_top + p.nose_len / 2.0), t.r(p.nose_w), t.r(p.nose_len / 2.0),
               scale_color(p.skin, b * 0.88));
    for (int side : {-1, 1})
        cv.ellipse(t.x(0.5 + side * p.nose_w * 0.65), t.y(nose_top + p.nose_len),
                   t.r(p.nose_w * 0.3), t.r(p.nose_w * 0.22), scale_color(p.skin, b * 0.6));

    cv.ellipse(t.x(0.5), t.y(p.mouth_y), t.r(p.mouth_w), t.r(p.mouth_h), scale_color(p.lips, b));
    return cv.img;
}

LandmarkSet sprite_landmarks(const FaceSpriteParams& p, int size) {
    const Placed t{p.shift_x, p.shift_y, p.scale};
    const double s = size;
    LandmarkSet lm;
    auto add = [&](double ux, double uy) {
        lm.points.push_back({t.x(ux) * (s - 1), t.y(uy) * (s - 1)});
    };

    // 17 jaw points along the lower face ellipse (left ear to right ear).
    for (int i = 0; i < 17; ++i) {
        const double a = std::numbers::pi * (1.0 - static_cast<double>(i) / 16.0); // pi..0
        add(0.5 + p.face_rx * std::cos(a), 0.52 + p.face_ry * std::sin(a));
    }
    // 2 x 5 brow points.
    for (int side : {-1, 1}) {
        const double ex = 0.5 + side * p.eye_dx;
        for (int i = 0; i < 5; ++i) {
            const double f = static_cast<double>(i) / 4.0 - 0.5;
            add(ex + f * 2.0 * p.eye_rx * 1.15, p.eye_y - p.brow_dy - p.brow_h);
        }
    }
    // 4 nose bridge + 5 nose bottom.
    const double nose_top = p.eye_y + 0.02;
    for (int i = 0; i < 4; ++i)
        add(0.5, nose_top + p.nose_len * static_cast<double>(i) / 4.0);
    for (int i = 0; i < 5; ++i) {
        const double f = static_cast<double>(i) / 4.0 - 0.5;
        add(0.5 + f * 2.0 * p.nose_w, nose_top + p.nose_len);
    }
    // 2 x 6 eye points (hexagon on the eye ellipse).
    for (int side : {-1, 1}) {
        const double ex = 0.5 + side * p.eye_dx;
        add(ex - p.eye_rx, p.eye_y);
        add(ex - p.eye_rx * 0.4, p.eye_y - p.eye_ry);
        add(ex + p.eye_rx * 0.4, p.eye_y - p.eye_ry);
        add(ex + p.eye_rx, p.eye_y);
        add(ex + p.eye_rx * 0.4, p.eye_y + p.eye_ry);
        add(ex - p.eye_rx * 0.4, p.eye_y + p.eye_ry);
    }
    // 12 outer + 8 inner mouth points on the lip ellipse.
    for (int i = 0; i < 12; ++i) {
        const double a = 2.0 * std::numbers::pi * static_cast<double>(i) / 12.0;
        add(0.5 + p.mouth_w * std::cos(a), p.mouth_y + p.mouth_h * std::sin(a));
    }
    for (int i = 0; i < 8; ++i) {
        const double a = 2.0 * std::numbers::pi * static_cast<double>(i) / 8.0;
        add(0.5 + p.mouth_w * 0.6 * std::cos(a), p.mouth_y + p.mouth_h * 0.45 * std::sin(a));
    }
    return lm;
}

std::vector<FaceImage> sprite_training_set(int size, int count, uint64_t seed) {
    std::vector<FaceImage> out;
    out.reserve(static_cast<size_t>(count));
    Rng rng(seed);
    for (int i = 0; i < count; ++i) {
        FaceSpriteParams p = identity_params(rng.next_u64());
        p = jitter_params(p, rng.next_u64(), i % 2 == 0);
        out.push_back(render_face_sprite(p, size));
    }
    return out;
}

protocol::DatasetManifest generate_dataset(const std::filesystem::path& out_dir,
                                           const DatasetOptions& opts) {
    if (opts.identities < 1) throw ValidationError("need at least one identity");
    if (opts.references_per_identity < 1 || opts.probes_per_identity < 1)
        throw ValidationError("each identity needs references and probes");

    std::filesystem::create_directories(out_dir / "images");
    std::filesystem::create_directories(out_dir / "landmarks");

    protocol::DatasetManifest manifest;
    Rng rng(opts.seed);
    for (int i = 0; i < opts.identities; ++i) {
        const uint64_t id_seed = rng.next_u64();
        const FaceSpriteParams base = identity_params(id_seed);

        protocol::IdentityRecord rec;
        char buf[32];
        std::snprintf(buf, sizeof(buf), "id%03d", i);
        rec.id = buf;

        auto emit = [&](int k, bool probe) {
            const std::string img_id =
                rec.id + (probe ? "_p" : "_r") + std::to_string(k);
            const FaceSpriteParams p = jitter_params(base, rng.next_u64(), probe);
            const FaceImage img = render_face_sprite(p, opts.image_size);
            save_image(img, out_dir / "images" / (img_id + ".png"));
            LandmarkFile lf;
            lf.image_id = img_id;
            lf.landmarks = sprite_landmarks(p, opts.image_size);
            save_landmarks(lf, out_dir / "landmarks" / (img_id + ".json"));
            protocol::ImageRecord ir;
            ir.id = img_id;
            ir.path = "images/" + img_id + ".png";
            ir.role = probe ? protocol::ImageRole::Probe : protocol::ImageRole::Reference;
            rec.images.push_back(std::move(ir));
        };
        for (int k = 0; k < opts.references_per_identity; ++k) emit(k, false);
        for (int k = 0; k < opts.probes_per_identity; ++k) emit(k, true);
        manifest.identities.push_back(std::move(rec));
    }
    protocol::save_manifest(manifest, out_dir / "manifest.json");
    return manifest;
}

} // namespace morphforge::synth
