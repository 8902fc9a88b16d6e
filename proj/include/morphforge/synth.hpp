#ifndef MORPHFORGE_SYNTH_HPP
#define MORPHFORGE_SYNTH_HPP

#include "morphforge/image.hpp"
#include "morphforge/landmarks.hpp"
#include "morphforge/protocol.hpp"

#include <cstdint>
#include <filesystem>
#include <vector>

namespace morphforge::synth {

/// Parametric face sprite: desk-scale stand-in for photographic data.
/// All geometry is in a unit frame [0,1]^2 and scaled at render time.
struct FaceSpriteParams {
    // colors (RGB in [0,1])
    std::array<double, 3> background{0.8, 0.8, 0.85};
    std::array<double, 3> hair{0.2, 0.15, 0.1};
    std::array<double, 3> skin{0.85, 0.7, 0.6};
    std::array<double, 3> iris{0.3, 0.5, 0.7};
    std::array<double, 3> lips{0.7, 0.3, 0.3};
    // geometry (unit frame)
    double face_rx = 0.30, face_ry = 0.38;
    double eye_dx = 0.13;       // eye offset from center
    double eye_y = 0.42;        // eye row
    double eye_rx = 0.055, eye_ry = 0.035;
    double brow_dy = 0.065;     // brow height above eye center
    double brow_h = 0.012;
    double nose_w = 0.035, nose_len = 0.16;
    double mouth_y = 0.70, mouth_w = 0.10, mouth_h = 0.035;
    // per-image jitter (applied to geometry and brightness)
    double shift_x = 0.0, shift_y = 0.0;
    double scale = 1.0;
    double brightness = 1.0;
};

/// Identity-determined parameters (stable across that identity's images).
FaceSpriteParams identity_params(uint64_t identity_seed);

/// Adds per-image jitter: small shift/scale/brightness/expression changes.
/// Probe images jitter more than reference images.
FaceSpriteParams jitter_params(const FaceSpriteParams& base, uint64_t image_seed, bool probe);

FaceImage render_face_sprite(const FaceSpriteParams& p, int size);

/// 68-point landmark layout matching the sprite geometry
/// (17 jaw, 2x5 brows, 9 nose, 2x6 eyes, 20 mouth).
LandmarkSet sprite_landmarks(const FaceSpriteParams& p, int size);

/// Sprite set used to fit the desk-scale autoencoder backends.
std::vector<FaceImage> sprite_training_set(int size, int count, uint64_t seed);

struct DatasetOptions {
    int identities = 32;
    int references_per_identity = 2;
    int probes_per_identity = 3;
    int image_size = 64;
    uint64_t seed = 1;
};

/// Writes images/, landmarks/ and manifest.json under out_dir.
/// Returns the manifest (paths relative to out_dir).
protocol::DatasetManifest generate_dataset(const std::filesystem::path& out_dir,
                                           const DatasetOptions& opts);

} // namespace morphforge::synth

#endif
