#ifndef MORPHFORGE_REGEN_HPP
#define MORPHFORGE_REGEN_HPP

#include "morphforge/backends.hpp"
#include "morphforge/landmarks.hpp"
#include "morphforge/lbfgs.hpp"

#include <span>

namespace morphforge::regen {

/// Mean squared error between the feature embeddings of two images.
double perceptual_loss(const FaceImage& x, const FaceImage& y, const PerceptualBackend& phi);

struct FitResult {
    LatentVector latent;
    double loss = 0.0;         // loss at the returned latent
    double initial_loss = 0.0; // loss at the encoder initialization
    std::vector<double> trace;
};

/// Fits a latent so the generator reproduces `image`: starts from
/// enc(image) and minimizes perceptual_loss(image, gen(z)) with
/// lbfgs_minimize. Gradients come from the backends' differentiation
/// capability; backends without one fall back to central finite
/// differences. The returned loss never exceeds the initial loss.
FitResult fit_latent(const FaceImage& image, const EncoderBackend& enc,
                     const GeneratorBackend& gen, const PerceptualBackend& phi,
                     const FitOptions& opts);

struct FinetuneResult {
    double mean_loss_before = 0.0;
    double mean_loss_after = 0.0;
    int iterations = 0;
};

/// Fine-tunes encoder parameters to minimize the mean reconstruction
/// perceptual loss over the training images, generator frozen. The
/// encoder is updated in place and never ends up worse than it started
/// (best-iterate semantics).
FinetuneResult finetune_encoder(TrainableEncoder& enc, const GeneratorBackend& gen,
                                const PerceptualBackend& phi,
                                std::span<const FaceImage> train_images, const FitOptions& opts);

/// Per-image refinement switch for the regeneration entry points.
enum class Refinement { FitLatent, EncodeOnly };

/// gen(fit_latent(image)). The image must already be at the encoder
/// input size; throws ImageError otherwise.
FaceImage regenerate(const FaceImage& image, const EncoderBackend& enc,
                     const GeneratorBackend& gen, const PerceptualBackend& phi,
                     const FitOptions& opts, Refinement refine = Refinement::FitLatent);

/// Full regeneration morph: landmark morph -> alignment to the encoder
/// frame -> encode/fit -> generate, with no latent manipulation between
/// encode and generate. Landmarks are the facial points only; border
/// anchors are appended internally for the warp.
FaceImage regen_morph(const FaceImage& img_a, const LandmarkSet& la, const FaceImage& img_b,
                      const LandmarkSet& lb, double alpha, const Backends& backends,
                      const FitOptions& opts, Refinement refine = Refinement::FitLatent);

/// Comparison baseline: encode both sources, interpolate the two latents,
/// generate. This is the latent-manipulation pipeline the regeneration
/// method deliberately avoids.
FaceImage latent_interpolation_morph(const FaceImage& img_a, const FaceImage& img_b, double alpha,
                                     const Backends& backends, const FitOptions& opts,
                                     Refinement refine = Refinement::FitLatent);

} // namespace morphforge::regen

#endif
