#ifndef MORPHFORGE_BACKENDS_HPP
#define MORPHFORGE_BACKENDS_HPP

#include "morphforge/image.hpp"

#include <Eigen/Core>

#include <memory>
#include <string>

namespace morphforge::regen {

/// Generator input representation.
struct LatentVector {
    Eigen::VectorXd values;

    LatentVector() = default;
    explicit LatentVector(Eigen::VectorXd v) : values(std::move(v)) {}
    Eigen::Index dim() const { return values.size(); }
};

/// Throws ValidationError unless the latent is finite and of expected_dim
/// (expected_dim < 0 skips the length check).
void validate_latent(const LatentVector& z, Eigen::Index expected_dim);

/// Decodes latents to images. Deterministic; square output of fixed size;
/// pixels in [0,1].
class GeneratorBackend {
public:
    virtual ~GeneratorBackend() = default;
    virtual FaceImage generate(const LatentVector& z) const = 0;
    virtual int latent_dim() const = 0;
    virtual int output_size() const = 0;
    /// Opaque fingerprint of the weights; must change iff parameters change.
    virtual std::string parameter_digest() const = 0;

    /// Whether generate_vjp is available (otherwise callers fall back to
    /// finite differences).
    virtual bool supports_gradient() const { return false; }
    /// d(image . cotangent)/dz for the analytic backends.
    virtual Eigen::VectorXd generate_vjp(const LatentVector& z,
                                         const Eigen::VectorXd& image_cotangent) const;
};

/// Encodes images to latents. Deterministic given weights.
class EncoderBackend {
public:
    virtual ~EncoderBackend() = default;
    virtual LatentVector encode(const FaceImage& image) const = 0;
    virtual int latent_dim() const = 0;
    virtual int input_size() const = 0;
};

/// Encoder whose parameters can be fine-tuned.
class TrainableEncoder : public EncoderBackend {
public:
    virtual Eigen::VectorXd parameters() const = 0;
    virtual void set_parameters(const Eigen::VectorXd& theta) = 0;
    /// d(z . z_cotangent)/dtheta at the current parameters.
    virtual Eigen::VectorXd parameter_vjp(const FaceImage& image,
                                          const Eigen::VectorXd& z_cotangent) const = 0;
};

/// Maps images to feature embeddings for the perceptual loss.
class PerceptualBackend {
public:
    virtual ~PerceptualBackend() = default;
    virtual Eigen::VectorXd features(const FaceImage& image) const = 0;
    virtual int input_size() const = 0;
    virtual Eigen::Index feature_length() const = 0;

    virtual bool supports_gradient() const { return false; }
    /// d(features . cotangent)/d(image pixels), flattened like FaceImage.
    virtual Eigen::VectorXd features_vjp(const FaceImage& image,
                                         const Eigen::VectorXd& feature_cotangent) const;
};

/// The three model backends a regeneration run needs.
struct Backends {
    std::shared_ptr<const GeneratorBackend> generator;
    std::shared_ptr<EncoderBackend> encoder;
    std::shared_ptr<const PerceptualBackend> perceptual;
};

} // namespace morphforge::regen

#endif
