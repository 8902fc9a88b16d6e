#ifndef MORPHFORGE_TOY_BACKENDS_HPP
#define MORPHFORGE_TOY_BACKENDS_HPP

#include "morphforge/backends.hpp"

#include <Eigen/Core>

#include <cstdint>

namespace morphforge::regen {

/// Desk-scale backend family: a two-affine-layer decoder with tanh hidden
/// units and a logistic output squash, its mirrored encoder, and a
/// fixed-seed random convolution stack for perceptual features. The
/// encoder/decoder pair is fitted as an autoencoder on synthetic face
/// sprites at construction, so everything is deterministic given the
/// config and needs no external weights.
struct ToyBackendConfig {
    int image_size = 64;
    int latent_dim = 32;
    int hidden_dim = 48;
    int sprite_count = 24;   // autoencoder training images
    int train_steps = 50;    // Adam steps; 0 keeps the seeded init
    uint64_t seed = 7;
};

class ToyGenerator final : public GeneratorBackend {
public:
    ToyGenerator(const ToyBackendConfig& cfg, uint64_t seed_salt);

    FaceImage generate(const LatentVector& z) const override;
    int latent_dim() const override { return cfg_.latent_dim; }
    int output_size() const override { return cfg_.image_size; }
    std::string parameter_digest() const override;
    bool supports_gradient() const override { return true; }
    Eigen::VectorXd generate_vjp(const LatentVector& z,
                                 const Eigen::VectorXd& image_cotangent) const override;

    // Flat parameter access for the autoencoder fit.
    Eigen::VectorXd parameters() const;
    void set_parameters(const Eigen::VectorXd& theta);

    // Forward pass on a raw latent, plus the pieces backprop needs.
    struct Forward {
        Eigen::VectorXd hidden;  // tanh activations
        Eigen::VectorXd pixels;  // sigmoid outputs
    };
    Forward forward(const Eigen::VectorXd& z) const;
    /// Gradients w.r.t. (parameters, z) of pixels . cotangent.
    void backward(const Eigen::VectorXd& z, const Forward& f, const Eigen::VectorXd& pixel_cot,
                  Eigen::VectorXd* param_grad, Eigen::VectorXd* z_grad) const;

private:
    ToyBackendConfig cfg_;
    Eigen::MatrixXd w1_; // hidden x latent
    Eigen::VectorXd b1_;
    Eigen::MatrixXd w2_; // pixels x hidden
    Eigen::VectorXd b2_;
};

class ToyEncoder final : public TrainableEncoder {
public:
    ToyEncoder(const ToyBackendConfig& cfg, uint64_t seed_salt);

    LatentVector encode(const FaceImage& image) const override;
    int latent_dim() const override { return cfg_.latent_dim; }
    int input_size() const override { return cfg_.image_size; }

    Eigen::VectorXd parameters() const override;
    void set_parameters(const Eigen::VectorXd& theta) override;
    Eigen::VectorXd parameter_vjp(const FaceImage& image,
                                  const Eigen::VectorXd& z_cotangent) const override;

    struct Forward {
        Eigen::VectorXd hidden;
        Eigen::VectorXd latent;
    };
    Forward forward(const Eigen::VectorXd& pixels) const;
    void backward(const Eigen::VectorXd& pixels, const Forward& f, const Eigen::VectorXd& z_cot,
                  Eigen::VectorXd* param_grad, Eigen::VectorXd* pixel_grad) const;

private:
    ToyBackendConfig cfg_;
    Eigen::MatrixXd v1_; // hidden x pixels
    Eigen::VectorXd c1_;
    Eigen::MatrixXd v2_; // latent x hidden
    Eigen::VectorXd c2_;
};

/// Three stride-2 3x3 convolution layers with tanh units and fixed random
/// weights. Differentiable and deterministic.
class ToyPerceptual final : public PerceptualBackend {
public:
    ToyPerceptual(int image_size, uint64_t seed);

    Eigen::VectorXd features(const FaceImage& image) const override;
    int input_size() const override { return size_; }
    Eigen::Index feature_length() const override;
    bool supports_gradient() const override { return true; }
    Eigen::VectorXd features_vjp(const FaceImage& image,
                                 const Eigen::VectorXd& feature_cotangent) const override;

private:
    struct Layer {
        int in_ch, out_ch, in_size, out_size;
        std::vector<double> weights; // [out][in][ky][kx]
        std::vector<double> bias;
    };
    std::vector<std::vector<double>> forward_planes(const FaceImage& image) const;

    int size_;
    std::vector<Layer> layers_;
};

/// Builds the shipped toy backend trio (autoencoder fitted on sprites).
Backends make_toy_backends(const ToyBackendConfig& cfg = {});

} // namespace morphforge::regen

#endif
