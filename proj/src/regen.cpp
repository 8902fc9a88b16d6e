#include "morphforge/regen.hpp"

#include "morphforge/align.hpp"
#include "morphforge/errors.hpp"
#include "morphforge/morph.hpp"

#include <cmath>

namespace morphforge::regen {

namespace {

Eigen::VectorXd image_to_vector(const FaceImage& img) {
    return Eigen::Map<const Eigen::VectorXd>(img.pixels.data(),
                                             static_cast<Eigen::Index>(img.pixels.size()));
}

FaceImage vector_to_image(const Eigen::VectorXd& v, int size) {
    FaceImage img(size, size);
    Eigen::Map<Eigen::VectorXd>(img.pixels.data(), v.size()) = v;
    return img;
}

void check_backend_sizes(const EncoderBackend& enc, const GeneratorBackend& gen,
                         const PerceptualBackend& phi) {
    if (enc.latent_dim() != gen.latent_dim())
        throw BackendError("encoder latent dim " + std::to_string(enc.latent_dim()) +
                           " != generator latent dim " + std::to_string(gen.latent_dim()));
    if (gen.output_size() != phi.input_size())
        throw BackendError("generator output size " + std::to_string(gen.output_size()) +
                           " != perceptual input size " + std::to_string(phi.input_size()));
}

/// Loss and z-gradient of perceptual_loss(target, gen(z)).
class LatentObjective {
public:
    LatentObjective(const FaceImage& target, const GeneratorBackend& gen,
                    const PerceptualBackend& phi)
        : gen_(gen), phi_(phi), target_features_(phi.features(target)) {}

    double operator()(const Eigen::VectorXd& z, Eigen::VectorXd& grad) const {
        const LatentVector latent{z};
        if (gen_.supports_gradient() && phi_.supports_gradient()) {
            const FaceImage img = gen_.generate(latent);
            const Eigen::VectorXd feats = phi_.features(img);
            const Eigen::VectorXd diff = feats - target_features_;
            const double m = static_cast<double>(diff.size());
            const Eigen::VectorXd feat_cot = (2.0 / m) * diff;
            const Eigen::VectorXd img_cot = phi_.features_vjp(img, feat_cot);
            grad = gen_.generate_vjp(latent, img_cot);
            return diff.squaredNorm() / m;
        }
        // Finite-difference fallback for backends with no gradient support.
        const double loss = value(z);
        grad.resize(z.size());
        const double h = 1e-4;
        for (Eigen::Index i = 0; i < z.size(); ++i) {
            Eigen::VectorXd zp = z, zm = z;
            zp(i) += h;
            zm(i) -= h;
            grad(i) = (value(zp) - value(zm)) / (2.0 * h);
        }
        return loss;
    }

    double value(const Eigen::VectorXd& z) const {
        const Eigen::VectorXd feats = phi_.features(gen_.generate(LatentVector{z}));
        const Eigen::VectorXd diff = feats - target_features_;
        return diff.squaredNorm() / static_cast<double>(diff.size());
    }

private:
    const GeneratorBackend& gen_;
    const PerceptualBackend& phi_;
    Eigen::VectorXd target_features_;
};

} // namespace

double perceptual_loss(const FaceImage& x, const FaceImage& y, const PerceptualBackend& phi) {
    const Eigen::VectorXd fx = phi.features(x);
    const Eigen::VectorXd fy = phi.features(y);
    if (fx.size() != fy.size()) throw BackendError("perceptual feature length mismatch");
    return (fx - fy).squaredNorm() / static_cast<double>(fx.size());
}

FitResult fit_latent(const FaceImage& image, const EncoderBackend& enc,
                     const GeneratorBackend& gen, const PerceptualBackend& phi,
                     const FitOptions& opts) {
    check_backend_sizes(enc, gen, phi);
    const LatentVector z0 = enc.encode(image);
    validate_latent(z0, gen.latent_dim());

    const LatentObjective objective(image, gen, phi);
    const LbfgsResult res = lbfgs_minimize(
        [&](const Eigen::VectorXd& z, Eigen::VectorXd& grad) { return objective(z, grad); },
        z0.values, opts);

    FitResult out;
    out.latent = LatentVector(res.x);
    out.loss = res.loss;
    out.initial_loss = res.trace.front();
    out.trace = res.trace;
    return out;
}

FinetuneResult finetune_encoder(TrainableEncoder& enc, const GeneratorBackend& gen,
                                const PerceptualBackend& phi,
                                std::span<const FaceImage> train_images, const FitOptions& opts) {
    if (train_images.empty())
        throw ValidationError("finetune_encoder: empty training set");
    check_backend_sizes(enc, gen, phi);
    const std::string digest_before = gen.parameter_digest();

    // Objective over encoder parameters: mean perceptual reconstruction loss.
    std::vector<Eigen::VectorXd> target_features;
    target_features.reserve(train_images.size());
    for (const auto& img : train_images) target_features.push_back(phi.features(img));

    const Eigen::VectorXd theta0 = enc.parameters();
    auto objective = [&](const Eigen::VectorXd& theta, Eigen::VectorXd& grad) {
        enc.set_parameters(theta);
        grad = Eigen::VectorXd::Zero(theta.size());
        double total = 0.0;
        const double inv = 1.0 / static_cast<double>(train_images.size());
        for (size_t i = 0; i < train_images.size(); ++i) {
            const FaceImage& x = train_images[i];
            const LatentVector z = enc.encode(x);
            const FaceImage recon = gen.generate(z);
            const Eigen::VectorXd feats = phi.features(recon);
            const Eigen::VectorXd diff = feats - target_features[i];
            const double m = static_cast<double>(diff.size());
            total += inv * diff.squaredNorm() / m;
            const Eigen::VectorXd feat_cot = (2.0 / m) * diff;
            const Eigen::VectorXd img_cot = phi.features_vjp(recon, feat_cot);
            const Eigen::VectorXd z_cot = gen.generate_vjp(z, img_cot);
            grad += inv * enc.parameter_vjp(x, z_cot);
        }
        if (!std::isfinite(total))
            throw OptimizationError("finetune_encoder: non-finite training loss");
        return total;
    };

    const LbfgsResult res = lbfgs_minimize(objective, theta0, opts);
    enc.set_parameters(res.x); // best iterate; never worse than theta0

    if (gen.parameter_digest() != digest_before)
        throw BackendError("finetune_encoder: generator parameters changed");

    FinetuneResult out;
    out.mean_loss_before = res.trace.front();
    out.mean_loss_after = res.loss;
    out.iterations = res.iterations;
    return out;
}

FaceImage regenerate(const FaceImage& image, const EncoderBackend& enc,
                     const GeneratorBackend& gen, const PerceptualBackend& phi,
                     const FitOptions& opts, Refinement refine) {
    if (image.width != enc.input_size() || image.height != enc.input_size())
        throw ImageError("regenerate: image is " + std::to_string(image.width) + "x" +
                         std::to_string(image.height) + " but the encoder expects " +
                         std::to_string(enc.input_size()) + "; resize/align first");
    LatentVector z;
    if (refine == Refinement::FitLatent) {
        z = fit_latent(image, enc, gen, phi, opts).latent;
    } else {
        check_backend_sizes(enc, gen, phi);
        z = enc.encode(image);
    }
    FaceImage out = gen.generate(z);
    for (auto& v : out.pixels) v = std::clamp(v, 0.0, 1.0);
    return out;
}

FaceImage regen_morph(const FaceImage& img_a, const LandmarkSet& la, const FaceImage& img_b,
                      const LandmarkSet& lb, double alpha, const Backends& backends,
                      const FitOptions& opts, Refinement refine) {
    if (!backends.generator || !backends.encoder || !backends.perceptual)
        throw BackendError("regen_morph: missing backend");

    const LandmarkSet la_full = with_border_anchors(la, img_a.width, img_a.height);
    const LandmarkSet lb_full = with_border_anchors(lb, img_b.width, img_b.height);
    const FaceImage morph = lma::morph_pair(img_a, la_full, img_b, lb_full, alpha);

    // Alignment to the encoder frame by fitting the blended face box.
    const LandmarkSet mid = lma::interpolate_landmarks(la, lb, alpha);
    const int in_size = backends.encoder->input_size();
    const LandmarkSet tmpl = bbox_fit_template(mid, in_size, 0.12);
    const AlignResult aligned = align_face(morph, mid, tmpl, in_size);

    return regenerate(aligned.image, *backends.encoder, *backends.generator,
                      *backends.perceptual, opts, refine);
}

FaceImage latent_interpolation_morph(const FaceImage& img_a, const FaceImage& img_b, double alpha,
                                     const Backends& backends, const FitOptions& opts,
                                     Refinement refine) {
    if (!(alpha >= 0.0 && alpha <= 1.0))
        throw ValidationError("alpha must lie in [0,1], got " + std::to_string(alpha));
    if (!backends.generator || !backends.encoder || !backends.perceptual)
        throw BackendError("latent_interpolation_morph: missing backend");
    auto fit_one = [&](const FaceImage& img) {
        if (refine == Refinement::FitLatent)
            return fit_latent(img, *backends.encoder, *backends.generator, *backends.perceptual,
                              opts)
                .latent;
        return backends.encoder->encode(img);
    };
    const LatentVector za = fit_one(img_a);
    const LatentVector zb = fit_one(img_b);
    const LatentVector z{(1.0 - alpha) * za.values + alpha * zb.values};
    FaceImage out = backends.generator->generate(z);
    for (auto& v : out.pixels) v = std::clamp(v, 0.0, 1.0);
    return out;
}

} // namespace morphforge::regen
