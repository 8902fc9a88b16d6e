#include "morphforge/backends.hpp"

#include "morphforge/errors.hpp"

namespace morphforge::regen {

void validate_latent(const LatentVector& z, Eigen::Index expected_dim) {
    if (!z.values.allFinite()) throw ValidationError("latent vector has non-finite values");
    if (expected_dim >= 0 && z.dim() != expected_dim)
        throw ValidationError("latent vector length " + std::to_string(z.dim()) +
                              " != expected " + std::to_string(expected_dim));
}

Eigen::VectorXd GeneratorBackend::generate_vjp(const LatentVector&, const Eigen::VectorXd&) const {
    throw BackendError("generator backend does not provide gradients");
}

Eigen::VectorXd PerceptualBackend::features_vjp(const FaceImage&, const Eigen::VectorXd&) const {
    throw BackendError("perceptual backend does not provide gradients");
}

} // namespace morphforge::regen
