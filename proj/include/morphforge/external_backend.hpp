#ifndef MORPHFORGE_EXTERNAL_BACKEND_HPP
#define MORPHFORGE_EXTERNAL_BACKEND_HPP

#include "morphforge/backends.hpp"
#include "morphforge/tensor_io.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace morphforge::regen {

/// Declared shapes of an out-of-process model backend.
struct ExternalBackendSpec {
    std::vector<std::string> command; // argv prefix of the backend process
    int image_size = 1024;
    int latent_dim = 512;
    int feature_length = 4096;
    std::filesystem::path work_dir;   // defaults to a temp directory
};

/// File-protocol client for heavyweight models hosted in another process.
/// Each call writes a JSON header {"op":..., "id":...} plus a request
/// tensor, invokes `command + [header, request, response]`, and reads the
/// response tensor. Images travel as [H,W,3] tensors, latents and
/// features as rank-1 tensors. No gradient op exists, so latent fits fall
/// back to finite differences.
class ExternalBackend final : public GeneratorBackend,
                              public EncoderBackend,
                              public PerceptualBackend {
public:
    explicit ExternalBackend(ExternalBackendSpec spec);

    // GeneratorBackend
    FaceImage generate(const LatentVector& z) const override;
    int output_size() const override { return spec_.image_size; }
    std::string parameter_digest() const override;

    // EncoderBackend
    LatentVector encode(const FaceImage& image) const override;
    int input_size() const override { return spec_.image_size; }
    int latent_dim() const override { return spec_.latent_dim; }

    // PerceptualBackend
    Eigen::VectorXd features(const FaceImage& image) const override;
    Eigen::Index feature_length() const override { return spec_.feature_length; }

    /// Bundles this backend into the three pipeline roles.
    static Backends as_backends(const ExternalBackendSpec& spec);

private:
    Tensor call(const std::string& op, const Tensor& request) const;

    ExternalBackendSpec spec_;
    mutable uint64_t request_counter_ = 0;
};

} // namespace morphforge::regen

#endif
