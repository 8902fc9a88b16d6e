#include "morphforge/external_backend.hpp"

#include "morphforge/errors.hpp"
#include "morphforge/util.hpp"

#include <nlohmann/json.hpp>

#include <cstdlib>
#include <sstream>

namespace morphforge::regen {

namespace {

std::string shell_quote(const std::string& s) {
    std::string out = "'";
    for (char c : s) {
        if (c == '\'') out += "'\\''";
        else out += c;
    }
    out += "'";
    return out;
}

} // namespace

ExternalBackend::ExternalBackend(ExternalBackendSpec spec) : spec_(std::move(spec)) {
    if (spec_.command.empty()) throw ValidationError("external backend needs a command");
    if (spec_.work_dir.empty()) {
        spec_.work_dir = std::filesystem::temp_directory_path() /
                         ("morphforge-backend-" + std::to_string(fnv1a64(this, sizeof(void*))));
    }
    std::filesystem::create_directories(spec_.work_dir);
}

Tensor ExternalBackend::call(const std::string& op, const Tensor& request) const {
    const uint64_t id = request_counter_++;
    const auto base = spec_.work_dir / (op + "-" + std::to_string(id));
    const auto header_path = base.string() + ".json";
    const auto request_path = base.string() + ".bin";
    const auto response_path = base.string() + ".out.bin";

    nlohmann::json header;
    header["op"] = op;
    header["id"] = std::to_string(id);
    atomic_write_file(header_path, header.dump() + "\n");
    write_tensor(request, request_path);

    std::ostringstream cmd;
    for (const auto& part : spec_.command) cmd << shell_quote(part) << " ";
    cmd << shell_quote(header_path) << " " << shell_quote(request_path) << " "
        << shell_quote(response_path);
    const int rc = std::system(cmd.str().c_str());
    if (rc != 0)
        throw BackendError("external backend command failed (exit " + std::to_string(rc) +
                           "): " + cmd.str());
    if (!std::filesystem::exists(response_path))
        throw BackendError("external backend wrote no response for op '" + op + "'");
    Tensor response = read_tensor(response_path);

    std::error_code ec;
    std::filesystem::remove(header_path, ec);
    std::filesystem::remove(request_path, ec);
    std::filesystem::remove(response_path, ec);
    return response;
}

FaceImage ExternalBackend::generate(const LatentVector& z) const {
    validate_latent(z, spec_.latent_dim);
    Tensor req;
    req.dims = {static_cast<uint32_t>(spec_.latent_dim)};
    req.data.resize(static_cast<size_t>(spec_.latent_dim));
    for (Eigen::Index i = 0; i < z.dim(); ++i)
        req.data[static_cast<size_t>(i)] = static_cast<float>(z.values(i));
    const Tensor res = call("generate", req);
    if (res.dims.size() != 3 || res.dims[2] != 3 ||
        res.dims[0] != static_cast<uint32_t>(spec_.image_size) ||
        res.dims[1] != static_cast<uint32_t>(spec_.image_size))
        throw BackendError("generate: backend returned unexpected tensor shape");
    FaceImage img(spec_.image_size, spec_.image_size);
    for (size_t i = 0; i < res.data.size(); ++i)
        img.pixels[i] = std::clamp(static_cast<double>(res.data[i]), 0.0, 1.0);
    return img;
}

LatentVector ExternalBackend::encode(const FaceImage& image) const {
    if (image.width != spec_.image_size || image.height != spec_.image_size)
        throw BackendError("encode: image size mismatch");
    Tensor req;
    req.dims = {static_cast<uint32_t>(image.height), static_cast<uint32_t>(image.width), 3};
    req.data.resize(image.pixels.size());
    for (size_t i = 0; i < image.pixels.size(); ++i)
        req.data[i] = static_cast<float>(image.pixels[i]);
    const Tensor res = call("encode", req);
    if (res.dims.size() != 1 || res.dims[0] != static_cast<uint32_t>(spec_.latent_dim))
        throw BackendError("encode: backend returned unexpected tensor shape");
    Eigen::VectorXd z(spec_.latent_dim);
    for (size_t i = 0; i < res.data.size(); ++i)
        z(static_cast<Eigen::Index>(i)) = static_cast<double>(res.data[i]);
    return LatentVector(z);
}

Eigen::VectorXd ExternalBackend::features(const FaceImage& image) const {
    if (image.width != spec_.image_size || image.height != spec_.image_size)
        throw BackendError("features: image size mismatch");
    Tensor req;
    req.dims = {static_cast<uint32_t>(image.height), static_cast<uint32_t>(image.width), 3};
    req.data.resize(image.pixels.size());
    for (size_t i = 0; i < image.pixels.size(); ++i)
        req.data[i] = static_cast<float>(image.pixels[i]);
    const Tensor res = call("features", req);
    if (res.dims.size() != 1 || res.dims[0] != static_cast<uint32_t>(spec_.feature_length))
        throw BackendError("features: backend returned unexpected tensor shape");
    Eigen::VectorXd f(spec_.feature_length);
    for (size_t i = 0; i < res.data.size(); ++i)
        f(static_cast<Eigen::Index>(i)) = static_cast<double>(res.data[i]);
    return f;
}

std::string ExternalBackend::parameter_digest() const {
    // The process boundary hides the weights; fingerprint the invocation.
    std::string joined;
    for (const auto& part : spec_.command) joined += part + "\x1f";
    joined += std::to_string(spec_.image_size) + "/" + std::to_string(spec_.latent_dim);
    return digest_string(fnv1a64(joined.data(), joined.size()));
}

Backends ExternalBackend::as_backends(const ExternalBackendSpec& spec) {
    auto shared = std::make_shared<ExternalBackend>(spec);
    Backends b;
    b.generator = shared;
    b.encoder = shared;
    b.perceptual = shared;
    return b;
}

} // namespace morphforge::regen
