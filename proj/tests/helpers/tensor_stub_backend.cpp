// Minimal out-of-process model backend for exercising the tensor-file
// protocol in tests. Deterministic, dependency-free stand-in for a real
// hosted model: 16x16 images, 8-dim latents, 32-dim features.

#include "morphforge/tensor_io.hpp"
#include "morphforge/util.hpp"

#include <nlohmann/json.hpp>

#include <cmath>
#include <cstdio>
#include <string>

using morphforge::Tensor;

namespace {

constexpr int kSize = 16;
constexpr int kLatent = 8;
constexpr int kFeatures = 32;

Tensor encode(const Tensor& image) {
    // Block means over an image split into kLatent horizontal bands.
    Tensor out;
    out.dims = {kLatent};
    out.data.assign(kLatent, 0.0f);
    const int rows_per_band = kSize / kLatent;
    for (int y = 0; y < kSize; ++y) {
        const int band = y / rows_per_band;
        for (int x = 0; x < kSize; ++x)
            for (int c = 0; c < 3; ++c)
                out.data[static_cast<size_t>(band)] +=
                    image.data[(static_cast<size_t>(y) * kSize + x) * 3 + c];
    }
    for (auto& v : out.data) v /= static_cast<float>(rows_per_band * kSize * 3);
    return out;
}

Tensor generate(const Tensor& latent) {
    Tensor out;
    out.dims = {kSize, kSize, 3};
    out.data.resize(static_cast<size_t>(kSize) * kSize * 3);
    for (int y = 0; y < kSize; ++y) {
        for (int x = 0; x < kSize; ++x) {
            for (int c = 0; c < 3; ++c) {
                const float z = latent.data[static_cast<size_t>((x + y + c) % kLatent)];
                const float v = 0.5f + 0.4f * std::sin(z + 0.3f * x) * std::cos(z + 0.2f * y);
                out.data[(static_cast<size_t>(y) * kSize + x) * 3 + c] =
                    std::min(1.0f, std::max(0.0f, v));
            }
        }
    }
    return out;
}

Tensor features(const Tensor& image) {
    // Column-band means, 32 bands over (x, channel).
    Tensor out;
    out.dims = {kFeatures};
    out.data.assign(kFeatures, 0.0f);
    for (int y = 0; y < kSize; ++y)
        for (int x = 0; x < kSize; ++x)
            for (int c = 0; c < 3; ++c) {
                const int band = (x * 3 + c) * kFeatures / (kSize * 3);
                out.data[static_cast<size_t>(band)] +=
                    image.data[(static_cast<size_t>(y) * kSize + x) * 3 + c];
            }
    for (auto& v : out.data) v /= static_cast<float>(kSize * kSize * 3 / kFeatures);
    return out;
}

} // namespace

int main(int argc, char** argv) {
    if (argc != 4) {
        std::fprintf(stderr, "usage: tensor_stub_backend <header.json> <request.bin> <response.bin>\n");
        return 2;
    }
    try {
        const auto header = nlohmann::json::parse(morphforge::read_text_file(argv[1]));
        const std::string op = header.at("op").get<std::string>();
        const Tensor request = morphforge::read_tensor(argv[2]);
        Tensor response;
        if (op == "encode") response = encode(request);
        else if (op == "generate") response = generate(request);
        else if (op == "features") response = features(request);
        else {
            std::fprintf(stderr, "unknown op: %s\n", op.c_str());
            return 2;
        }
        morphforge::write_tensor(response, argv[3]);
        return 0;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "stub backend error: %s\n", e.what());
        return 2;
    }
}
