#include "morphforge/recognition.hpp"

#include "morphforge/errors.hpp"

namespace morphforge::vuln {

Eigen::VectorXd ToyRecognitionBackend::embed(const FaceImage& image) const {
    const int g = grid_;
    Eigen::VectorXd out(static_cast<Eigen::Index>(g) * g * 3);
    std::vector<double> acc(static_cast<size_t>(g) * g * 3, 0.0);
    std::vector<int> count(static_cast<size_t>(g) * g, 0);
    for (int y = 0; y < image.height; ++y) {
        const int by = std::min(g - 1, y * g / image.height);
        for (int x = 0; x < image.width; ++x) {
            const int bx = std::min(g - 1, x * g / image.width);
            const size_t cell = static_cast<size_t>(by) * g + bx;
            count[cell] += 1;
            for (int c = 0; c < 3; ++c) acc[cell * 3 + c] += image.at(x, y, c);
        }
    }
    for (int cell = 0; cell < g * g; ++cell) {
        const int n = std::max(1, count[static_cast<size_t>(cell)]);
        for (int c = 0; c < 3; ++c)
            out(static_cast<Eigen::Index>(cell) * 3 + c) =
                acc[static_cast<size_t>(cell) * 3 + c] / n;
    }
    return out;
}

double ToyRecognitionBackend::compare(const Eigen::VectorXd& a, const Eigen::VectorXd& b) const {
    if (a.size() != b.size()) throw BackendError("embedding length mismatch");
    return -(a - b).norm();
}

ExternalRecognitionBackend::ExternalRecognitionBackend(const regen::ExternalBackendSpec& spec)
    : backend_(std::make_shared<regen::ExternalBackend>(spec)) {}

Eigen::VectorXd ExternalRecognitionBackend::embed(const FaceImage& image) const {
    return backend_->features(image);
}

double ExternalRecognitionBackend::compare(const Eigen::VectorXd& a,
                                           const Eigen::VectorXd& b) const {
    if (a.size() != b.size()) throw BackendError("embedding length mismatch");
    return -(a - b).norm();
}

} // namespace morphforge::vuln
