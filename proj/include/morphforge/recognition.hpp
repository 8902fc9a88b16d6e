#ifndef MORPHFORGE_RECOGNITION_HPP
#define MORPHFORGE_RECOGNITION_HPP

#include "morphforge/external_backend.hpp"
#include "morphforge/image.hpp"

#include <Eigen/Core>

#include <memory>

namespace morphforge::vuln {

/// Face recognition capability: embedding plus symmetric similarity
/// comparison (higher = more similar). Distance-based systems wrap their
/// metric as similarity = -distance so every threshold is a ">" test.
class RecognitionBackend {
public:
    virtual ~RecognitionBackend() = default;
    virtual Eigen::VectorXd embed(const FaceImage& image) const = 0;
    virtual double compare(const Eigen::VectorXd& a, const Eigen::VectorXd& b) const = 0;
    virtual std::string name() const = 0;
};

/// Shipped desk-scale backend: embedding = block-averaged pixel vector,
/// similarity = -Euclidean distance.
class ToyRecognitionBackend final : public RecognitionBackend {
public:
    explicit ToyRecognitionBackend(int grid = 8) : grid_(grid) {}
    Eigen::VectorXd embed(const FaceImage& image) const override;
    double compare(const Eigen::VectorXd& a, const Eigen::VectorXd& b) const override;
    std::string name() const override { return "toy-pixel"; }

private:
    int grid_;
};

/// Recognition system hosted out of process over the tensor-file
/// protocol: the "features" op supplies embeddings and distances wrap as
/// similarity = -distance.
class ExternalRecognitionBackend final : public RecognitionBackend {
public:
    explicit ExternalRecognitionBackend(const regen::ExternalBackendSpec& spec);
    Eigen::VectorXd embed(const FaceImage& image) const override;
    double compare(const Eigen::VectorXd& a, const Eigen::VectorXd& b) const override;
    std::string name() const override { return "external"; }

private:
    std::shared_ptr<regen::ExternalBackend> backend_;
};

} // namespace morphforge::vuln

#endif
