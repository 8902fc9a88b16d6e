#ifndef MORPHFORGE_MAD_HPP
#define MORPHFORGE_MAD_HPP

#include "morphforge/features.hpp"

#include <Eigen/Core>
#include <nlohmann/json.hpp>

#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace morphforge::mad {

/// Which texture features a detector extracts: LBP histograms over a
/// color-space x channel x scale-space-level x radius grid.
struct FeatureConfig {
    std::vector<ColorSpace> color_spaces{ColorSpace::RGB, ColorSpace::YCbCr, ColorSpace::HSV};
    int pyramid_levels = 3;
    std::vector<int> lbp_radii{1, 2};
    int lbp_neighbors = 8;

    void validate() const; // throws ValidationError
    int block_count() const;
};

/// One block per (color space, channel, level, radius), each a 256-bin
/// histogram, in that nesting order. Deterministic.
std::vector<Eigen::VectorXd> extract_features(const FaceImage& image, const FeatureConfig& config);

struct BlockClassifier {
    Eigen::VectorXd weights;
    double bias = 0.0;
};

/// Frozen feature configuration + per-block ridge classifiers fused by
/// mean. Scores are higher for attacks (attack label 1, bona fide 0).
struct MadModel {
    FeatureConfig config;
    std::vector<BlockClassifier> classifiers;

    void validate() const;
};

/// Fits one ridge-regularized least-squares classifier per feature block
/// (lambda = 1e-3 on the weights). Throws TrainingError if the normal
/// system is singular despite the ridge, ValidationError on an empty class.
MadModel train_mad(const std::vector<FaceImage>& train_attacks,
                   const std::vector<FaceImage>& train_bonafide, const FeatureConfig& config);

/// Mean of the per-block classifier outputs.
double mad_score(const FaceImage& image, const MadModel& model);

struct RocPoint {
    double tau = 0.0;
    double apcer = 0.0;
    double bpcer = 0.0;
};

struct DetReport {
    double d_eer = 0.0;
    std::map<double, double> bpcer_at_apcer; // {0.05 -> value, 0.10 -> value}
    std::vector<RocPoint> roc_points;
};

/// ISO 30107-3 style detection metrics. Classified attack when
/// score >= tau, so APCER(tau) = fraction of attack scores < tau and
/// BPCER(tau) = fraction of bona fide scores >= tau. Thresholds sweep the
/// union of scores plus one sentinel above the maximum; D-EER is the
/// crossing value with linear interpolation between adjacent thresholds.
DetReport det_metrics(const std::vector<double>& attack_scores,
                      const std::vector<double>& bonafide_scores);

/// Train-type x test-type grid of detection reports. Bona fide test
/// scores are shared across test types per model. Known-attack cells sit
/// on the diagonal when both maps share keys.
struct MadGrid {
    std::vector<std::string> train_types;
    std::vector<std::string> test_types;
    std::vector<DetReport> cells; // row-major [train][test]

    const DetReport& cell(size_t train, size_t test) const {
        return cells[train * test_types.size() + test];
    }
};

MadGrid cross_set_evaluate(const std::map<std::string, MadModel>& models,
                           const std::map<std::string, std::vector<FaceImage>>& test_attacks,
                           const std::vector<FaceImage>& test_bonafide);

void save_mad_model(const MadModel& model, const std::filesystem::path& path);
MadModel load_mad_model(const std::filesystem::path& path);

nlohmann::json det_report_to_json(const DetReport& r);
DetReport det_report_from_json(const nlohmann::json& j);

} // namespace morphforge::mad

#endif
