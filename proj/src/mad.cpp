#include "morphforge/mad.hpp"

#include "morphforge/errors.hpp"
#include "morphforge/util.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <set>

namespace morphforge::mad {

void FeatureConfig::validate() const {
    if (color_spaces.empty()) throw ValidationError("FeatureConfig needs >= 1 color space");
    std::set<ColorSpace> seen(color_spaces.begin(), color_spaces.end());
    if (seen.size() != color_spaces.size())
        throw ValidationError("FeatureConfig has duplicate color spaces");
    if (pyramid_levels < 1) throw ValidationError("pyramid_levels must be >= 1");
    if (lbp_radii.empty()) throw ValidationError("FeatureConfig needs >= 1 LBP radius");
    for (int r : lbp_radii)
        if (r < 1) throw ValidationError("LBP radii must be positive");
    if (lbp_neighbors != 8) throw ValidationError("lbp_neighbors is fixed at 8");
}

int FeatureConfig::block_count() const {
    return static_cast<int>(color_spaces.size()) * 3 * pyramid_levels *
           static_cast<int>(lbp_radii.size());
}

std::vector<Eigen::VectorXd> extract_features(const FaceImage& image,
                                              const FeatureConfig& config) {
    config.validate();
    std::vector<Eigen::VectorXd> blocks;
    blocks.reserve(static_cast<size_t>(config.block_count()));
    for (ColorSpace space : config.color_spaces) {
        const auto planes = color_transform(image, space);
        for (const Plane& plane : planes) {
            const auto pyramid = gaussian_pyramid(plane, config.pyramid_levels);
            for (const Plane& level : pyramid) {
                for (int radius : config.lbp_radii) {
                    const auto hist = lbp_histogram(level, radius, config.lbp_neighbors);
                    blocks.push_back(Eigen::Map<const Eigen::VectorXd>(
                        hist.data(), static_cast<Eigen::Index>(hist.size())));
                }
            }
        }
    }
    return blocks;
}

void MadModel::validate() const {
    config.validate();
    if (static_cast<int>(classifiers.size()) != config.block_count())
        throw ValidationError("classifier count " + std::to_string(classifiers.size()) +
                              " != feature block count " + std::to_string(config.block_count()));
    for (const auto& c : classifiers) {
        if (!c.weights.allFinite() || !std::isfinite(c.bias))
            throw ValidationError("MadModel has non-finite classifier parameters");
    }
}

MadModel train_mad(const std::vector<FaceImage>& train_attacks,
                   const std::vector<FaceImage>& train_bonafide, const FeatureConfig& config) {
    config.validate();
    if (train_attacks.empty()) throw ValidationError("train_mad: empty attack set");
    if (train_bonafide.empty()) throw ValidationError("train_mad: empty bona fide set");

    const size_t n = train_attacks.size() + train_bonafide.size();
    std::vector<std::vector<Eigen::VectorXd>> feats;
    feats.reserve(n);
    Eigen::VectorXd labels(static_cast<Eigen::Index>(n));
    Eigen::Index row = 0;
    for (const auto& img : train_attacks) {
        feats.push_back(extract_features(img, config));
        labels(row++) = 1.0;
    }
    for (const auto& img : train_bonafide) {
        feats.push_back(extract_features(img, config));
        labels(row++) = 0.0;
    }

    const int blocks = config.block_count();
    constexpr double kRidge = 1e-3;

    MadModel model;
    model.config = config;
    for (int b = 0; b < blocks; ++b) {
        const Eigen::Index d = feats.front()[static_cast<size_t>(b)].size();
        Eigen::MatrixXd x(static_cast<Eigen::Index>(n), d);
        for (size_t i = 0; i < n; ++i) x.row(static_cast<Eigen::Index>(i)) = feats[i][static_cast<size_t>(b)];

        // Normal equations with a ridge on the weights, bias unpenalized:
        //   [X'X + lambda I   X'1] [w]   [X'y]
        //   [1'X              n  ] [b] = [1'y]
        Eigen::MatrixXd g(d + 1, d + 1);
        g.topLeftCorner(d, d) =
            x.transpose() * x + kRidge * Eigen::MatrixXd::Identity(d, d);
        g.topRightCorner(d, 1) = x.transpose() * Eigen::VectorXd::Ones(static_cast<Eigen::Index>(n));
        g.bottomLeftCorner(1, d) = g.topRightCorner(d, 1).transpose();
        g(d, d) = static_cast<double>(n);
        Eigen::VectorXd rhs(d + 1);
        rhs.head(d) = x.transpose() * labels;
        rhs(d) = labels.sum();

        const Eigen::LDLT<Eigen::MatrixXd> solver(g);
        if (solver.info() != Eigen::Success)
            throw TrainingError("ridge system factorization failed for block " +
                                std::to_string(b));
        const Eigen::VectorXd sol = solver.solve(rhs);
        if (!sol.allFinite())
            throw TrainingError("ridge solve produced non-finite weights for block " +
                                std::to_string(b));
        BlockClassifier c;
        c.weights = sol.head(d);
        c.bias = sol(d);
        model.classifiers.push_back(std::move(c));
    }
    model.validate();
    return model;
}

double mad_score(const FaceImage& image, const MadModel& model) {
    model.validate();
    const auto blocks = extract_features(image, model.config);
    if (blocks.size() != model.classifiers.size())
        throw ValidationError("mad_score: feature block count mismatch");
    double acc = 0.0;
    for (size_t i = 0; i < blocks.size(); ++i) {
        const auto& c = model.classifiers[i];
        if (c.weights.size() != blocks[i].size())
            throw ValidationError("mad_score: feature block length mismatch");
        acc += c.weights.dot(blocks[i]) + c.bias;
    }
    return acc / static_cast<double>(blocks.size());
}

DetReport det_metrics(const std::vector<double>& attack_scores,
                      const std::vector<double>& bonafide_scores) {
    if (attack_scores.empty() || bonafide_scores.empty())
        throw ValidationError("det_metrics: both score lists must be non-empty");
    for (double s : attack_scores)
        if (!std::isfinite(s)) throw ValidationError("det_metrics: non-finite attack score");
    for (double s : bonafide_scores)
        if (!std::isfinite(s)) throw ValidationError("det_metrics: non-finite bona fide score");

    std::vector<double> thresholds;
    thresholds.insert(thresholds.end(), attack_scores.begin(), attack_scores.end());
    thresholds.insert(thresholds.end(), bonafide_scores.begin(), bonafide_scores.end());
    std::sort(thresholds.begin(), thresholds.end());
    thresholds.erase(std::unique(thresholds.begin(), thresholds.end()), thresholds.end());
    thresholds.push_back(thresholds.back() + 1.0); // everything classified bona fide

    const double na = static_cast<double>(attack_scores.size());
    const double nb = static_cast<double>(bonafide_scores.size());
    auto apcer_at = [&](double tau) {
        long c = 0;
        for (double s : attack_scores) c += s < tau ? 1 : 0;
        return static_cast<double>(c) / na;
    };
    auto bpcer_at = [&](double tau) {
        long c = 0;
        for (double s : bonafide_scores) c += s >= tau ? 1 : 0;
        return static_cast<double>(c) / nb;
    };

    DetReport report;
    for (double tau : thresholds)
        report.roc_points.push_back({tau, apcer_at(tau), bpcer_at(tau)});

    // D-EER: apcer - bpcer is non-decreasing along the sweep, starting at
    // -1. Exact zeros take the first zero (largest BPCER); otherwise
    // interpolate linearly inside the bracketing segment.
    double d_eer = 0.0;
    bool found = false;
    for (size_t i = 0; i < report.roc_points.size() && !found; ++i) {
        const auto& p = report.roc_points[i];
        const double diff = p.apcer - p.bpcer;
        if (diff == 0.0) {
            d_eer = p.apcer;
            found = true;
        } else if (diff > 0.0) {
            const auto& q = report.roc_points[i - 1]; // diff < 0 there
            const double da = p.apcer - q.apcer;
            const double db = p.bpcer - q.bpcer;
            const double t = (q.bpcer - q.apcer) / (da - db);
            d_eer = q.apcer + t * da;
            found = true;
        }
    }
    if (!found) d_eer = report.roc_points.back().apcer; // degenerate: never crosses
    report.d_eer = d_eer;

    for (double alpha : {0.05, 0.10}) {
        double best = 1.0;
        for (const auto& p : report.roc_points)
            if (p.apcer <= alpha) best = std::min(best, p.bpcer);
        report.bpcer_at_apcer[alpha] = best;
    }
    return report;
}

MadGrid cross_set_evaluate(const std::map<std::string, MadModel>& models,
                           const std::map<std::string, std::vector<FaceImage>>& test_attacks,
                           const std::vector<FaceImage>& test_bonafide) {
    if (models.empty() || test_attacks.empty())
        throw ValidationError("cross_set_evaluate: empty model or test-set map");
    MadGrid grid;
    for (const auto& [name, _] : models) grid.train_types.push_back(name);
    for (const auto& [name, _] : test_attacks) grid.test_types.push_back(name);

    for (const auto& [train_name, model] : models) {
        std::vector<double> bonafide_scores;
        bonafide_scores.reserve(test_bonafide.size());
        for (const auto& img : test_bonafide) bonafide_scores.push_back(mad_score(img, model));
        for (const auto& [test_name, attacks] : test_attacks) {
            std::vector<double> attack_scores;
            attack_scores.reserve(attacks.size());
            for (const auto& img : attacks) attack_scores.push_back(mad_score(img, model));
            grid.cells.push_back(det_metrics(attack_scores, bonafide_scores));
        }
    }
    return grid;
}

namespace {

std::string encode_weights(const Eigen::VectorXd& w) {
    std::vector<float> f(static_cast<size_t>(w.size()));
    for (Eigen::Index i = 0; i < w.size(); ++i) f[static_cast<size_t>(i)] = static_cast<float>(w(i));
    // f32 little-endian byte stream
    std::vector<uint8_t> bytes(f.size() * 4);
    for (size_t i = 0; i < f.size(); ++i) {
        uint32_t u;
        std::memcpy(&u, &f[i], 4);
        bytes[i * 4 + 0] = static_cast<uint8_t>(u & 0xff);
        bytes[i * 4 + 1] = static_cast<uint8_t>((u >> 8) & 0xff);
        bytes[i * 4 + 2] = static_cast<uint8_t>((u >> 16) & 0xff);
        bytes[i * 4 + 3] = static_cast<uint8_t>((u >> 24) & 0xff);
    }
    return base64_encode(bytes.data(), bytes.size());
}

Eigen::VectorXd decode_weights(const std::string& text) {
    const auto bytes = base64_decode(text);
    if (bytes.size() % 4 != 0) throw ParseError("weight blob size not a multiple of 4");
    Eigen::VectorXd w(static_cast<Eigen::Index>(bytes.size() / 4));
    for (size_t i = 0; i < bytes.size() / 4; ++i) {
        const uint32_t u = static_cast<uint32_t>(bytes[i * 4]) |
                           (static_cast<uint32_t>(bytes[i * 4 + 1]) << 8) |
                           (static_cast<uint32_t>(bytes[i * 4 + 2]) << 16) |
                           (static_cast<uint32_t>(bytes[i * 4 + 3]) << 24);
        float f;
        std::memcpy(&f, &u, 4);
        w(static_cast<Eigen::Index>(i)) = static_cast<double>(f);
    }
    return w;
}

nlohmann::json config_to_json(const FeatureConfig& c) {
    nlohmann::json j;
    auto spaces = nlohmann::json::array();
    for (ColorSpace cs : c.color_spaces) spaces.push_back(to_string(cs));
    j["color_spaces"] = spaces;
    j["pyramid_levels"] = c.pyramid_levels;
    j["lbp_radii"] = c.lbp_radii;
    j["lbp_neighbors"] = c.lbp_neighbors;
    return j;
}

FeatureConfig config_from_json(const nlohmann::json& j) {
    FeatureConfig c;
    c.color_spaces.clear();
    for (const auto& s : j.at("color_spaces"))
        c.color_spaces.push_back(color_space_from_string(s.get<std::string>()));
    c.pyramid_levels = j.at("pyramid_levels").get<int>();
    c.lbp_radii = j.at("lbp_radii").get<std::vector<int>>();
    c.lbp_neighbors = j.at("lbp_neighbors").get<int>();
    c.validate();
    return c;
}

} // namespace

void save_mad_model(const MadModel& model, const std::filesystem::path& path) {
    model.validate();
    nlohmann::json j;
    j["config"] = config_to_json(model.config);
    j["fusion"] = "mean";
    j["label_convention"] = {{"attack", 1}, {"bonafide", 0}};
    auto classifiers = nlohmann::json::array();
    for (const auto& c : model.classifiers)
        classifiers.push_back({{"weights", encode_weights(c.weights)}, {"bias", c.bias}});
    j["classifiers"] = classifiers;
    atomic_write_file(path, j.dump(2) + "\n");
}

MadModel load_mad_model(const std::filesystem::path& path) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(read_text_file(path));
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError("model " + path.string() + ": " + e.what());
    }
    MadModel model;
    model.config = config_from_json(j.at("config"));
    if (j.value("fusion", "mean") != "mean")
        throw ParseError("model " + path.string() + ": unsupported fusion");
    for (const auto& cj : j.at("classifiers")) {
        BlockClassifier c;
        c.weights = decode_weights(cj.at("weights").get<std::string>());
        c.bias = cj.at("bias").get<double>();
        model.classifiers.push_back(std::move(c));
    }
    model.validate();
    return model;
}

nlohmann::json det_report_to_json(const DetReport& r) {
    nlohmann::json j;
    j["d_eer"] = r.d_eer;
    nlohmann::json bp;
    for (const auto& [alpha, value] : r.bpcer_at_apcer) {
        char key[16];
        std::snprintf(key, sizeof(key), "%.2f", alpha);
        bp[key] = value;
    }
    j["bpcer_at_apcer"] = bp;
    auto roc = nlohmann::json::array();
    for (const auto& p : r.roc_points) roc.push_back({p.tau, p.apcer, p.bpcer});
    j["roc_points"] = roc;
    return j;
}

DetReport det_report_from_json(const nlohmann::json& j) {
    DetReport r;
    r.d_eer = j.at("d_eer").get<double>();
    for (const auto& [key, value] : j.at("bpcer_at_apcer").items())
        r.bpcer_at_apcer[std::stod(key)] = value.get<double>();
    for (const auto& p : j.at("roc_points"))
        r.roc_points.push_back({p.at(0).get<double>(), p.at(1).get<double>(), p.at(2).get<double>()});
    return r;
}

} // namespace morphforge::mad
