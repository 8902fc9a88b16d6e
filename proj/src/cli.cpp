#include "morphforge/cli.hpp"

#include "morphforge/align.hpp"
#include "morphforge/errors.hpp"
#include "morphforge/external_backend.hpp"
#include "morphforge/mad.hpp"
#include "morphforge/morph.hpp"
#include "morphforge/png_io.hpp"
#include "morphforge/reference_context.hpp"
#include "morphforge/regen.hpp"
#include "morphforge/toy_backends.hpp"
#include "morphforge/util.hpp"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <chrono>
#include <iostream>
#include <sstream>

namespace morphforge::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// ------------------------------------------------------------- run records

/// Provenance record; the only file allowed to carry a timestamp.
void write_run_record(const fs::path& out_dir, const std::string& subcommand, uint64_t seed,
                      const json& config, const std::vector<fs::path>& input_files) {
    json j;
    j["tool"] = "morphforge";
    j["subcommand"] = subcommand;
    j["seed"] = seed;
    j["config"] = config;
    json inputs = json::object();
    for (const auto& p : input_files) {
        if (fs::is_regular_file(p)) inputs[p.string()] = file_digest(p);
    }
    j["inputs"] = inputs;
    const auto now = std::chrono::system_clock::now();
    const auto t = std::chrono::system_clock::to_time_t(now);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
    j["timestamp_utc"] = buf;
    fs::create_directories(out_dir);
    atomic_write_file(out_dir / "run.json", j.dump(2) + "\n");
}

// ------------------------------------------------------------ shared state

struct ManifestBundle {
    protocol::DatasetManifest manifest;
    fs::path dir; // directory the manifest's image paths are relative to
};

ManifestBundle load_manifest_bundle(const fs::path& manifest_path) {
    ManifestBundle b;
    b.manifest = protocol::load_manifest(manifest_path);
    b.dir = manifest_path.parent_path();
    return b;
}

FaceImage load_manifest_image(const ManifestBundle& bundle, const std::string& image_id) {
    const protocol::ImageRecord* rec = bundle.manifest.find_image(image_id);
    if (!rec) throw ValidationError("image id '" + image_id + "' not in manifest");
    return load_image(bundle.dir / rec->path);
}

LandmarkSet load_landmarks_for(const fs::path& landmarks_dir, const std::string& image_id) {
    const LandmarkFile lf = load_landmarks(landmarks_dir / (image_id + ".json"));
    if (lf.image_id != image_id)
        throw ValidationError("landmark file for '" + image_id + "' carries image_id '" +
                              lf.image_id + "'");
    validate_landmarks(lf.landmarks);
    return lf.landmarks;
}

std::vector<protocol::Split> splits_for(const std::string& name) {
    if (name == "all") return {protocol::Split::Train, protocol::Split::Test};
    return {protocol::split_from_string(name)};
}

// ----------------------------------------------------------- backend flags

struct BackendFlags {
    std::string kind = "toy";
    std::vector<std::string> command;
    int external_size = 1024;
    int external_latent = 512;
    int external_features = 4096;
    uint64_t toy_seed = 7;
    int toy_size = 64;
    int toy_latent = 32;
    int toy_hidden = 48;
    int toy_train_steps = 50;

    void add_options(CLI::App* cmd) {
        cmd->add_option("--backend", kind, "Model backend: toy | external")
            ->check(CLI::IsMember({"toy", "external"}));
        cmd->add_option("--backend-cmd", command,
                        "argv of the external backend process (tensor-file protocol)")
            ->envname("MORPHFORGE_BACKEND_CMD");
        cmd->add_option("--backend-size", external_size, "external backend image size");
        cmd->add_option("--backend-latent-dim", external_latent, "external backend latent dim");
        cmd->add_option("--backend-feature-len", external_features,
                        "external backend feature length");
        cmd->add_option("--toy-seed", toy_seed, "toy backend weight seed");
        cmd->add_option("--toy-size", toy_size, "toy backend image size");
        cmd->add_option("--toy-latent", toy_latent, "toy backend latent dim");
        cmd->add_option("--toy-hidden", toy_hidden, "toy backend hidden dim");
        cmd->add_option("--toy-train-steps", toy_train_steps, "toy autoencoder fit steps");
    }

    regen::Backends build() const {
        if (kind == "external") {
            regen::ExternalBackendSpec spec;
            spec.command = command;
            spec.image_size = external_size;
            spec.latent_dim = external_latent;
            spec.feature_length = external_features;
            return regen::ExternalBackend::as_backends(spec);
        }
        regen::ToyBackendConfig cfg;
        cfg.seed = toy_seed;
        cfg.image_size = toy_size;
        cfg.latent_dim = toy_latent;
        cfg.hidden_dim = toy_hidden;
        cfg.train_steps = toy_train_steps;
        return regen::make_toy_backends(cfg);
    }

    json to_json() const {
        return {{"backend", kind},          {"toy_seed", toy_seed},
                {"toy_size", toy_size},     {"toy_latent", toy_latent},
                {"toy_hidden", toy_hidden}, {"toy_train_steps", toy_train_steps}};
    }
};

struct FitFlags {
    regen::FitOptions opts;

    void add_options(CLI::App* cmd) {
        cmd->add_option("--fit-lr", opts.learning_rate, "optimizer step length");
        cmd->add_option("--fit-decay", opts.decay_rate, "step decay on non-improving steps");
        cmd->add_option("--fit-threshold", opts.early_stop_threshold, "early-stop loss threshold");
        cmd->add_option("--fit-patience", opts.patience, "non-improving iterations tolerated");
        cmd->add_option("--fit-max-iter", opts.max_iterations, "iteration cap");
        cmd->add_option("--fit-history", opts.history_size, "L-BFGS memory");
    }

    json to_json() const {
        return {{"learning_rate", opts.learning_rate},
                {"decay_rate", opts.decay_rate},
                {"early_stop_threshold", opts.early_stop_threshold},
                {"patience", opts.patience},
                {"max_iterations", opts.max_iterations},
                {"history_size", opts.history_size}};
    }
};

protocol::BonafidePolicy policy_from(const std::string& s) {
    if (s == "exclude-sources") return protocol::BonafidePolicy::ExcludeMorphSources;
    if (s == "all") return protocol::BonafidePolicy::AllImages;
    throw ValidationError("unknown bona fide policy '" + s + "'");
}

std::vector<std::pair<std::string, FaceImage>> load_bonafide(
    const ManifestBundle& bundle, const protocol::SplitProtocol& proto, protocol::Split split,
    protocol::BonafidePolicy policy) {
    std::vector<std::pair<std::string, FaceImage>> out;
    for (const auto& rec : protocol::bonafide_images(bundle.manifest, proto, split, policy))
        out.emplace_back(rec.id, load_image(bundle.dir / rec.path));
    return out;
}

// ------------------------------------------------------------- subcommands

struct ProtocolArgs {
    std::string manifest_path;
    std::string out_path;
    double train_fraction = 0.5;
    int pairs_per_identity = 1;
    uint64_t seed = 1;
    std::string bonafide_policy = "exclude-sources";
    long expect_train_pairs = -1;
    long expect_test_pairs = -1;
    long expect_train_bonafide = -1;
    long expect_test_bonafide = -1;
};

int run_protocol(const ProtocolArgs& a) {
    const ManifestBundle bundle = load_manifest_bundle(a.manifest_path);
    const protocol::SplitProtocol proto =
        protocol::build_splits(bundle.manifest, a.train_fraction, a.pairs_per_identity, a.seed);
    const fs::path out(a.out_path);
    if (out.has_parent_path()) fs::create_directories(out.parent_path());
    protocol::save_protocol(proto, out);

    json config{{"manifest", a.manifest_path},
                {"train_fraction", a.train_fraction},
                {"pairs_per_identity", a.pairs_per_identity},
                {"bonafide_policy", a.bonafide_policy}};
    write_run_record(out.has_parent_path() ? out.parent_path() : fs::path("."), "protocol",
                     a.seed, config, {a.manifest_path});

    protocol::ExpectedCounts expected;
    if (a.expect_train_pairs >= 0) expected.train_pairs = a.expect_train_pairs;
    if (a.expect_test_pairs >= 0) expected.test_pairs = a.expect_test_pairs;
    if (a.expect_train_bonafide >= 0) expected.train_bonafide = a.expect_train_bonafide;
    if (a.expect_test_bonafide >= 0) expected.test_bonafide = a.expect_test_bonafide;
    if (expected.train_pairs || expected.test_pairs || expected.train_bonafide ||
        expected.test_bonafide) {
        const auto report = protocol::validate_counts(proto, bundle.manifest, expected,
                                                      policy_from(a.bonafide_policy));
        std::cout << protocol::count_report_to_text(report);
        if (!report.pass) return 1;
    }
    std::cout << "protocol: " << proto.train_identities.size() << " train / "
              << proto.test_identities.size() << " test identities, "
              << proto.pairs.size() << " pairs -> " << a.out_path << "\n";
    return 0;
}

struct MorphArgs {
    std::string method = "lma";
    double alpha = 0.5;
    std::string pairs_path;
    std::string manifest_path;
    std::string landmarks_dir;
    std::string split = "all";
    std::string out_dir;
    uint64_t seed = 1;
    bool no_refine = false;
    std::string finetune_split = "none";
    BackendFlags backend;
    FitFlags fit;
};

int run_morph(const MorphArgs& a) {
    const ManifestBundle bundle = load_manifest_bundle(a.manifest_path);
    const protocol::SplitProtocol proto = protocol::load_protocol(a.pairs_path);
    protocol::validate_split_protocol(proto, bundle.manifest);
    fs::create_directories(a.out_dir);

    const auto refine =
        a.no_refine ? regen::Refinement::EncodeOnly : regen::Refinement::FitLatent;

    regen::Backends backends;
    if (a.method != "lma") {
        backends = a.backend.build();
        if (a.finetune_split != "none") {
            // Fine-tune the encoder on this split's landmark morphs before
            // regenerating, mirroring the train-split usage of the method.
            std::vector<FaceImage> train_morphs;
            for (const auto& pair :
                 proto.pairs_for(protocol::split_from_string(a.finetune_split))) {
                const FaceImage img_a = load_manifest_image(bundle, pair.a_img);
                const FaceImage img_b = load_manifest_image(bundle, pair.b_img);
                const LandmarkSet la = load_landmarks_for(a.landmarks_dir, pair.a_img);
                const LandmarkSet lb = load_landmarks_for(a.landmarks_dir, pair.b_img);
                const FaceImage morph = lma::morph_pair(
                    img_a, with_border_anchors(la, img_a.width, img_a.height), img_b,
                    with_border_anchors(lb, img_b.width, img_b.height), a.alpha);
                const LandmarkSet mid = lma::interpolate_landmarks(la, lb, a.alpha);
                const int in_size = backends.encoder->input_size();
                train_morphs.push_back(
                    align_face(morph, mid, bbox_fit_template(mid, in_size, 0.12), in_size).image);
            }
            auto* trainable = dynamic_cast<regen::TrainableEncoder*>(backends.encoder.get());
            if (!trainable)
                throw BackendError("--finetune-split requires a trainable encoder backend");
            const auto ft = regen::finetune_encoder(*trainable, *backends.generator,
                                                    *backends.perceptual, train_morphs,
                                                    a.fit.opts);
            std::cout << "finetune: mean loss " << ft.mean_loss_before << " -> "
                      << ft.mean_loss_after << " over " << train_morphs.size() << " morphs\n";
        }
    }

    int count = 0;
    for (const protocol::Split split : splits_for(a.split)) {
        for (const auto& pair : proto.pairs_for(split)) {
            const FaceImage img_a = load_manifest_image(bundle, pair.a_img);
            const FaceImage img_b = load_manifest_image(bundle, pair.b_img);
            const LandmarkSet la = load_landmarks_for(a.landmarks_dir, pair.a_img);
            const LandmarkSet lb = load_landmarks_for(a.landmarks_dir, pair.b_img);

            FaceImage result;
            if (a.method == "lma") {
                result = lma::morph_pair(img_a, with_border_anchors(la, img_a.width, img_a.height),
                                         img_b, with_border_anchors(lb, img_b.width, img_b.height),
                                         a.alpha);
            } else if (a.method == "regen") {
                result = regen::regen_morph(img_a, la, img_b, lb, a.alpha, backends, a.fit.opts,
                                            refine);
            } else { // latent-interp
                const int in_size = backends.encoder->input_size();
                const FaceImage aligned_a =
                    align_face(img_a, la, bbox_fit_template(la, in_size, 0.12), in_size).image;
                const FaceImage aligned_b =
                    align_face(img_b, lb, bbox_fit_template(lb, in_size, 0.12), in_size).image;
                result = regen::latent_interpolation_morph(aligned_a, aligned_b, a.alpha, backends,
                                                           a.fit.opts, refine);
            }
            save_image(result, fs::path(a.out_dir) / morph_filename(pair, a.method));
            ++count;
        }
    }

    json config{{"method", a.method},   {"alpha", a.alpha},
                {"pairs", a.pairs_path}, {"manifest", a.manifest_path},
                {"landmarks", a.landmarks_dir}, {"split", a.split},
                {"refine", !a.no_refine}, {"finetune_split", a.finetune_split},
                {"backend", a.backend.to_json()}, {"fit", a.fit.to_json()}};
    write_run_record(a.out_dir, "morph", a.seed, config, {a.pairs_path, a.manifest_path});
    std::cout << "morph: wrote " << count << " images to " << a.out_dir << "\n";
    return 0;
}

struct VulnArgs {
    std::string protocol_path;
    std::string manifest_path;
    std::string morphs_dir;
    std::string attack = "lma";
    std::string split = "test";
    std::string backend = "toy";
    std::vector<std::string> backend_cmd;
    int backend_size = 1024;
    int backend_features = 4096;
    double target_fmr = 0.001;
    std::string aggregation = "max";
    std::string bonafide_policy = "exclude-sources";
    std::string out_path;
    uint64_t seed = 1;
};

int run_vuln(const VulnArgs& a) {
    const ManifestBundle bundle = load_manifest_bundle(a.manifest_path);
    const protocol::SplitProtocol proto = protocol::load_protocol(a.protocol_path);
    protocol::validate_split_protocol(proto, bundle.manifest);
    const protocol::Split split = protocol::split_from_string(a.split);

    std::unique_ptr<vuln::RecognitionBackend> backend;
    if (a.backend == "toy") {
        backend = std::make_unique<vuln::ToyRecognitionBackend>();
    } else {
        regen::ExternalBackendSpec spec;
        spec.command = a.backend_cmd;
        spec.image_size = a.backend_size;
        spec.feature_length = a.backend_features;
        backend = std::make_unique<vuln::ExternalRecognitionBackend>(spec);
    }

    // Imposter distribution: cross-identity bona fide comparisons.
    const auto bonafide = load_bonafide(bundle, proto, split, policy_from(a.bonafide_policy));
    std::vector<std::pair<std::string, Eigen::VectorXd>> embeds;
    embeds.reserve(bonafide.size());
    for (const auto& [id, img] : bonafide) embeds.emplace_back(id, backend->embed(img));
    auto identity_of = [&](const std::string& image_id) {
        for (const auto& rec : bundle.manifest.identities)
            for (const auto& img : rec.images)
                if (img.id == image_id) return rec.id;
        throw ValidationError("image '" + image_id + "' not in manifest");
    };
    std::vector<double> imposter_scores;
    for (size_t i = 0; i < embeds.size(); ++i) {
        for (size_t j = i + 1; j < embeds.size(); ++j) {
            if (identity_of(embeds[i].first) == identity_of(embeds[j].first)) continue;
            imposter_scores.push_back(backend->compare(embeds[i].second, embeds[j].second));
        }
    }
    const vuln::Threshold threshold = vuln::fmr_threshold(imposter_scores, a.target_fmr);

    const auto morphs = load_morph_records(a.morphs_dir, proto, split, a.attack);
    const auto members =
        split == protocol::Split::Train ? proto.train_identities : proto.test_identities;
    const auto probes = load_probes(bundle.manifest, bundle.dir, members);
    const vuln::ScoreTable table = vuln::score_morphs(morphs, probes, *backend);

    const auto agg = a.aggregation == "mean" ? vuln::SubjectAggregation::Mean
                                             : vuln::SubjectAggregation::Max;
    const vuln::VulnReport report =
        vuln::vulnerability_report(a.attack, backend->name(), table, threshold, agg);

    const fs::path out(a.out_path);
    const fs::path out_dir = out.has_parent_path() ? out.parent_path() : fs::path(".");
    fs::create_directories(out_dir);
    vuln::save_vuln_report(report, out);
    vuln::save_scatter_csv(report, out_dir / ("scatter_" + a.attack + "_" + backend->name() + ".csv"));
    vuln::save_score_table(table, out_dir / ("scores_" + a.attack + "_" + backend->name() + ".csv"));

    json config{{"protocol", a.protocol_path},   {"manifest", a.manifest_path},
                {"morphs", a.morphs_dir},        {"attack", a.attack},
                {"split", a.split},              {"backend", a.backend},
                {"target_fmr", a.target_fmr},    {"aggregation", a.aggregation},
                {"bonafide_policy", a.bonafide_policy}};
    write_run_record(out_dir, "vuln", a.seed, config, {a.protocol_path, a.manifest_path});

    std::cout << "vuln[" << a.attack << "/" << backend->name() << "]: tau=" << report.tau
              << " mmpmr=" << report.mmpmr * 100.0 << "% fmmpmr=" << report.fmmpmr * 100.0
              << "% (" << report.scatter.size() << " morphs)\n";
    return 0;
}

struct FeatureFlags {
    std::vector<std::string> color_spaces{"RGB", "YCbCr", "HSV"};
    int pyramid_levels = 3;
    std::vector<int> lbp_radii{1, 2};

    void add_options(CLI::App* cmd) {
        cmd->add_option("--color-spaces", color_spaces, "subset of RGB,YCbCr,HSV");
        cmd->add_option("--pyramid-levels", pyramid_levels, "scale-space levels");
        cmd->add_option("--lbp-radii", lbp_radii, "LBP radii");
    }

    mad::FeatureConfig build() const {
        mad::FeatureConfig cfg;
        cfg.color_spaces.clear();
        for (const auto& s : color_spaces)
            cfg.color_spaces.push_back(mad::color_space_from_string(s));
        cfg.pyramid_levels = pyramid_levels;
        cfg.lbp_radii = lbp_radii;
        cfg.validate();
        return cfg;
    }
};

struct MadTrainArgs {
    std::string protocol_path;
    std::string manifest_path;
    std::string morphs_dir;
    std::string attack = "lma";
    std::string split = "train";
    std::string bonafide_policy = "exclude-sources";
    std::string out_path;
    uint64_t seed = 1;
    FeatureFlags features;
};

int run_mad_train(const MadTrainArgs& a) {
    const ManifestBundle bundle = load_manifest_bundle(a.manifest_path);
    const protocol::SplitProtocol proto = protocol::load_protocol(a.protocol_path);
    protocol::validate_split_protocol(proto, bundle.manifest);
    const protocol::Split split = protocol::split_from_string(a.split);

    std::vector<FaceImage> attacks;
    for (const auto& rec : load_morph_records(a.morphs_dir, proto, split, a.attack))
        attacks.push_back(rec.image);
    std::vector<FaceImage> bonafide;
    for (auto& [_, img] : load_bonafide(bundle, proto, split, policy_from(a.bonafide_policy)))
        bonafide.push_back(std::move(img));

    const mad::MadModel model = mad::train_mad(attacks, bonafide, a.features.build());
    const fs::path out(a.out_path);
    if (out.has_parent_path()) fs::create_directories(out.parent_path());
    mad::save_mad_model(model, out);

    json config{{"protocol", a.protocol_path}, {"manifest", a.manifest_path},
                {"morphs", a.morphs_dir},      {"attack", a.attack},
                {"split", a.split},            {"bonafide_policy", a.bonafide_policy},
                {"pyramid_levels", a.features.pyramid_levels},
                {"color_spaces", a.features.color_spaces},
                {"lbp_radii", a.features.lbp_radii}};
    write_run_record(out.has_parent_path() ? out.parent_path() : fs::path("."), "mad-train",
                     a.seed, config, {a.protocol_path, a.manifest_path});
    std::cout << "mad-train[" << a.attack << "]: " << attacks.size() << " attacks / "
              << bonafide.size() << " bona fide -> " << a.out_path << "\n";
    return 0;
}

struct MadEvalArgs {
    std::string protocol_path;
    std::string manifest_path;
    std::vector<std::string> models;  // name=path
    std::vector<std::string> attacks; // name=dir
    std::string split = "test";
    std::string bonafide_policy = "exclude-sources";
    std::string out_path;
    uint64_t seed = 1;
};

std::pair<std::string, std::string> split_kv(const std::string& s, const char* what) {
    const auto eq = s.find('=');
    if (eq == std::string::npos || eq == 0 || eq + 1 >= s.size())
        throw ValidationError(std::string(what) + " must look like name=value, got '" + s + "'");
    return {s.substr(0, eq), s.substr(eq + 1)};
}

int run_mad_eval(const MadEvalArgs& a) {
    const ManifestBundle bundle = load_manifest_bundle(a.manifest_path);
    const protocol::SplitProtocol proto = protocol::load_protocol(a.protocol_path);
    protocol::validate_split_protocol(proto, bundle.manifest);
    const protocol::Split split = protocol::split_from_string(a.split);

    std::map<std::string, mad::MadModel> models;
    for (const auto& spec : a.models) {
        const auto [name, path] = split_kv(spec, "--model");
        models[name] = mad::load_mad_model(path);
    }
    std::map<std::string, std::vector<FaceImage>> test_attacks;
    std::map<std::string, std::vector<std::string>> attack_ids;
    for (const auto& spec : a.attacks) {
        const auto [name, dir] = split_kv(spec, "--attack");
        for (const auto& rec : load_morph_records(dir, proto, split, name)) {
            test_attacks[name].push_back(rec.image);
            attack_ids[name].push_back(rec.morph_id);
        }
    }
    std::vector<FaceImage> bonafide;
    std::vector<std::string> bonafide_ids;
    for (auto& [id, img] : load_bonafide(bundle, proto, split, policy_from(a.bonafide_policy))) {
        bonafide.push_back(std::move(img));
        bonafide_ids.push_back(id);
    }

    const mad::MadGrid grid = mad::cross_set_evaluate(models, test_attacks, bonafide);

    const fs::path out(a.out_path);
    const fs::path out_dir = out.has_parent_path() ? out.parent_path() : fs::path(".");
    fs::create_directories(out_dir);

    json j;
    j["split"] = a.split;
    j["train_types"] = grid.train_types;
    j["test_types"] = grid.test_types;
    auto cells = json::array();
    for (size_t ti = 0; ti < grid.train_types.size(); ++ti) {
        for (size_t si = 0; si < grid.test_types.size(); ++si) {
            json cell;
            cell["train"] = grid.train_types[ti];
            cell["test"] = grid.test_types[si];
            cell["known_attack"] = grid.train_types[ti] == grid.test_types[si];
            cell["report"] = mad::det_report_to_json(grid.cell(ti, si));
            cells.push_back(cell);
        }
    }
    j["cells"] = cells;
    j["reference_context"] = detection_reference_context();
    atomic_write_file(out, j.dump(2) + "\n");

    // Per-model score files: image_id,label,score.
    for (const auto& [model_name, model] : models) {
        std::ostringstream os;
        os << "image_id,label,score\n";
        for (const auto& [attack_name, images] : test_attacks) {
            for (size_t i = 0; i < images.size(); ++i)
                os << attack_ids[attack_name][i] << ",attack,"
                   << format_double(mad::mad_score(images[i], model)) << "\n";
        }
        for (size_t i = 0; i < bonafide.size(); ++i)
            os << bonafide_ids[i] << ",bonafide,"
               << format_double(mad::mad_score(bonafide[i], model)) << "\n";
        atomic_write_file(out_dir / ("mad_scores_" + model_name + ".csv"), os.str());
    }

    json config{{"protocol", a.protocol_path}, {"manifest", a.manifest_path},
                {"models", a.models},          {"attacks", a.attacks},
                {"split", a.split},            {"bonafide_policy", a.bonafide_policy}};
    std::vector<fs::path> inputs{a.protocol_path, a.manifest_path};
    for (const auto& spec : a.models) inputs.emplace_back(split_kv(spec, "--model").second);
    write_run_record(out_dir, "mad-eval", a.seed, config, inputs);

    for (size_t ti = 0; ti < grid.train_types.size(); ++ti)
        for (size_t si = 0; si < grid.test_types.size(); ++si)
            std::cout << "mad-eval[" << grid.train_types[ti] << " -> " << grid.test_types[si]
                      << "]: d_eer=" << grid.cell(ti, si).d_eer * 100.0 << "%\n";
    return 0;
}

struct ReportArgs {
    std::vector<std::string> vuln_reports;
    std::vector<std::string> mad_reports;
    std::string out_dir;
    uint64_t seed = 1;
};

int run_report(const ReportArgs& a) {
    fs::create_directories(a.out_dir);
    json plots = json::array();

    for (const auto& path : a.vuln_reports) {
        if (!fs::exists(path)) throw ProtocolError("missing report: " + path);
        const vuln::VulnReport r = vuln::load_vuln_report(path);
        const std::string name = "scatter_" + r.attack + "_" + r.backend + ".csv";
        vuln::save_scatter_csv(r, fs::path(a.out_dir) / name);
        plots.push_back({{"kind", "scatter"},
                         {"file", name},
                         {"attack", r.attack},
                         {"backend", r.backend},
                         {"x_axis", "max similarity to subject 1"},
                         {"y_axis", "max similarity to subject 2"},
                         {"threshold_lines", {{{"axis", "x"}, {"value", r.tau}},
                                              {{"axis", "y"}, {"value", r.tau}}}}});
    }

    for (const auto& path : a.mad_reports) {
        if (!fs::exists(path)) throw ProtocolError("missing report: " + path);
        json grid;
        try {
            grid = json::parse(read_text_file(path));
        } catch (const json::parse_error& e) {
            throw ParseError("mad report " + path + ": " + e.what());
        }
        for (const auto& cell : grid.at("cells")) {
            const std::string train = cell.at("train").get<std::string>();
            const std::string test = cell.at("test").get<std::string>();
            const mad::DetReport det = mad::det_report_from_json(cell.at("report"));
            const std::string name = "det_" + train + "_vs_" + test + ".csv";
            std::ostringstream os;
            os << "tau,apcer,bpcer\n";
            for (const auto& p : det.roc_points)
                os << format_double(p.tau) << "," << format_double(p.apcer) << ","
                   << format_double(p.bpcer) << "\n";
            atomic_write_file(fs::path(a.out_dir) / name, os.str());
            plots.push_back({{"kind", "det_curve"},
                             {"file", name},
                             {"train", train},
                             {"test", test},
                             {"x_axis", "apcer"},
                             {"y_axis", "bpcer"},
                             {"d_eer", det.d_eer}});
        }
    }

    json spec;
    spec["plots"] = plots;
    atomic_write_file(fs::path(a.out_dir) / "plots.json", spec.dump(2) + "\n");

    json config{{"vuln_reports", a.vuln_reports}, {"mad_reports", a.mad_reports}};
    std::vector<fs::path> inputs;
    for (const auto& p : a.vuln_reports) inputs.emplace_back(p);
    for (const auto& p : a.mad_reports) inputs.emplace_back(p);
    write_run_record(a.out_dir, "report", a.seed, config, inputs);
    std::cout << "report: wrote " << plots.size() << " plot data files to " << a.out_dir << "\n";
    return 0;
}

} // namespace

std::string morph_filename(const protocol::MorphPair& pair, const std::string& method) {
    return pair.a_id + "_" + pair.b_id + "_" + method + ".png";
}

std::vector<vuln::MorphRecord> load_morph_records(const fs::path& dir,
                                                  const protocol::SplitProtocol& proto,
                                                  protocol::Split split,
                                                  const std::string& method) {
    std::vector<vuln::MorphRecord> out;
    for (const auto& pair : proto.pairs_for(split)) {
        const fs::path path = dir / morph_filename(pair, method);
        if (!fs::exists(path))
            throw ProtocolError("missing morph image: " + path.string() +
                                " (generate it with `morphforge morph`)");
        vuln::MorphRecord rec;
        rec.morph_id = pair.a_id + "_" + pair.b_id + "_" + method;
        rec.image = load_image(path);
        rec.subject_a = pair.a_id;
        rec.subject_b = pair.b_id;
        rec.source_img_a = pair.a_img;
        rec.source_img_b = pair.b_img;
        out.push_back(std::move(rec));
    }
    return out;
}

std::map<std::string, std::vector<vuln::ProbeImage>> load_probes(
    const protocol::DatasetManifest& manifest, const fs::path& manifest_dir,
    const std::set<std::string>& identities) {
    std::map<std::string, std::vector<vuln::ProbeImage>> out;
    for (const auto& rec : manifest.identities) {
        if (!identities.count(rec.id)) continue;
        for (const auto& img : rec.images) {
            if (img.role != protocol::ImageRole::Probe) continue;
            out[rec.id].push_back({img.id, load_image(manifest_dir / img.path)});
        }
    }
    return out;
}

int run(int argc, const char* const* argv) {
    CLI::App app{"morphforge: face morphing attack generation and evaluation toolkit"};
    app.require_subcommand(1);
    app.failure_message(CLI::FailureMessage::help); // usage text on the error stream

    ProtocolArgs pa;
    auto* proto_cmd = app.add_subcommand("protocol", "Build identity-disjoint splits and pairs");
    proto_cmd->add_option("--manifest", pa.manifest_path, "dataset manifest JSON")->required();
    proto_cmd->add_option("--out", pa.out_path, "output protocol JSON")->required();
    proto_cmd->add_option("--train-fraction", pa.train_fraction, "identity fraction for training");
    proto_cmd->add_option("--pairs-per-identity", pa.pairs_per_identity, "morph partners per identity");
    proto_cmd->add_option("--seed", pa.seed, "shuffle seed");
    proto_cmd->add_option("--bonafide-policy", pa.bonafide_policy, "exclude-sources | all")
        ->check(CLI::IsMember({"exclude-sources", "all"}));
    proto_cmd->add_option("--expect-train-pairs", pa.expect_train_pairs, "expected count");
    proto_cmd->add_option("--expect-test-pairs", pa.expect_test_pairs, "expected count");
    proto_cmd->add_option("--expect-train-bonafide", pa.expect_train_bonafide, "expected count");
    proto_cmd->add_option("--expect-test-bonafide", pa.expect_test_bonafide, "expected count");

    MorphArgs ma;
    auto* morph_cmd = app.add_subcommand("morph", "Generate morph attack images");
    morph_cmd->add_option("--method", ma.method, "lma | regen | latent-interp")
        ->check(CLI::IsMember({"lma", "regen", "latent-interp"}));
    morph_cmd->add_option("--alpha", ma.alpha, "identity blend factor in [0,1]");
    morph_cmd->add_option("--pairs", ma.pairs_path, "protocol JSON")->required();
    morph_cmd->add_option("--manifest", ma.manifest_path, "dataset manifest JSON")->required();
    morph_cmd->add_option("--landmarks", ma.landmarks_dir, "landmark JSON directory")->required();
    morph_cmd->add_option("--split", ma.split, "train | test | all")
        ->check(CLI::IsMember({"train", "test", "all"}));
    morph_cmd->add_option("--out", ma.out_dir, "output directory")->required();
    morph_cmd->add_option("--seed", ma.seed, "run seed (recorded)");
    morph_cmd->add_flag("--no-refine", ma.no_refine, "skip per-image latent refinement");
    morph_cmd->add_option("--finetune-split", ma.finetune_split,
                          "fine-tune the encoder on this split's morphs first (train | none)")
        ->check(CLI::IsMember({"train", "none"}));
    ma.backend.add_options(morph_cmd);
    ma.fit.add_options(morph_cmd);

    VulnArgs va;
    auto* vuln_cmd = app.add_subcommand("vuln", "Face recognition vulnerability analysis");
    vuln_cmd->add_option("--protocol", va.protocol_path, "protocol JSON")->required();
    vuln_cmd->add_option("--manifest", va.manifest_path, "dataset manifest JSON")->required();
    vuln_cmd->add_option("--morphs", va.morphs_dir, "directory of generated morphs")->required();
    vuln_cmd->add_option("--attack", va.attack, "attack name used in morph file names")->required();
    vuln_cmd->add_option("--split", va.split, "train | test")
        ->check(CLI::IsMember({"train", "test"}));
    vuln_cmd->add_option("--backend", va.backend, "toy | external")
        ->check(CLI::IsMember({"toy", "external"}));
    vuln_cmd->add_option("--backend-cmd", va.backend_cmd, "external recognition backend argv")
        ->envname("MORPHFORGE_BACKEND_CMD");
    vuln_cmd->add_option("--backend-size", va.backend_size, "external backend image size");
    vuln_cmd->add_option("--backend-feature-len", va.backend_features,
                         "external backend embedding length");
    vuln_cmd->add_option("--target-fmr", va.target_fmr, "false match rate anchor");
    vuln_cmd->add_option("--aggregation", va.aggregation, "per-subject probe aggregation")
        ->check(CLI::IsMember({"max", "mean"}));
    vuln_cmd->add_option("--bonafide-policy", va.bonafide_policy, "exclude-sources | all")
        ->check(CLI::IsMember({"exclude-sources", "all"}));
    vuln_cmd->add_option("--out", va.out_path, "output report JSON")->required();
    vuln_cmd->add_option("--seed", va.seed, "run seed (recorded)");

    MadTrainArgs ta;
    auto* train_cmd = app.add_subcommand("mad-train", "Train a morphing attack detector");
    train_cmd->add_option("--protocol", ta.protocol_path, "protocol JSON")->required();
    train_cmd->add_option("--manifest", ta.manifest_path, "dataset manifest JSON")->required();
    train_cmd->add_option("--morphs", ta.morphs_dir, "directory of generated morphs")->required();
    train_cmd->add_option("--attack", ta.attack, "attack name used in morph file names")->required();
    train_cmd->add_option("--split", ta.split, "train | test")
        ->check(CLI::IsMember({"train", "test"}));
    train_cmd->add_option("--bonafide-policy", ta.bonafide_policy, "exclude-sources | all")
        ->check(CLI::IsMember({"exclude-sources", "all"}));
    train_cmd->add_option("--out", ta.out_path, "output model JSON")->required();
    train_cmd->add_option("--seed", ta.seed, "run seed (recorded)");
    ta.features.add_options(train_cmd);

    MadEvalArgs ea;
    auto* eval_cmd = app.add_subcommand("mad-eval", "Evaluate detectors (known + cross-set)");
    eval_cmd->add_option("--protocol", ea.protocol_path, "protocol JSON")->required();
    eval_cmd->add_option("--manifest", ea.manifest_path, "dataset manifest JSON")->required();
    eval_cmd->add_option("--model", ea.models, "name=model.json (repeatable)")->required();
    eval_cmd->add_option("--attack", ea.attacks, "name=morph-dir (repeatable)")->required();
    eval_cmd->add_option("--split", ea.split, "train | test")
        ->check(CLI::IsMember({"train", "test"}));
    eval_cmd->add_option("--bonafide-policy", ea.bonafide_policy, "exclude-sources | all")
        ->check(CLI::IsMember({"exclude-sources", "all"}));
    eval_cmd->add_option("--out", ea.out_path, "output grid JSON")->required();
    eval_cmd->add_option("--seed", ea.seed, "run seed (recorded)");

    ReportArgs ra;
    auto* report_cmd = app.add_subcommand("report", "Emit plot-ready data from reports");
    report_cmd->add_option("--vuln", ra.vuln_reports, "vulnerability report JSON (repeatable)");
    report_cmd->add_option("--mad", ra.mad_reports, "mad-eval grid JSON (repeatable)");
    report_cmd->add_option("--out", ra.out_dir, "output directory")->required();
    report_cmd->add_option("--seed", ra.seed, "run seed (recorded)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 1;
    }

    try {
        if (proto_cmd->parsed()) return run_protocol(pa);
        if (morph_cmd->parsed()) return run_morph(ma);
        if (vuln_cmd->parsed()) return run_vuln(va);
        if (train_cmd->parsed()) return run_mad_train(ta);
        if (eval_cmd->parsed()) return run_mad_eval(ea);
        if (report_cmd->parsed()) return run_report(ra);
        std::cerr << app.help() << std::endl;
        return 1;
    } catch (const ValidationError& e) {
        std::cerr << "error: " << e.what() << std::endl;
        return 1;
    } catch (const ParseError& e) {
        std::cerr << "error: " << e.what() << std::endl;
        return 1;
    } catch (const ProtocolError& e) {
        std::cerr << "error: " << e.what() << std::endl;
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "runtime error: " << e.what() << std::endl;
        return 2;
    }
}

} // namespace morphforge::cli
