#include "morphforge/errors.hpp"
#include "morphforge/mad.hpp"
#include "morphforge/reference_context.hpp"
#include "morphforge/util.hpp"

#include "oracles.hpp"
#include "test_util.hpp"

#include <doctest.h>

using namespace morphforge;
using namespace morphforge::mad;
using test::TempDir;

TEST_CASE("color_transform hand values") {
    FaceImage img(8, 8);

    SUBCASE("gray maps to centered YCbCr") {
        for (auto& v : img.pixels) v = 0.5;
        const auto planes = color_transform(img, ColorSpace::YCbCr);
        CHECK(planes[0].at(3, 3) == doctest::Approx(0.5).epsilon(1e-12));
        CHECK(planes[1].at(3, 3) == doctest::Approx(0.5).epsilon(1e-12));
        CHECK(planes[2].at(3, 3) == doctest::Approx(0.5).epsilon(1e-12));
    }

    SUBCASE("RGB is a pass-through") {
        Rng rng(41);
        FaceImage rnd = test::random_image(rng, 8, 8);
        const auto planes = color_transform(rnd, ColorSpace::RGB);
        for (int y = 0; y < 8; ++y)
            for (int x = 0; x < 8; ++x)
                for (int c = 0; c < 3; ++c)
                    CHECK(planes[static_cast<size_t>(c)].at(x, y) == rnd.at(x, y, c));
    }

    SUBCASE("pure red luma is the BT.601 coefficient") {
        for (int y = 0; y < 8; ++y)
            for (int x = 0; x < 8; ++x) {
                img.at(x, y, 0) = 1.0;
                img.at(x, y, 1) = 0.0;
                img.at(x, y, 2) = 0.0;
            }
        const auto planes = color_transform(img, ColorSpace::YCbCr);
        CHECK(planes[0].at(0, 0) == doctest::Approx(0.299).epsilon(1e-12));
        CHECK(planes[2].at(0, 0) == doctest::Approx(1.0).epsilon(1e-9)); // Cr 0.5+0.701/1.402
    }

    SUBCASE("HSV of gray has zero saturation") {
        for (auto& v : img.pixels) v = 0.5;
        const auto planes = color_transform(img, ColorSpace::HSV);
        CHECK(planes[0].at(1, 1) == 0.0);
        CHECK(planes[1].at(1, 1) == 0.0);
        CHECK(planes[2].at(1, 1) == doctest::Approx(0.5));
    }

    SUBCASE("outputs stay in [0,1] for random images") {
        Rng rng(42);
        const FaceImage rnd = test::random_image(rng, 8, 8);
        for (ColorSpace cs : {ColorSpace::RGB, ColorSpace::YCbCr, ColorSpace::HSV}) {
            for (const auto& plane : color_transform(rnd, cs))
                for (double v : plane.values) {
                    CHECK(v >= 0.0);
                    CHECK(v <= 1.0);
                }
        }
    }
}

TEST_CASE("gaussian_pyramid") {
    SUBCASE("one level returns the input") {
        Plane p(8, 8, 0.25);
        const auto pyr = gaussian_pyramid(p, 1);
        REQUIRE(pyr.size() == 1);
        CHECK(pyr[0].values == p.values);
    }

    SUBCASE("constant planes stay constant across levels") {
        Plane p(16, 16, 0.3);
        const auto pyr = gaussian_pyramid(p, 3);
        REQUIRE(pyr.size() == 3);
        for (const auto& level : pyr)
            for (double v : level.values) CHECK(v == doctest::Approx(0.3).epsilon(1e-12));
        CHECK(pyr[1].width == 8);
        CHECK(pyr[2].width == 4);
    }

    SUBCASE("8x8 ramp matches direct convolution + decimation") {
        Plane ramp(8, 8);
        for (int y = 0; y < 8; ++y)
            for (int x = 0; x < 8; ++x) ramp.at(x, y) = (x + 8.0 * y) / 64.0;
        const auto pyr = gaussian_pyramid(ramp, 2);
        const Plane expect = test::oracle_blur_decimate(ramp);
        REQUIRE(pyr[1].width == expect.width);
        REQUIRE(pyr[1].height == expect.height);
        for (size_t i = 0; i < expect.values.size(); ++i)
            CHECK(pyr[1].values[i] == doctest::Approx(expect.values[i]).epsilon(1e-6));
    }

    SUBCASE("rejects too-small planes") {
        Plane tiny(2, 2, 0.1);
        CHECK_THROWS_AS(gaussian_pyramid(tiny, 3), ValidationError);
        CHECK_THROWS_AS(gaussian_pyramid(tiny, 0), ValidationError);
    }
}

TEST_CASE("lbp_histogram") {
    SUBCASE("constant plane puts all mass in bin 255") {
        Plane p(8, 8, 0.4);
        const auto hist = lbp_histogram(p, 1);
        REQUIRE(hist.size() == 256);
        CHECK(hist[255] == doctest::Approx(1.0));
        for (int i = 0; i < 255; ++i) CHECK(hist[static_cast<size_t>(i)] == 0.0);
    }

    SUBCASE("histogram sums to one") {
        Rng rng(43);
        Plane p(10, 9);
        for (auto& v : p.values) v = rng.next_unit();
        for (int radius : {1, 2}) {
            const auto hist = lbp_histogram(p, radius);
            double sum = 0.0;
            for (double v : hist) sum += v;
            CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
        }
    }

    SUBCASE("bright-center 5x5 plane: frozen codes") {
        Plane p(5, 5, 0.0);
        p.at(2, 2) = 1.0;
        // The 8 off-center interior pixels see only values >= their own 0,
        // so they code 255; the bright center sees only smaller values -> 0.
        const auto hist = lbp_histogram(p, 1);
        CHECK(hist[255] == doctest::Approx(8.0 / 9.0));
        CHECK(hist[0] == doctest::Approx(1.0 / 9.0));

        // Cross-check every interior code against the independent oracle.
        for (int y = 1; y <= 3; ++y)
            for (int x = 1; x <= 3; ++x) {
                const int want = (x == 2 && y == 2) ? 0 : 255;
                CHECK(test::oracle_lbp_code(p, x, y, 1) == want);
            }
    }

    SUBCASE("random planes match the independent per-pixel oracle") {
        Rng rng(44);
        for (int trial = 0; trial < 5; ++trial) {
            Plane p(9, 8);
            for (auto& v : p.values) v = rng.next_unit();
            const auto hist = lbp_histogram(p, 1);
            std::vector<double> expect(256, 0.0);
            int count = 0;
            for (int y = 1; y < 7; ++y)
                for (int x = 1; x < 8; ++x) {
                    expect[static_cast<size_t>(test::oracle_lbp_code(p, x, y, 1))] += 1.0;
                    ++count;
                }
            for (auto& v : expect) v /= count;
            for (int i = 0; i < 256; ++i)
                CHECK(hist[static_cast<size_t>(i)] ==
                      doctest::Approx(expect[static_cast<size_t>(i)]).epsilon(1e-12));
        }
    }

    SUBCASE("rejects too-small planes") {
        Plane p(3, 3, 0.5);
        CHECK_THROWS_AS(lbp_histogram(p, 1), ValidationError);
    }
}

TEST_CASE("extract_features block structure") {
    Rng rng(45);
    const FaceImage img = test::random_image(rng, 16, 16);
    FeatureConfig cfg;
    cfg.pyramid_levels = 2;
    const auto blocks = extract_features(img, cfg);
    CHECK(static_cast<int>(blocks.size()) == cfg.block_count());
    CHECK(blocks.size() == 3u * 3u * 2u * 2u);
    for (const auto& b : blocks) CHECK(b.size() == 256);

    const auto again = extract_features(img, cfg);
    for (size_t i = 0; i < blocks.size(); ++i) CHECK(blocks[i] == again[i]); // bit-exact
}

namespace {

/// Two LBP-separable classes: smooth ramps (codes collapse onto a few
/// bins) versus full-range noise (codes spread everywhere). Plain
/// brightness differences would NOT separate: LBP only sees local order.
void make_separable_sets(Rng& rng, int n, std::vector<FaceImage>& attacks,
                         std::vector<FaceImage>& bonafide) {
    for (int i = 0; i < n; ++i) {
        FaceImage a(16, 16), b(16, 16);
        const double slope = 0.5 + 0.5 * rng.next_unit();
        const double offset = 0.2 * rng.next_unit();
        for (int y = 0; y < 16; ++y)
            for (int x = 0; x < 16; ++x)
                for (int c = 0; c < 3; ++c)
                    a.at(x, y, c) = std::clamp(
                        offset + slope * x / 15.0 + 0.002 * rng.next_unit(), 0.0, 1.0);
        for (auto& v : b.pixels) v = rng.next_unit();
        attacks.push_back(std::move(a));
        bonafide.push_back(std::move(b));
    }
}

} // namespace

TEST_CASE("train_mad separates separable data; D-EER 0 on training set") {
    Rng rng(46);
    std::vector<FaceImage> attacks, bonafide;
    make_separable_sets(rng, 10, attacks, bonafide);
    FeatureConfig cfg;
    cfg.pyramid_levels = 2;
    const MadModel model = train_mad(attacks, bonafide, cfg);

    std::vector<double> attack_scores, bonafide_scores;
    for (const auto& img : attacks) attack_scores.push_back(mad_score(img, model));
    for (const auto& img : bonafide) bonafide_scores.push_back(mad_score(img, model));
    const DetReport det = det_metrics(attack_scores, bonafide_scores);
    CHECK(det.d_eer == doctest::Approx(0.0).epsilon(1e-9));
}

TEST_CASE("label-shuffled training scores like chance on held-out data") {
    // Permutation baseline: when labels carry no signal, held-out D-EER
    // must hover around 0.5.
    Rng rng(460);
    FeatureConfig cfg;
    cfg.color_spaces = {ColorSpace::RGB};
    cfg.pyramid_levels = 1;
    cfg.lbp_radii = {1};

    std::vector<FaceImage> pool;
    for (int i = 0; i < 160; ++i) {
        FaceImage img(16, 16);
        for (auto& v : img.pixels) v = rng.next_unit();
        pool.push_back(std::move(img));
    }

    double eer_sum = 0.0;
    for (uint64_t seed = 0; seed < 10; ++seed) {
        Rng shuffle_rng(seed * 977 + 13);
        std::vector<size_t> order(pool.size());
        for (size_t i = 0; i < order.size(); ++i) order[i] = i;
        shuffle_rng.shuffle(order);

        // First half trains with arbitrary labels, second half evaluates.
        std::vector<FaceImage> train_a, train_b, eval_a, eval_b;
        for (size_t i = 0; i < order.size(); ++i) {
            const FaceImage& img = pool[order[i]];
            if (i < 40) train_a.push_back(img);
            else if (i < 80) train_b.push_back(img);
            else if (i < 120) eval_a.push_back(img);
            else eval_b.push_back(img);
        }
        const MadModel model = train_mad(train_a, train_b, cfg);
        std::vector<double> sa, sb;
        for (const auto& img : eval_a) sa.push_back(mad_score(img, model));
        for (const auto& img : eval_b) sb.push_back(mad_score(img, model));
        eer_sum += det_metrics(sa, sb).d_eer;
    }
    const double mean_eer = eer_sum / 10.0;
    CHECK(mean_eer >= 0.4);
    CHECK(mean_eer <= 0.6);
}

TEST_CASE("train_mad rejects empty classes") {
    Rng rng(47);
    std::vector<FaceImage> attacks, bonafide;
    make_separable_sets(rng, 3, attacks, bonafide);
    CHECK_THROWS_AS(train_mad({}, bonafide, FeatureConfig{}), ValidationError);
    CHECK_THROWS_AS(train_mad(attacks, {}, FeatureConfig{}), ValidationError);
}

TEST_CASE("mad_score is the mean of per-block outputs") {
    FeatureConfig cfg;
    cfg.color_spaces = {ColorSpace::RGB};
    cfg.pyramid_levels = 1;
    cfg.lbp_radii = {1};
    // 3 blocks (RGB channels x 1 level x 1 radius); zero weights, biases
    // 0.2/0.4/0.6 -> score 0.4 for any image.
    MadModel model;
    model.config = cfg;
    for (double bias : {0.2, 0.4, 0.6}) {
        BlockClassifier c;
        c.weights = Eigen::VectorXd::Zero(256);
        c.bias = bias;
        model.classifiers.push_back(std::move(c));
    }
    Rng rng(48);
    const FaceImage img = test::random_image(rng, 8, 8);
    CHECK(mad_score(img, model) == doctest::Approx(0.4).epsilon(1e-12));
    CHECK(mad_score(img, model) == mad_score(img, model));

    // Single block, zero weights, bias 0.7 -> 0.7 regardless of the image.
    MadModel single;
    single.config = cfg;
    single.config.color_spaces = {ColorSpace::RGB};
    MadModel one;
    one.config = cfg;
    one.classifiers.push_back({Eigen::VectorXd::Zero(256), 0.7});
    one.classifiers.push_back({Eigen::VectorXd::Zero(256), 0.7});
    one.classifiers.push_back({Eigen::VectorXd::Zero(256), 0.7});
    CHECK(mad_score(img, one) == doctest::Approx(0.7).epsilon(1e-12));
}

TEST_CASE("det_metrics hand cases") {
    SUBCASE("perfect separation") {
        const DetReport r = det_metrics({1.0, 1.0, 1.0}, {0.0, 0.0});
        CHECK(r.d_eer == doctest::Approx(0.0));
        CHECK(r.bpcer_at_apcer.at(0.05) == doctest::Approx(0.0));
        CHECK(r.bpcer_at_apcer.at(0.10) == doctest::Approx(0.0));
    }

    SUBCASE("identical score lists give D-EER 0.5") {
        const std::vector<double> s{0.1, 0.4, 0.4, 0.9};
        const DetReport r = det_metrics(s, s);
        CHECK(r.d_eer == doctest::Approx(0.5));
    }

    SUBCASE("three-vs-three example (frozen from the sweep oracle)") {
        const DetReport r = det_metrics({0.9, 0.8, 0.2}, {0.1, 0.3, 0.7});
        CHECK(r.d_eer == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
        CHECK(r.bpcer_at_apcer.at(0.05) == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
        CHECK(r.bpcer_at_apcer.at(0.10) == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
        REQUIRE(r.roc_points.size() == 7); // 6 distinct scores + sentinel
    }

    SUBCASE("empty inputs rejected") {
        CHECK_THROWS_AS(det_metrics({}, {0.1}), ValidationError);
        CHECK_THROWS_AS(det_metrics({0.1}, {}), ValidationError);
    }
}

TEST_CASE("det_metrics equals the brute-force sweep oracle exactly") {
    Rng rng(49);
    for (int trial = 0; trial < 200; ++trial) {
        const int na = 1 + static_cast<int>(rng.next_below(100));
        const int nb = 1 + static_cast<int>(rng.next_below(100));
        std::vector<double> attacks, bonafide;
        for (int i = 0; i < na; ++i)
            attacks.push_back(rng.next_below(5) == 0 ? 0.5 : rng.uniform(0.0, 1.0));
        for (int i = 0; i < nb; ++i)
            bonafide.push_back(rng.next_below(5) == 0 ? 0.5 : rng.uniform(0.0, 1.0));
        const DetReport got = det_metrics(attacks, bonafide);
        const test::OracleDet want = test::oracle_det(attacks, bonafide);
        CHECK(got.d_eer == want.d_eer);
        CHECK(got.bpcer_at_apcer.at(0.05) == want.bpcer_at_05);
        CHECK(got.bpcer_at_apcer.at(0.10) == want.bpcer_at_10);
        REQUIRE(got.roc_points.size() == want.roc.size());
        for (size_t i = 0; i < want.roc.size(); ++i) {
            CHECK(got.roc_points[i].tau == want.roc[i][0]);
            CHECK(got.roc_points[i].apcer == want.roc[i][1]);
            CHECK(got.roc_points[i].bpcer == want.roc[i][2]);
        }
    }
}

TEST_CASE("roc is monotone: APCER up, BPCER down") {
    Rng rng(50);
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<double> attacks, bonafide;
        for (int i = 0; i < 30; ++i) {
            attacks.push_back(rng.normal());
            bonafide.push_back(rng.normal() - 0.5);
        }
        const DetReport r = det_metrics(attacks, bonafide);
        for (size_t i = 1; i < r.roc_points.size(); ++i) {
            CHECK(r.roc_points[i].apcer >= r.roc_points[i - 1].apcer);
            CHECK(r.roc_points[i].bpcer <= r.roc_points[i - 1].bpcer);
        }
        CHECK(r.d_eer >= 0.0);
        CHECK(r.d_eer <= 1.0);
    }
}

TEST_CASE("cross_set_evaluate") {
    Rng rng(51);
    std::vector<FaceImage> attacks, bonafide;
    make_separable_sets(rng, 8, attacks, bonafide);
    FeatureConfig cfg;
    cfg.color_spaces = {ColorSpace::RGB};
    cfg.pyramid_levels = 1;
    cfg.lbp_radii = {1};
    const MadModel model = train_mad(attacks, bonafide, cfg);

    SUBCASE("1x1 grid reduces to det_metrics") {
        std::map<std::string, MadModel> models{{"a", model}};
        std::map<std::string, std::vector<FaceImage>> tests{{"a", attacks}};
        const MadGrid grid = cross_set_evaluate(models, tests, bonafide);
        REQUIRE(grid.cells.size() == 1);

        std::vector<double> as, bs;
        for (const auto& img : attacks) as.push_back(mad_score(img, model));
        for (const auto& img : bonafide) bs.push_back(mad_score(img, model));
        const DetReport direct = det_metrics(as, bs);
        CHECK(grid.cell(0, 0).d_eer == direct.d_eer);
        CHECK(grid.cell(0, 0).roc_points.size() == direct.roc_points.size());
    }

    SUBCASE("full grid shape and known-attack diagonal") {
        std::vector<FaceImage> attacks2, bonafide2;
        make_separable_sets(rng, 8, attacks2, bonafide2);
        std::map<std::string, MadModel> models{
            {"a", model}, {"b", train_mad(attacks2, bonafide, cfg)}};
        std::map<std::string, std::vector<FaceImage>> tests{{"a", attacks}, {"b", attacks2}};
        const MadGrid grid = cross_set_evaluate(models, tests, bonafide);
        CHECK(grid.train_types == std::vector<std::string>{"a", "b"});
        CHECK(grid.test_types == std::vector<std::string>{"a", "b"});
        REQUIRE(grid.cells.size() == 4);
        // Diagonal cells are the "known attack" configuration.
        CHECK(grid.cell(0, 0).d_eer <= grid.cell(0, 1).d_eer + 1.0); // defined, in range
    }
}

TEST_CASE("model JSON round trip") {
    TempDir dir("madmodel");
    Rng rng(52);
    std::vector<FaceImage> attacks, bonafide;
    make_separable_sets(rng, 6, attacks, bonafide);
    FeatureConfig cfg;
    cfg.pyramid_levels = 2;
    cfg.lbp_radii = {1};
    const MadModel model = train_mad(attacks, bonafide, cfg);
    save_mad_model(model, dir.path() / "m.json");
    const MadModel back = load_mad_model(dir.path() / "m.json");

    CHECK(back.config.pyramid_levels == 2);
    CHECK(back.classifiers.size() == model.classifiers.size());
    // Weights travel as f32; scores agree to f32 precision.
    const FaceImage probe = test::random_image(rng, 16, 16);
    CHECK(mad_score(probe, back) ==
          doctest::Approx(mad_score(probe, model)).epsilon(1e-5));

    // Two saves of the same model are byte-identical.
    save_mad_model(model, dir.path() / "m2.json");
    CHECK(file_digest(dir.path() / "m.json") == file_digest(dir.path() / "m2.json"));
}

TEST_CASE("detection reference context carries the published constants") {
    const auto ctx = detection_reference_context();
    CHECK(ctx.at("reproduced") == false);
    const auto& det = ctx.at("regen_morph_detection");
    CHECK(det.at("known_attack").at("ensemble_deer_percent") == 0.00);
    CHECK(det.at("known_attack").at("hybrid_deer_percent") == 2.48);
    CHECK(det.at("cross_set_trained_on_mipgan2").at("hybrid_deer_percent") == 50.00);
    CHECK(det.at("cross_set_trained_on_mipgan2").at("ensemble_deer_percent") == 33.34);
}
