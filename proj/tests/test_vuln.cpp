#include "morphforge/errors.hpp"
#include "morphforge/reference_context.hpp"
#include "morphforge/util.hpp"
#include "morphforge/vuln.hpp"

#include "oracles.hpp"
#include "test_util.hpp"

#include <doctest.h>

#include <nlohmann/json.hpp>

using namespace morphforge;
using namespace morphforge::vuln;
using test::TempDir;

namespace {

/// Embedding = single mean pixel; similarity = -|mean difference|.
class MeanPixelBackend final : public RecognitionBackend {
public:
    Eigen::VectorXd embed(const FaceImage& img) const override {
        double m = 0.0;
        for (double v : img.pixels) m += v;
        Eigen::VectorXd e(1);
        e << m / static_cast<double>(img.pixels.size());
        return e;
    }
    double compare(const Eigen::VectorXd& a, const Eigen::VectorXd& b) const override {
        return -std::abs(a(0) - b(0));
    }
    std::string name() const override { return "mean-pixel"; }
};

ScoreTable random_table(Rng& rng, int n_morphs, int probes_per_subject) {
    ScoreTable t;
    for (int m = 0; m < n_morphs; ++m) {
        for (int s = 0; s < 2; ++s) {
            for (int p = 0; p < probes_per_subject; ++p) {
                t.rows.push_back({"m" + std::to_string(m),
                                  "m" + std::to_string(m) + "_s" + std::to_string(s),
                                  "p" + std::to_string(p), rng.uniform(-1.0, 1.0)});
            }
        }
    }
    return t;
}

} // namespace

TEST_CASE("score_morphs row counting and hand-computed scores") {
    const MeanPixelBackend backend;
    std::vector<MorphRecord> morphs(1);
    morphs[0].morph_id = "m0";
    morphs[0].image = FaceImage(8, 8, 0.5);
    morphs[0].subject_a = "a";
    morphs[0].subject_b = "b";
    morphs[0].source_img_a = "a_src";
    morphs[0].source_img_b = "b_src";

    std::map<std::string, std::vector<ProbeImage>> probes;
    probes["a"] = {{"a_p0", FaceImage(8, 8, 0.25)}, {"a_p1", FaceImage(8, 8, 0.75)}};
    probes["b"] = {{"b_p0", FaceImage(8, 8, 0.5)}, {"b_p1", FaceImage(8, 8, 1.0)}};

    const ScoreTable table = score_morphs(morphs, probes, backend);
    REQUIRE(table.rows.size() == 4);
    // -|0.5 - mean| for each probe
    for (const auto& row : table.rows) {
        if (row.probe_id == "a_p0") CHECK(row.score == doctest::Approx(-0.25));
        if (row.probe_id == "a_p1") CHECK(row.score == doctest::Approx(-0.25));
        if (row.probe_id == "b_p0") CHECK(row.score == doctest::Approx(0.0));
        if (row.probe_id == "b_p1") CHECK(row.score == doctest::Approx(-0.5));
    }
}

TEST_CASE("score_morphs rejects probes that were morph sources") {
    const MeanPixelBackend backend;
    std::vector<MorphRecord> morphs(1);
    morphs[0].morph_id = "m0";
    morphs[0].image = FaceImage(8, 8, 0.5);
    morphs[0].subject_a = "a";
    morphs[0].subject_b = "b";
    morphs[0].source_img_a = "a_src";
    morphs[0].source_img_b = "b_src";

    std::map<std::string, std::vector<ProbeImage>> probes;
    probes["a"] = {{"a_src", FaceImage(8, 8, 0.25)}};
    probes["b"] = {{"b_p0", FaceImage(8, 8, 0.5)}};
    CHECK_THROWS_AS(score_morphs(morphs, probes, backend), ProtocolError);

    std::map<std::string, std::vector<ProbeImage>> missing;
    missing["a"] = {{"a_p0", FaceImage(8, 8, 0.25)}};
    CHECK_THROWS_AS(score_morphs(morphs, missing, backend), ProtocolError);
}

TEST_CASE("fmr_threshold on the ladder of ten scores") {
    std::vector<double> scores;
    for (int i = 1; i <= 10; ++i) scores.push_back(i / 10.0);
    const Threshold t = fmr_threshold(scores, 0.10);
    CHECK(t.tau == doctest::Approx(0.9));
    CHECK(t.achieved_fmr == doctest::Approx(0.10));
}

TEST_CASE("fmr_threshold with all-equal scores") {
    const std::vector<double> scores(12, 0.5);
    const Threshold t = fmr_threshold(scores, 0.1);
    CHECK(t.tau == 0.5);
    CHECK(t.achieved_fmr == 0.0);
}

TEST_CASE("fmr_threshold order-statistic bound at FMR 0.1%") {
    Rng rng(31337);
    std::vector<double> scores;
    for (int i = 0; i < 2000; ++i) scores.push_back(rng.normal());
    const Threshold t = fmr_threshold(scores, 0.001);
    long above = 0;
    for (double s : scores)
        if (s > t.tau) ++above;
    CHECK(above <= 2); // floor(0.001 * 2000)
}

TEST_CASE("fmr_threshold matches the brute-force oracle and is maximal") {
    Rng rng(32);
    for (int trial = 0; trial < 200; ++trial) {
        const int n = 1 + static_cast<int>(rng.next_below(100));
        std::vector<double> scores;
        for (int i = 0; i < n; ++i)
            scores.push_back(rng.next_below(4) == 0 ? 0.5 : rng.uniform(-1.0, 1.0));
        const double target = rng.uniform(0.01, 0.5);
        const Threshold got = fmr_threshold(scores, target);
        const Threshold want = test::oracle_fmr_threshold(scores, target);
        CHECK(got.tau == want.tau);
        CHECK(got.achieved_fmr == want.achieved_fmr);
        CHECK(got.achieved_fmr <= target);

        // Maximality: stepping tau down to the next lower distinct score
        // violates the target.
        std::vector<double> lower;
        for (double s : scores)
            if (s < got.tau) lower.push_back(s);
        if (!lower.empty()) {
            const double tau2 = *std::max_element(lower.begin(), lower.end());
            long above = 0;
            for (double s : scores)
                if (s > tau2) ++above;
            CHECK(static_cast<double>(above) / static_cast<double>(n) > target);
        }
    }
    CHECK_THROWS_AS(fmr_threshold({}, 0.1), ValidationError);
    CHECK_THROWS_AS(fmr_threshold({0.1}, 0.0), ValidationError);
}

TEST_CASE("mmpmr hand cases") {
    ScoreTable t;
    t.rows = {
        {"m1", "s1", "p0", 0.7}, {"m1", "s2", "p0", 0.6},
        {"m2", "s3", "p0", 0.7}, {"m2", "s4", "p0", 0.4},
    };
    CHECK(mmpmr(t, 0.5) == doctest::Approx(0.5));
    CHECK(mmpmr(t, 0.3) == doctest::Approx(1.0)); // all scores above
    CHECK(mmpmr(t, 0.8) == doctest::Approx(0.0)); // all scores at/below
}

TEST_CASE("mmpmr/fmmpmr agree exactly with brute-force oracles") {
    Rng rng(33);
    for (int trial = 0; trial < 200; ++trial) {
        const int morphs = 1 + static_cast<int>(rng.next_below(50));
        const int probes = 1 + static_cast<int>(rng.next_below(4));
        const ScoreTable t = random_table(rng, morphs, probes);
        const double tau = rng.uniform(-1.0, 1.0);
        CHECK(mmpmr(t, tau) == test::oracle_mmpmr(t, tau));
        const auto attempts = paired_attempts_from_table(t);
        CHECK(fmmpmr(attempts, tau) == test::oracle_fmmpmr(attempts, tau));
    }
}

TEST_CASE("mmpmr/fmmpmr monotone non-increasing in tau; fmmpmr <= mmpmr") {
    Rng rng(34);
    for (int trial = 0; trial < 50; ++trial) {
        const ScoreTable t = random_table(rng, 2 + static_cast<int>(rng.next_below(20)),
                                          1 + static_cast<int>(rng.next_below(3)));
        const auto attempts = paired_attempts_from_table(t);
        double prev_m = 1.1, prev_f = 1.1;
        for (double tau = -1.2; tau <= 1.2; tau += 0.1) {
            const double m = mmpmr(t, tau);
            const double f = fmmpmr(attempts, tau);
            CHECK(m <= prev_m + 1e-12);
            CHECK(f <= prev_f + 1e-12);
            CHECK(f <= m + 1e-12);
            prev_m = m;
            prev_f = f;
        }
    }
}

TEST_CASE("fmmpmr basics") {
    std::vector<std::vector<std::array<double, 2>>> attempts{
        {{0.7, 0.6}, {0.8, 0.4}},
    };
    CHECK(fmmpmr(attempts, 0.5) == doctest::Approx(0.5));
    CHECK(fmmpmr(attempts, 0.3) == doctest::Approx(1.0));
    CHECK(fmmpmr(attempts, 0.75) == doctest::Approx(0.0));
    CHECK_THROWS_AS(fmmpmr({}, 0.5), ValidationError);
}

TEST_CASE("paired attempts truncate to the shorter probe list") {
    ScoreTable t;
    t.rows = {
        {"m", "s1", "p0", 0.1}, {"m", "s1", "p1", 0.2}, {"m", "s1", "p2", 0.3},
        {"m", "s2", "p0", 0.5}, {"m", "s2", "p1", 0.6},
    };
    const auto attempts = paired_attempts_from_table(t);
    REQUIRE(attempts.size() == 1);
    REQUIRE(attempts[0].size() == 2);
    CHECK(attempts[0][0][0] == 0.1);
    CHECK(attempts[0][0][1] == 0.5);
    CHECK(attempts[0][1][0] == 0.2);
    CHECK(attempts[0][1][1] == 0.6);
}

TEST_CASE("vulnerability_report") {
    ScoreTable t;
    t.rows = {{"m", "a", "p0", 0.9}, {"m", "b", "p0", 0.8}};

    SUBCASE("single morph above threshold on both axes -> 100%") {
        const VulnReport r = vulnerability_report("lma", "toy", t, {0.5, 0.001});
        CHECK(r.mmpmr == 1.0);
        CHECK(r.fmmpmr == 1.0);
        REQUIRE(r.scatter.size() == 1);
        CHECK(r.scatter[0][0] == 0.9);
        CHECK(r.scatter[0][1] == 0.8);
    }

    SUBCASE("missing threshold is a protocol error") {
        Threshold bad;
        bad.tau = std::numeric_limits<double>::quiet_NaN();
        CHECK_THROWS_AS(vulnerability_report("lma", "toy", t, bad), ProtocolError);
    }

    SUBCASE("random tables: report equals independent recount") {
        Rng rng(35);
        for (int trial = 0; trial < 20; ++trial) {
            const ScoreTable table = random_table(rng, 100, 2);
            const double tau = rng.uniform(-0.5, 0.5);
            const VulnReport r = vulnerability_report("x", "y", table, {tau, 0.0});
            CHECK(r.mmpmr == test::oracle_mmpmr(table, tau));
            CHECK(r.scatter.size() == 100);
        }
    }
}

TEST_CASE("score table CSV round trip") {
    TempDir dir("scores");
    Rng rng(36);
    const ScoreTable t = random_table(rng, 5, 2);
    save_score_table(t, dir.path() / "t.csv");
    const ScoreTable back = load_score_table(dir.path() / "t.csv");
    REQUIRE(back.rows.size() == t.rows.size());
    for (size_t i = 0; i < t.rows.size(); ++i) {
        CHECK(back.rows[i].morph_id == t.rows[i].morph_id);
        CHECK(back.rows[i].score == t.rows[i].score); // exact via round-trip formatting
    }
}

TEST_CASE("vulnerability report JSON embeds the published reference context") {
    TempDir dir("vulnjson");
    ScoreTable t;
    t.rows = {{"m", "a", "p0", 0.9}, {"m", "b", "p0", 0.8}};
    const VulnReport r = vulnerability_report("regen", "toy-pixel", t, {0.5, 0.001});
    save_vuln_report(r, dir.path() / "r.json");

    const auto j = nlohmann::json::parse(read_text_file(dir.path() / "r.json"));
    CHECK(j.at("attack") == "regen");
    CHECK(j.at("mmpmr") == 1.0);
    const auto& ctx = j.at("reference_context");
    CHECK(ctx.at("reproduced") == false);
    const auto& t1 = ctx.at("regen_morphs_at_fmr_0.1_percent");
    CHECK(t1.at("cots").at("mmpmr_percent") == 42.24);
    CHECK(t1.at("cots").at("fmmpmr_percent") == 34.47);
    CHECK(t1.at("arcface").at("mmpmr_percent") == 33.98);
    CHECK(t1.at("arcface").at("fmmpmr_percent") == 14.05);

    const VulnReport back = load_vuln_report(dir.path() / "r.json");
    CHECK(back.tau == r.tau);
    CHECK(back.scatter == r.scatter);
}
