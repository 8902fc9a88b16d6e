// End-to-end checks of the command-line surface, driving the real
// binaries over a small synthetic dataset.

#include "morphforge/protocol.hpp"
#include "morphforge/util.hpp"

#include "test_util.hpp"

#include <doctest.h>

#include <nlohmann/json.hpp>

#include <cstdlib>
#include <fstream>
#include <string>

using namespace morphforge;
using test::TempDir;

namespace {

int run_cmd(const std::string& cmd) {
    const int rc = std::system(cmd.c_str());
    return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

std::string q(const std::filesystem::path& p) { return "'" + p.string() + "'"; }

/// Dataset + protocol shared by the CLI cases (built once).
struct CliFixture {
    TempDir dir{"cli"};
    std::filesystem::path data;
    std::filesystem::path proto;

    CliFixture() {
        data = dir.path() / "data";
        proto = dir.path() / "protocol.json";
        REQUIRE(run_cmd(std::string(SYNTH_BIN) + " --out " + q(data) +
                        " --identities 6 --size 32 --seed 3 >/dev/null") == 0);
        REQUIRE(run_cmd(std::string(MORPHFORGE_BIN) + " protocol --manifest " +
                        q(data / "manifest.json") + " --seed 11 --out " + q(proto) +
                        " >/dev/null") == 0);
    }
};

CliFixture& fixture() {
    static CliFixture f;
    return f;
}

} // namespace

TEST_CASE("protocol subcommand writes a valid split protocol plus run record") {
    auto& f = fixture();
    const auto manifest = protocol::load_manifest(f.data / "manifest.json");
    const auto proto = protocol::load_protocol(f.proto);
    CHECK_NOTHROW(protocol::validate_split_protocol(proto, manifest));
    CHECK(proto.train_identities.size() == 3);
    CHECK(proto.test_identities.size() == 3);

    const auto run = nlohmann::json::parse(read_text_file(f.dir.path() / "run.json"));
    CHECK(run.at("subcommand") == "protocol");
    CHECK(run.at("seed") == 11);
    CHECK(run.contains("timestamp_utc"));
    CHECK(run.at("inputs").size() >= 1);
}

TEST_CASE("protocol count expectations gate the exit code") {
    auto& f = fixture();
    const auto proto = protocol::load_protocol(f.proto);
    const long train_pairs = static_cast<long>(proto.pairs_for(protocol::Split::Train).size());
    const std::string base = std::string(MORPHFORGE_BIN) + " protocol --manifest " +
                             q(f.data / "manifest.json") + " --seed 11 --out " +
                             q(f.dir.path() / "p2.json");
    CHECK(run_cmd(base + " --expect-train-pairs " + std::to_string(train_pairs) +
                  " >/dev/null") == 0);
    CHECK(run_cmd(base + " --expect-train-pairs " + std::to_string(train_pairs + 5) +
                  " >/dev/null") == 1);
}

TEST_CASE("morph --method lma is deterministic across runs") {
    auto& f = fixture();
    const std::string base = std::string(MORPHFORGE_BIN) + " morph --method lma --pairs " +
                             q(f.proto) + " --manifest " + q(f.data / "manifest.json") +
                             " --landmarks " + q(f.data / "landmarks") + " --seed 5 --out ";
    const auto out1 = f.dir.path() / "lma1";
    const auto out2 = f.dir.path() / "lma2";
    REQUIRE(run_cmd(base + q(out1) + " >/dev/null") == 0);
    REQUIRE(run_cmd(base + q(out2) + " >/dev/null") == 0);

    const auto proto = protocol::load_protocol(f.proto);
    int files = 0;
    for (const auto& pair : proto.pairs) {
        const std::string name = pair.a_id + "_" + pair.b_id + "_lma.png";
        REQUIRE(std::filesystem::exists(out1 / name));
        CHECK(file_digest(out1 / name) == file_digest(out2 / name));
        ++files;
    }
    CHECK(files == static_cast<int>(proto.pairs.size()));
}

TEST_CASE("vuln -> mad-train -> mad-eval -> report chain") {
    auto& f = fixture();
    const auto lma_dir = f.dir.path() / "lma1"; // produced above
    REQUIRE(std::filesystem::exists(lma_dir));

    const auto vuln_path = f.dir.path() / "vuln" / "lma.json";
    REQUIRE(run_cmd(std::string(MORPHFORGE_BIN) + " vuln --protocol " + q(f.proto) +
                    " --manifest " + q(f.data / "manifest.json") + " --morphs " + q(lma_dir) +
                    " --attack lma --target-fmr 0.05 --out " + q(vuln_path) + " >/dev/null") == 0);
    const auto vr = nlohmann::json::parse(read_text_file(vuln_path));
    CHECK(vr.at("attack") == "lma");
    CHECK(vr.at("tau").is_number());
    CHECK(vr.at("mmpmr").get<double>() >= 0.0);
    CHECK(vr.at("mmpmr").get<double>() <= 1.0);
    CHECK(vr.at("reference_context").at("reproduced") == false);
    CHECK(std::filesystem::exists(f.dir.path() / "vuln" / "scatter_lma_toy-pixel.csv"));
    CHECK(std::filesystem::exists(f.dir.path() / "vuln" / "scores_lma_toy-pixel.csv"));

    const auto model_path = f.dir.path() / "mad" / "lma.json";
    REQUIRE(run_cmd(std::string(MORPHFORGE_BIN) + " mad-train --protocol " + q(f.proto) +
                    " --manifest " + q(f.data / "manifest.json") + " --morphs " + q(lma_dir) +
                    " --attack lma --pyramid-levels 2 --out " + q(model_path) +
                    " >/dev/null") == 0);
    CHECK(std::filesystem::exists(model_path));

    const auto grid_path = f.dir.path() / "mad" / "grid.json";
    REQUIRE(run_cmd(std::string(MORPHFORGE_BIN) + " mad-eval --protocol " + q(f.proto) +
                    " --manifest " + q(f.data / "manifest.json") + " --model lma=" +
                    model_path.string() + " --attack lma=" + lma_dir.string() + " --out " +
                    q(grid_path) + " >/dev/null") == 0);
    const auto grid = nlohmann::json::parse(read_text_file(grid_path));
    REQUIRE(grid.at("cells").size() == 1);
    CHECK(grid.at("cells")[0].at("known_attack") == true);
    CHECK(grid.at("cells")[0].at("report").at("d_eer").is_number());
    CHECK(grid.at("reference_context").at("reproduced") == false);
    CHECK(std::filesystem::exists(f.dir.path() / "mad" / "mad_scores_lma.csv"));

    const auto plots1 = f.dir.path() / "plots1";
    const auto plots2 = f.dir.path() / "plots2";
    const std::string report_cmd = std::string(MORPHFORGE_BIN) + " report --vuln " +
                                   q(vuln_path) + " --mad " + q(grid_path) + " --out ";
    REQUIRE(run_cmd(report_cmd + q(plots1) + " >/dev/null") == 0);
    REQUIRE(run_cmd(report_cmd + q(plots2) + " >/dev/null") == 0);
    for (const auto& name :
         {"scatter_lma_toy-pixel.csv", "det_lma_vs_lma.csv", "plots.json"}) {
        REQUIRE(std::filesystem::exists(plots1 / name));
        CHECK(file_digest(plots1 / name) == file_digest(plots2 / name));
    }
}

TEST_CASE("unknown subcommand exits 1 with usage on stderr") {
    auto& f = fixture();
    const auto err_file = f.dir.path() / "stderr.txt";
    const int rc = run_cmd(std::string(MORPHFORGE_BIN) + " frobnicate 2>" + q(err_file) +
                           " >/dev/null");
    CHECK(rc == 1);
    const std::string err = read_text_file(err_file);
    CHECK(err.find("Usage") != std::string::npos);
}

TEST_CASE("unknown flag exits 1") {
    CHECK(run_cmd(std::string(MORPHFORGE_BIN) +
                  " protocol --manifest x.json --out y.json --bogus 2>/dev/null") == 1);
}

TEST_CASE("missing input file is a runtime error (exit 2)") {
    auto& f = fixture();
    CHECK(run_cmd(std::string(MORPHFORGE_BIN) + " protocol --manifest " +
                  q(f.dir.path() / "no-such.json") + " --out " + q(f.dir.path() / "x.json") +
                  " 2>/dev/null") == 2);
}

TEST_CASE("malformed manifest is a validation error (exit 1)") {
    auto& f = fixture();
    const auto bad = f.dir.path() / "bad_manifest.json";
    atomic_write_file(bad, std::string("{\"identities\": [], \"oops\": 1}"));
    CHECK(run_cmd(std::string(MORPHFORGE_BIN) + " protocol --manifest " + q(bad) + " --out " +
                  q(f.dir.path() / "x.json") + " 2>/dev/null") == 1);
}
