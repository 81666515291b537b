// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>

#include "nnbarrier/report.hpp"

using namespace nnb;
namespace fs = std::filesystem;

#ifndef NNB_CLI_PATH
#define NNB_CLI_PATH "nnbarrier"
#endif
#ifndef NNB_PROBLEMS_DIR
#define NNB_PROBLEMS_DIR "problems"
#endif

namespace {

int run_cli(const std::string& args) {
    const std::string cmd = std::string(NNB_CLI_PATH) + " " + args + " > /dev/null 2>&1";
    const int rc = std::system(cmd.c_str());
    return WEXITSTATUS(rc);
}

fs::path temp_dir(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / ("nnb_cli_" + name);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

}  // namespace

TEST_CASE("certify exit codes and report") {
    const fs::path out = temp_dir("certify");
    const std::string spec = std::string(NNB_PROBLEMS_DIR) + "/identity1d.json";
    CHECK(run_cli("certify " + spec + " --out " + out.string()) == 0);

    const RunReport report = load_report((out / "certify_report.json").string());
    CHECK(report.command == "certify");
    CHECK(report.p_s >= report.threshold);
    CHECK(report.num_regions == 8);
    CHECK(report.regions.size() == 8);
    CHECK(report.spec_hash.rfind("fnv1a64:", 0) == 0);
    CHECK(report.seed == 0);

    SUBCASE("report JSON round-trips") {
        const std::string text = report_to_json(report);
        const RunReport again = report_from_json(text);
        CHECK(report_to_json(again) == text);
    }
    SUBCASE("exit 2 when certified below the threshold") {
        // Raise the threshold beyond reach.
        ProblemSpec spec_obj = load_problem(spec);
        spec_obj.threshold = 0.9999999;
        const fs::path hard = out / "hard.json";
        save_problem(spec_obj, hard.string());
        CHECK(run_cli("certify " + hard.string() + " --out " + out.string()) == 2);
    }
    SUBCASE("malformed spec exits 1") {
        const fs::path bad = out / "bad.json";
        std::ofstream(bad) << "{ not json";
        CHECK(run_cli("certify " + bad.string() + " --out " + out.string()) == 1);
    }
}

TEST_CASE("certify runs regenerate identically for a fixed seed") {
    const fs::path out = temp_dir("determinism");
    const std::string spec = std::string(NNB_PROBLEMS_DIR) + "/identity1d.json";
    REQUIRE(run_cli("certify " + spec + " --seed 3 --out " + (out / "a").string()) == 0);
    REQUIRE(run_cli("certify " + spec + " --seed 3 --out " + (out / "b").string()) == 0);
    const RunReport a = load_report((out / "a" / "certify_report.json").string());
    const RunReport b = load_report((out / "b" / "certify_report.json").string());
    CHECK(a.eta == b.eta);
    CHECK(a.beta == b.beta);
    CHECK(a.p_s == b.p_s);
    CHECK(a.barrier == b.barrier);
    for (std::size_t q = 0; q < a.regions.size(); ++q)
        CHECK(a.regions[q].beta_q == b.regions[q].beta_q);
}

TEST_CASE("interval mode never reports a higher probability than linear") {
    const fs::path out = temp_dir("modes");
    const std::string spec = std::string(NNB_PROBLEMS_DIR) + "/identity1d.json";
    REQUIRE(run_cli("certify " + spec + " --bounds linear --out " + (out / "lin").string()) == 0);
    const int rc_interval =
        run_cli("certify " + spec + " --bounds interval --out " + (out / "int").string());
    CHECK((rc_interval == 0 || rc_interval == 2));
    const RunReport lin = load_report((out / "lin" / "certify_report.json").string());
    const RunReport itv = load_report((out / "int" / "certify_report.json").string());
    CHECK(lin.p_s >= itv.p_s - 1e-6);
    CHECK(lin.mode == BoundMode::Linear);
    CHECK(itv.mode == BoundMode::Interval);
}

TEST_CASE("synthesize command") {
    const fs::path out = temp_dir("synth");
    const std::string spec = std::string(NNB_PROBLEMS_DIR) + "/drift1d.json";

    SUBCASE("spec without control section exits 1") {
        const std::string plain = std::string(NNB_PROBLEMS_DIR) + "/identity1d.json";
        CHECK(run_cli("synthesize " + plain + " --out " + out.string()) == 1);
    }
    SUBCASE("drift example reaches the threshold and writes artifacts") {
        CHECK(run_cli("synthesize " + spec + " --threads 2 --out " + out.string()) == 0);
        CHECK(fs::exists(out / "policy.csv"));
        CHECK(fs::exists(out / "synthesize_summary.json"));
        const RunReport report = load_report((out / "synthesize_report.json").string());
        REQUIRE(report.controlled_fraction.has_value());
        CHECK(*report.controlled_fraction < 1.0);
        CHECK(*report.controlled_fraction > 0.0);
        REQUIRE(report.p_s_after.has_value());
        CHECK(*report.p_s_after >= 0.95);

        // The policy file round-trips through the loader.
        const ControlPolicy policy = load_policy_csv((out / "policy.csv").string(), 1);
        CHECK(policy.entries.size() ==
              static_cast<std::size_t>(*report.controlled_fraction *
                                           static_cast<double>(report.num_regions) +
                                       0.5));

        SUBCASE("simulate with the policy dominates the certificate") {
            const int rc = run_cli("simulate " + spec + " --policy " + (out / "policy.csv").string() +
                                   " -M 2000 --threads 2 --report " +
                                   (out / "synthesize_report.json").string() + " --out " +
                                   out.string());
            CHECK(rc == 0);
            std::ifstream in(out / "simulate_report.json");
            std::string text((std::istreambuf_iterator<char>(in)), {});
            CHECK(text.find("soundness_margin") != std::string::npos);
            CHECK(text.find("\"p_hat\"") != std::string::npos);
        }
    }
}

TEST_CASE("simulate determinism and trajectory dump") {
    const fs::path out = temp_dir("sim");
    const std::string spec = std::string(NNB_PROBLEMS_DIR) + "/identity1d.json";
    REQUIRE(run_cli("simulate " + spec + " -M 1000 --seed 5 --traj 2 --out " +
                    (out / "a").string()) == 0);
    REQUIRE(run_cli("simulate " + spec + " -M 1000 --seed 5 --traj 2 --out " +
                    (out / "b").string()) == 0);
    std::ifstream fa(out / "a" / "simulate_report.json"), fb(out / "b" / "simulate_report.json");
    const std::string ta((std::istreambuf_iterator<char>(fa)), {});
    const std::string tb((std::istreambuf_iterator<char>(fb)), {});
    CHECK(ta == tb);
    CHECK(fs::exists(out / "a" / "trajectories.csv"));
    std::ifstream traj(out / "a" / "trajectories.csv");
    std::string header;
    std::getline(traj, header);
    CHECK(header == "trajectory,k,x_1,safe_flag");
}

TEST_CASE("betamap command") {
    const fs::path out = temp_dir("betamap");
    SUBCASE("2-D report yields CSV and SVG") {
        const std::string spec = std::string(NNB_PROBLEMS_DIR) + "/contraction2d.json";
        REQUIRE(run_cli("certify " + spec + " --threads 2 --out " + out.string()) == 0);
        CHECK(run_cli("betamap " + (out / "certify_report.json").string() + " --out " +
                      out.string()) == 0);
        CHECK(fs::exists(out / "betamap.csv"));
        CHECK(fs::exists(out / "betamap.svg"));
        std::ifstream svg(out / "betamap.svg");
        const std::string text((std::istreambuf_iterator<char>(svg)), {});
        CHECK(text.find("<svg") != std::string::npos);
        // One rect per region plus the background.
        std::size_t rects = 0, pos = 0;
        while ((pos = text.find("<rect", pos)) != std::string::npos) {
            ++rects;
            ++pos;
        }
        CHECK(rects == 17);
    }
    SUBCASE("1-D report yields CSV only") {
        const std::string spec = std::string(NNB_PROBLEMS_DIR) + "/identity1d.json";
        REQUIRE(run_cli("certify " + spec + " --out " + out.string()) == 0);
        CHECK(run_cli("betamap " + (out / "certify_report.json").string() + " --out " +
                      (out / "oned").string()) == 0);
        CHECK(fs::exists(out / "oned" / "betamap.csv"));
        CHECK_FALSE(fs::exists(out / "oned" / "betamap.svg"));
    }
}

TEST_CASE("bounds command dumps envelopes") {
    const fs::path out = temp_dir("bounds");
    const std::string spec = std::string(NNB_PROBLEMS_DIR) + "/identity1d.json";
    CHECK(run_cli("bounds " + spec + " --bounds interval --out " + out.string()) == 0);
    std::ifstream csv(out / "bounds.csv");
    std::string header;
    std::getline(csv, header);
    CHECK(header == "region_id,mode,A_low,b_low,A_up,b_up");
    std::string row;
    std::getline(csv, row);
    CHECK(row.find("interval") != std::string::npos);
    CHECK(fs::exists(out / "partition.csv"));
}
