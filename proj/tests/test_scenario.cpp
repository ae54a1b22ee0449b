#include <catch2/catch_amalgamated.hpp>

#include "support.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <sys/wait.h>

using namespace lidskii;
namespace fs = std::filesystem;

namespace {

fs::path temp_dir(const std::string& tag) {
    fs::path p = fs::temp_directory_path() / ("lidskii_test_" + tag);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

int run_cli(const std::string& args) {
    const std::string cmd = std::string(LIDSKII_CLI_BIN) + " " + args + " > /dev/null 2>&1";
    const int rc = std::system(cmd.c_str());
    return WEXITSTATUS(rc);
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

TEST_CASE("scenario JSON round trip and validation", "[scenario]") {
    Scenario sc = generate_fixture("jordan-mixed", 6, 5);
    const json j = scenario_to_json(sc);
    const Scenario back = scenario_from_json(j);
    REQUIRE(back.name == sc.name);
    REQUIRE(back.specs.size() == sc.specs.size());
    REQUIRE(back.theta == sc.theta);
    REQUIRE(back.checks == sc.checks);

    SECTION("unknown check names are rejected at parse time") {
        json bad = j;
        bad["checks"].push_back("turbo");
        REQUIRE_THROWS_AS(scenario_from_json(bad), DomainError);
    }
    SECTION("empty grids are rejected") {
        json bad = j;
        bad["t_grid"] = json::array();
        REQUIRE_THROWS_AS(scenario_from_json(bad), DomainError);
    }
}

TEST_CASE("a trivial one-dimensional scenario passes the ode check", "[scenario]") {
    Scenario sc;
    sc.name = "one";
    sc.specs = {{cplx(2.0, 0.0), {1}}};
    sc.basis_seed = 1;
    sc.h_seed = 2;
    sc.phi = LaurentFunction::monomial(1);
    sc.theta = 0.05;
    sc.margin = 0.1;
    sc.t_grid = {0.1, 1.0};
    sc.checks = {"ode"};
    RunOptions opt;
    opt.write_files = false;
    const ScenarioReport rep = run_scenario(sc, opt);
    REQUIRE(rep.pass);
    REQUIRE(rep.checks.size() == 1);
    REQUIRE(rep.checks[0].metrics.at("max_ode_residual") <= 1e-10);
}

TEST_CASE("an inadmissible function fails the contraction check by name", "[scenario]") {
    Scenario sc;
    sc.name = "bad-phi";
    sc.specs = {{cplx(2.0, 0.0), {1}}, {cplx(1.5, 0.1), {1}}};
    sc.basis_seed = 3;
    sc.phi = LaurentFunction::monomial(1, cplx(0.0, 1.0));  // i z: sector condition fails
    sc.theta = 0.2;
    sc.margin = 0.1;
    sc.t_grid = {0.1};
    sc.checks = {"contraction"};
    RunOptions opt;
    opt.write_files = false;
    const ScenarioReport rep = run_scenario(sc, opt);
    REQUIRE_FALSE(rep.pass);
    REQUIRE(rep.checks[0].error.find("PreconditionFailed") != std::string::npos);
}

TEST_CASE("explicit-matrix fixtures run through extraction", "[scenario]") {
    const support::Fixture fx = support::random_fixture(4, 9000, 2);
    Scenario sc;
    sc.name = "explicit";
    sc.matrix = fx.B.matrix();
    sc.extract_tol = 1e-5;
    sc.h_seed = 4;
    sc.phi = LaurentFunction::monomial(1);
    sc.theta = fx.theta;
    sc.margin = 0.1;
    sc.t_grid = {0.1, 1.0};
    sc.checks = {"residue", "ode"};
    RunOptions opt;
    opt.write_files = false;
    const ScenarioReport rep = run_scenario(sc, opt);
    REQUIRE(rep.pass);
}

TEST_CASE("reports are idempotent across reruns", "[scenario]") {
    const Scenario sc = generate_fixture("jordan-mixed", 5, 17);
    RunOptions opt;
    opt.write_files = false;
    const json a = report_to_json(run_scenario(sc, opt));
    const json b = report_to_json(run_scenario(sc, opt));
    REQUIRE(a.dump() == b.dump());
}

TEST_CASE("fixture generation is deterministic and validated", "[scenario]") {
    SECTION("same seed, same bytes") {
        const std::string a = scenario_to_json(generate_fixture("diagonal", 4, 7)).dump(2);
        const std::string b = scenario_to_json(generate_fixture("diagonal", 4, 7)).dump(2);
        REQUIRE(a == b);
    }
    SECTION("jordan-mixed chain lengths stay within 1..3 and the sector holds") {
        const Scenario sc = generate_fixture("jordan-mixed", 8, 21);
        int total = 0;
        for (const auto& sp : sc.specs)
            for (int len : sp.chains) {
                REQUIRE(len >= 1);
                REQUIRE(len <= 3);
                total += len;
            }
        REQUIRE(total == 8);
        const BuiltFixture fx = build_fixture(sc);
        REQUIRE(sectorial_check(fx.B, sc.theta, 2000, 99).holds);
    }
    SECTION("invalid dimensions and kinds are rejected") {
        REQUIRE_THROWS_AS(generate_fixture("diagonal", 0, 1), DomainError);
        REQUIRE_THROWS_AS(generate_fixture("diagonal", 65, 1), DomainError);
        REQUIRE_THROWS_AS(generate_fixture("hilbert", 4, 1), DomainError);
    }
}

TEST_CASE("golden comparison accepts matching runs and flags drift", "[scenario]") {
    const Scenario sc = generate_fixture("diagonal", 3, 9);
    RunOptions opt;
    opt.write_files = false;
    const ScenarioReport rep = run_scenario(sc, opt);
    REQUIRE(rep.pass);
    const json golden = golden_from_report(rep);
    REQUIRE(compare_to_golden(rep, golden).empty());

    json drifted = golden;
    drifted["checks"][0]["metrics"]["max_residue_diff"] = 0.5;
    REQUIRE_FALSE(compare_to_golden(rep, drifted).empty());
}

TEST_CASE("the command-line front end honors its exit codes", "[scenario]") {
    const fs::path dir = temp_dir("cli");
    SECTION("gen rejects bad kinds and dimensions with exit 2") {
        REQUIRE(run_cli("gen --kind hexagonal --dim 4 --seed 1 --out " +
                        (dir / "x.json").string()) == 2);
        REQUIRE(run_cli("gen --kind diagonal --dim 0 --seed 1 --out " +
                        (dir / "x.json").string()) == 2);
    }
    SECTION("run distinguishes parse failure from check failure") {
        REQUIRE(run_cli("run " + (dir / "missing.json").string()) == 2);
        std::ofstream(dir / "broken.json") << "{\"name\": \"broken\"}";
        REQUIRE(run_cli("run " + (dir / "broken.json").string()) == 2);
    }
    SECTION("gen then run then verify-all round trip") {
        const fs::path scen = dir / "d2.json";
        REQUIRE(run_cli("gen --kind diagonal --dim 2 --seed 5 --out " + scen.string()) == 0);
        REQUIRE(run_cli("run " + scen.string() + " --out-dir " + (dir / "out").string()) == 0);
        REQUIRE(fs::exists(dir / "out" / "report.json"));
        REQUIRE(fs::exists(dir / "out" / "ode.csv"));
        // Without goldens verify-all fails, --update writes them, then it passes.
        REQUIRE(run_cli("verify-all " + dir.string() + " --out-dir " +
                        (dir / "vout").string()) == 1);
        REQUIRE(run_cli("verify-all " + dir.string() + " --update --out-dir " +
                        (dir / "vout").string()) == 0);
        REQUIRE(run_cli("verify-all " + dir.string() + " --out-dir " +
                        (dir / "vout").string()) == 0);
    }
}

TEST_CASE("CSV tables carry the stated headers", "[scenario]") {
    const fs::path dir = temp_dir("csv");
    Scenario sc = generate_fixture("jordan-mixed", 4, 33);
    RunOptions opt;
    opt.out_dir = (dir / "out").string();
    const ScenarioReport rep = run_scenario(sc, opt);
    REQUIRE(rep.pass);
    REQUIRE(slurp(dir / "out" / "tails.csv").rfind("nu,J_nu,J_plus_nu,J_minus_nu", 0) == 0);
    REQUIRE(slurp(dir / "out" / "stats.csv").rfind("r,beta,gamma,ratio_24a", 0) == 0);
    REQUIRE(slurp(dir / "out" / "ode.csv")
                .rfind("t,norm_u,diff_oracle,ode_residual,tail_bound", 0) == 0);
    REQUIRE(slurp(dir / "out" / "initial.csv").rfind("t,error", 0) == 0);
    const std::string report = slurp(dir / "out" / "report.json");
    REQUIRE(report.find("\"scenario\"") != std::string::npos);
    REQUIRE(report.find("\"versions\"") != std::string::npos);
}

TEST_CASE("broken scenario files surface parse errors, not crashes", "[scenario]") {
    REQUIRE_THROWS_AS(scenario_from_json(json::parse("{\"name\": 3}")), std::exception);
}
