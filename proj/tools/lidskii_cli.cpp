// Command-line front end: run a scenario file, generate fixture scenarios,
// or verify a directory of scenarios against committed goldens.
//
//   lidskii run <scenario.json> [--out-dir DIR] [--tol SCALE] [--parallel]
//   lidskii gen --kind K --dim N --seed S --out PATH
//   lidskii verify-all <dir> [--update] [--parallel] [--tol SCALE]
//
// Exit codes: 0 success, 1 check/verification failure, 2 parse or usage error.

#include "lidskii/lidskii.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>

using namespace lidskii;

int main(int argc, char** argv) {
    CLI::App app{"Abel-Lidskii summation laboratory for finite non-normal matrices"};
    app.require_subcommand(1);

    std::string scenario_path, out_dir, gen_kind = "diagonal", gen_out, verify_dir;
    double tol_scale = 1.0;
    bool parallel = false, update = false;
    int gen_dim = 4;
    std::uint64_t gen_seed = 1;

    CLI::App* run = app.add_subcommand("run", "run one scenario and write its reports");
    run->add_option("scenario", scenario_path, "scenario JSON file")->required();
    run->add_option("--out-dir", out_dir, "output directory override");
    run->add_option("--tol", tol_scale, "tolerance scale for check thresholds");
    run->add_flag("--parallel", parallel, "parallelize independent evaluations");

    CLI::App* gen = app.add_subcommand("gen", "generate a scenario skeleton");
    gen->add_option("--kind", gen_kind, "diagonal | jordan-mixed | sectorial-random")->required();
    gen->add_option("--dim", gen_dim, "fixture dimension (1..64)")->required();
    gen->add_option("--seed", gen_seed, "deterministic seed")->required();
    gen->add_option("--out", gen_out, "output scenario path")->required();

    CLI::App* verify = app.add_subcommand("verify-all", "run every scenario in a directory "
                                                        "and compare against goldens");
    verify->add_option("dir", verify_dir, "directory of scenario JSON files")->required();
    verify->add_flag("--update", update, "rewrite golden files instead of comparing");
    verify->add_flag("--parallel", parallel, "process scenarios concurrently");
    verify->add_option("--tol", tol_scale, "tolerance scale for check thresholds");
    verify->add_option("--out-dir", out_dir, "base output directory");

    CLI11_PARSE(app, argc, argv);

    try {
        if (run->parsed()) {
            std::ifstream in(scenario_path);
            if (!in) {
                std::cerr << "cannot open " << scenario_path << "\n";
                return 2;
            }
            Scenario sc;
            try {
                sc = scenario_from_json(json::parse(in));
            } catch (const std::exception& e) {
                std::cerr << "parse error: " << e.what() << "\n";
                return 2;
            }
            RunOptions opt;
            opt.out_dir = out_dir;
            opt.tol_scale = tol_scale;
            opt.parallel = parallel;
            const ScenarioReport rep = run_scenario(sc, opt);
            for (const auto& c : rep.checks)
                std::cout << (c.pass ? "PASS " : "FAIL ") << c.name
                          << (c.error.empty() ? "" : "  [" + c.error + "]") << "\n";
            std::cout << (rep.pass ? "PASS" : "FAIL") << " scenario " << rep.scenario << "\n";
            return rep.pass ? 0 : 1;
        }
        if (gen->parsed()) {
            Scenario sc;
            try {
                sc = generate_fixture(gen_kind, gen_dim, gen_seed);
            } catch (const std::exception& e) {
                std::cerr << "gen error: " << e.what() << "\n";
                return 2;
            }
            std::ofstream out(gen_out);
            if (!out) {
                std::cerr << "cannot write " << gen_out << "\n";
                return 2;
            }
            out << scenario_to_json(sc).dump(2) << "\n";
            std::cout << "wrote " << gen_out << "\n";
            return 0;
        }
        if (verify->parsed()) {
            RunOptions opt;
            opt.out_dir = out_dir;
            opt.tol_scale = tol_scale;
            opt.parallel = parallel;
            VerifyAllResult res;
            try {
                res = verify_all(verify_dir, opt, update);
            } catch (const std::exception& e) {
                std::cerr << "verify-all error: " << e.what() << "\n";
                return 2;
            }
            for (const auto& line : res.lines) std::cout << line << "\n";
            std::cout << res.scenarios - res.failed << "/" << res.scenarios << " scenarios ok\n";
            return res.failed == 0 ? 0 : 1;
        }
    } catch (const DomainError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 2;
}
