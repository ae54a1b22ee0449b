#pragma once

// Scenario-driven orchestration: load a fixture, build the contour, solve the
// Cauchy problem and run the requested verification checks, emitting CSV
// tables and a machine-readable report.json.  Also the seeded fixture
// generator behind the `gen` subcommand and the golden comparison behind
// `verify-all`.

#include "lidskii/evolution.hpp"
#include "lidskii/io.hpp"
#include "lidskii/spectralstats.hpp"

#include <filesystem>
#include <future>
#include <map>
#include <set>

namespace lidskii {

inline const std::set<std::string>& known_checks() {
    static const std::set<std::string> k{"residue", "grouping", "ode", "contraction",
                                         "initial", "tails", "stats"};
    return k;
}

struct Scenario {
    std::string name;

    // Fixture: either chain specs + seeded basis, or an explicit matrix to
    // run through root-system extraction.
    std::vector<ChainSpec> specs;
    std::uint64_t basis_seed = 1;
    double epsilon = 0.3;  // chain coupling scale of the synthesized basis
    std::optional<Matrix> matrix;
    double extract_tol = 1e-8;

    std::optional<Vector> h_explicit;
    std::uint64_t h_seed = 101;

    LaurentFunction phi;
    double theta = 0.0;
    double margin = 0.1;
    std::vector<double> t_grid;
    std::vector<std::string> checks;
    std::optional<double> declared_rho;
    std::string output_dir = "out";
};

inline json scenario_to_json(const Scenario& sc) {
    json j;
    j["name"] = sc.name;
    json fx;
    if (sc.matrix) {
        fx["matrix"] = matrix_to_json(*sc.matrix);
        fx["extract_tol"] = sc.extract_tol;
    } else {
        json specs = json::array();
        for (const auto& sp : sc.specs) specs.push_back(chainspec_to_json(sp));
        fx["specs"] = std::move(specs);
        fx["basis_seed"] = sc.basis_seed;
        fx["epsilon"] = sc.epsilon;
    }
    j["fixture"] = std::move(fx);
    if (sc.h_explicit) j["h"] = vector_to_json(*sc.h_explicit);
    else j["h_seed"] = sc.h_seed;
    j["phi"] = laurent_to_json(sc.phi);
    j["theta"] = sc.theta;
    j["margin"] = sc.margin;
    j["t_grid"] = sc.t_grid;
    j["checks"] = sc.checks;
    if (sc.declared_rho) j["declared_rho"] = *sc.declared_rho;
    j["output_dir"] = sc.output_dir;
    return j;
}

inline Scenario scenario_from_json(const json& j) {
    Scenario sc;
    sc.name = j.at("name").get<std::string>();
    const json& fx = j.at("fixture");
    if (fx.contains("matrix")) {
        sc.matrix = matrix_from_json(fx.at("matrix"));
        if (fx.contains("extract_tol")) sc.extract_tol = fx.at("extract_tol").get<double>();
    } else {
        for (const auto& item : fx.at("specs")) sc.specs.push_back(chainspec_from_json(item));
        sc.basis_seed = fx.at("basis_seed").get<std::uint64_t>();
        if (fx.contains("epsilon")) sc.epsilon = fx.at("epsilon").get<double>();
    }
    if (j.contains("h")) sc.h_explicit = vector_from_json(j.at("h"));
    if (j.contains("h_seed")) sc.h_seed = j.at("h_seed").get<std::uint64_t>();
    sc.phi = laurent_from_json(j.at("phi"));
    sc.theta = j.at("theta").get<double>();
    sc.margin = j.at("margin").get<double>();
    sc.t_grid = j.at("t_grid").get<std::vector<double>>();
    if (sc.t_grid.empty()) throw DomainError("scenario: t_grid must be nonempty");
    for (double t : sc.t_grid)
        if (!(t > 0.0)) throw DomainError("scenario: t_grid entries must be positive");
    sc.checks = j.at("checks").get<std::vector<std::string>>();
    if (sc.checks.empty()) throw DomainError("scenario: checks must be nonempty");
    for (const auto& c : sc.checks)
        if (!known_checks().count(c))
            throw DomainError("scenario: unknown check name '" + c + "'");
    if (j.contains("declared_rho") && !j.at("declared_rho").is_null())
        sc.declared_rho = j.at("declared_rho").get<double>();
    if (j.contains("output_dir")) sc.output_dir = j.at("output_dir").get<std::string>();
    return sc;
}

namespace detail {

// Random unitary from a seeded complex Gaussian draw (QR with a fixed phase
// convention so the result is deterministic).
inline Matrix random_unitary(int dim, std::uint64_t seed) {
    GaussianSource src(seed);
    Matrix a(dim, dim);
    for (int r = 0; r < dim; ++r)
        for (int c = 0; c < dim; ++c) a(r, c) = src.complex_gaussian();
    Eigen::HouseholderQR<Matrix> qr(a);
    Matrix q = qr.householderQ() * Matrix::Identity(dim, dim);
    const Matrix r = q.adjoint() * a;
    for (int c = 0; c < dim; ++c) {
        const cplx d = r(c, c);
        if (std::abs(d) > 0.0) q.col(c) *= d / std::abs(d);
    }
    return q;
}

// Basis for the synthesized fixture: a random unitary with chain columns
// scaled by epsilon^{-i}, so the built operator is a unitary conjugate of
// mu I + epsilon N per block and its numerical range stays in the union of
// disks around the eigenvalues of radius epsilon.
inline Matrix build_chain_basis(const std::vector<ChainSpec>& specs, std::uint64_t seed,
                                double epsilon) {
    int dim = 0;
    for (const auto& sp : specs)
        for (int len : sp.chains) dim += len;
    Matrix s = random_unitary(dim, seed);
    int at = 0;
    for (const auto& sp : specs)
        for (int len : sp.chains) {
            double scale = 1.0;
            for (int i = 0; i < len; ++i) {
                s.col(at + i) *= scale;
                scale /= epsilon;
            }
            at += len;
        }
    return s;
}

}  // namespace detail

struct BuiltFixture {
    DenseOperator B;
    JordanSystem sys;
};

inline BuiltFixture build_fixture(const Scenario& sc) {
    if (sc.matrix) {
        DenseOperator B(*sc.matrix, sc.name);
        JordanSystem sys = extract_root_system(B, sc.extract_tol);
        return {std::move(B), std::move(sys)};
    }
    std::vector<ChainSpec> specs = sc.specs;
    detail::sort_specs_by_characteristic_radius(specs);
    const Matrix basis = detail::build_chain_basis(specs, sc.basis_seed, sc.epsilon);
    auto [B, sys] = synthesize_operator(specs, DenseOperator(basis, "basis"));
    return {std::move(B), std::move(sys)};
}

inline Vector scenario_initial_element(const Scenario& sc, int dim) {
    if (sc.h_explicit) {
        if (sc.h_explicit->size() != dim)
            throw DomainError("scenario: explicit h length does not match dim");
        return *sc.h_explicit;
    }
    Vector h = GaussianSource(sc.h_seed).complex_vector(dim);
    return h / h.norm();
}

struct CheckOutcome {
    std::string name;
    bool pass = false;
    std::map<std::string, double> metrics;  // compared against goldens
    std::map<std::string, double> info;     // reported, not compared
    std::string error;
};

struct ScenarioReport {
    std::string scenario;
    bool pass = false;
    std::vector<CheckOutcome> checks;
    std::vector<std::string> notes;
};

inline json report_to_json(const ScenarioReport& rep) {
    json j;
    j["scenario"] = rep.scenario;
    j["pass"] = rep.pass;
    json checks = json::array();
    for (const auto& c : rep.checks) {
        json jc;
        jc["name"] = c.name;
        jc["pass"] = c.pass;
        jc["metrics"] = c.metrics;
        jc["info"] = c.info;
        if (!c.error.empty()) jc["error"] = c.error;
        checks.push_back(std::move(jc));
    }
    j["checks"] = std::move(checks);
    j["notes"] = rep.notes;
    j["versions"] = {{"lidskii", "0.1.0"}, {"report_schema", 1}};
    return j;
}

struct RunOptions {
    std::string out_dir;       // overrides the scenario's output_dir when set
    double tol_scale = 1.0;    // relaxes (>1) or tightens (<1) check thresholds
    bool parallel = false;     // parallelize independent per-t evaluations
    bool write_files = true;
};

namespace detail {

template <class Fn>
void run_check(ScenarioReport& rep, const std::string& name, Fn&& fn) {
    CheckOutcome out;
    out.name = name;
    try {
        fn(out);
    } catch (const ContractionViolation& e) {
        out.pass = false;
        out.error = std::string("ContractionViolation: ") + e.what();
    } catch (const PreconditionFailed& e) {
        out.pass = false;
        out.error = std::string("PreconditionFailed: ") + e.what();
    } catch (const NoConvergence& e) {
        out.pass = false;
        out.error = std::string("NoConvergence: ") + e.what();
    } catch (const std::exception& e) {
        out.pass = false;
        out.error = e.what();
    }
    rep.checks.push_back(std::move(out));
}

inline std::vector<double> decade_grid() {
    return {1e-1, 1e-2, 1e-3, 1e-4, 1e-5, 1e-6};
}

inline std::vector<double> geometric_grid(double lo, double hi, int n) {
    std::vector<double> g;
    for (int i = 0; i < n; ++i)
        g.push_back(lo * std::pow(hi / lo, static_cast<double>(i) / (n - 1)));
    return g;
}

}  // namespace detail

/// Executes the scenario's checks in dependency order (fixture -> contour ->
/// solve -> checks) and writes report.json plus one CSV per check into the
/// output directory.  The report carries every check outcome; `pass` is the
/// conjunction.
inline ScenarioReport run_scenario(const Scenario& sc, const RunOptions& opt = {}) {
    namespace fs = std::filesystem;
    ScenarioReport rep;
    rep.scenario = sc.name;

    const std::string out_dir = opt.out_dir.empty() ? sc.output_dir : opt.out_dir;
    if (opt.write_files) fs::create_directories(out_dir);
    auto csv_path = [&](const std::string& base) { return out_dir + "/" + base + ".csv"; };

    BuiltFixture fx = build_fixture(sc);
    const DenseOperator& B = fx.B;
    const JordanSystem& sys = fx.sys;
    const Vector h = scenario_initial_element(sc, B.dim());
    const double h_scale = std::max(1.0, h.norm());
    const double t_min = *std::min_element(sc.t_grid.begin(), sc.t_grid.end());

    const SectorReport sector = sectorial_check(B, sc.theta, 512, sc.basis_seed ^ 0x5ec70a);
    rep.notes.push_back("sector: max observed arg " + format_sig17(sector.max_observed_arg) +
                        (sector.holds ? " within " : " OUTSIDE ") + format_sig17(sc.theta));

    ContourSpec spec;
    EvolutionSolution* solution = nullptr;
    std::optional<EvolutionSolution> solution_store;
    try {
        spec = build_contour(B, sc.phi, sc.theta, sc.margin, t_min, 1e-12);
        SolveOptions sopt;
        sopt.declared_rho = sc.declared_rho;
        sopt.seed = sc.basis_seed ^ 0xabcd;
        solution_store.emplace(solve_cauchy(B, sc.phi, h, spec, sys, sopt));
        solution = &*solution_store;
        for (const auto& n : solution->notes()) rep.notes.push_back(n);
    } catch (const std::exception& e) {
        // Every requested check fails with the pipeline error.
        std::string kind = "pipeline";
        if (dynamic_cast<const PreconditionFailed*>(&e)) kind = "pipeline: PreconditionFailed";
        else if (dynamic_cast<const GapFailure*>(&e)) kind = "pipeline: GapFailure";
        for (const auto& name : sc.checks) {
            CheckOutcome out;
            out.name = name;
            out.error = kind + ": " + e.what();
            rep.checks.push_back(std::move(out));
        }
        rep.pass = false;
        if (opt.write_files) {
            std::ofstream f(out_dir + "/report.json");
            f << report_to_json(rep).dump(2) << "\n";
        }
        return rep;
    }
    const Vector base = expand_coefficients(h, sys);

    for (const std::string& name : sc.checks) {
        if (name == "residue") {
            detail::run_check(rep, name, [&](CheckOutcome& out) {
                std::vector<double> ts{0.0};
                ts.insert(ts.end(), sc.t_grid.begin(), sc.t_grid.end());
                const double tol = 1e-8 * h_scale * opt.tol_scale;
                double max_diff = 0.0;
                std::vector<std::vector<double>> rows;
                for (int q = 0; q < sys.cluster_count(); ++q) {
                    const cplx lam = sys.cluster(q).lambda;
                    double sep = std::abs(lam);
                    for (int p = 0; p < sys.cluster_count(); ++p)
                        if (p != q)
                            sep = std::min(sep, std::abs(lam - sys.cluster(p).lambda));
                    const double radius = std::min(0.01 * std::abs(lam), 0.4 * sep);
                    for (double t : ts) {
                        const Vector closed = residue_at_pole(sys, sc.phi, q, t, base);
                        const Vector quad = integrate_circle_cw(
                            evolution_integrand(B, sc.phi, h, t), lam, radius,
                            3e-10 * h_scale, sys.dim());
                        const double diff = (closed - quad).norm();
                        max_diff = std::max(max_diff, diff);
                        rows.push_back({static_cast<double>(q), t, diff});
                    }
                }
                out.metrics["max_residue_diff"] = max_diff;
                out.pass = max_diff <= tol;
                if (opt.write_files) write_csv(csv_path("residue"), {"q", "t", "diff"}, rows);
            });
        } else if (name == "grouping") {
            detail::run_check(rep, name, [&](CheckOutcome& out) {
                const double tol_tel = 1e-7 * h_scale * opt.tol_scale;
                const double tol_inc = 1e-8 * h_scale * opt.tol_scale;
                double max_tel = 0.0, max_inc = 0.0;
                std::vector<std::vector<double>> rows;
                const std::vector<double> bounds = ring_bounds(spec);
                for (double t : sc.t_grid) {
                    const QuadratureResult full =
                        evolution_integral(B, sc.phi, h, t, spec, 1e-9 * h_scale);
                    Vector ring_total = Vector::Zero(sys.dim());
                    for (int nu = 0; nu + 1 < static_cast<int>(bounds.size()); ++nu)
                        ring_total += group_sum(B, sc.phi, sys, spec, nu, h, t);
                    const double tel = (ring_total - full.value).norm();
                    max_tel = std::max(max_tel, tel);

                    // The abel-route partial sums must agree with the cumulative
                    // ring residue sums group by group.
                    const AbelCoefficients co = abel_coefficients(base, sys, sc.phi, t);
                    const std::vector<int>& grouping = solution->grouping();
                    double inc_diff = 0.0;
                    for (size_t gi = 0; gi < grouping.size(); ++gi) {
                        const Vector part = grouped_partial_sum(
                            sys, co, grouping, static_cast<int>(gi));
                        Vector ring_cumulative = Vector::Zero(sys.dim());
                        for (int nu = 0; nu + 1 < static_cast<int>(bounds.size()); ++nu)
                            if (sys.count_inside(bounds[nu + 1]) <= grouping[gi])
                                ring_cumulative += group_sum(B, sc.phi, sys, spec, nu, h, t);
                        inc_diff = std::max(inc_diff, (part - ring_cumulative).norm());
                    }
                    max_inc = std::max(max_inc, inc_diff);
                    rows.push_back({t, tel, inc_diff, full.tail_bound});
                }
                out.metrics["max_telescope_diff"] = max_tel;
                out.metrics["max_increment_diff"] = max_inc;
                out.pass = max_tel <= tol_tel && max_inc <= tol_inc;
                if (opt.write_files)
                    write_csv(csv_path("grouping"),
                              {"t", "telescope_diff", "increment_diff", "tail_bound"}, rows);
            });
        } else if (name == "ode") {
            detail::run_check(rep, name, [&](CheckOutcome& out) {
                const double tol = 1e-6 * h_scale * opt.tol_scale;
                double max_res = 0.0, max_oracle_diff = 0.0;
                std::vector<std::vector<double>> rows;
                for (double t : sc.t_grid) {
                    const Vector u = solution->evaluate(t);
                    const double res = ode_residual(*solution, t);
                    const double odiff = (u - oracle_solution(B, sc.phi, h, t)).norm();
                    max_res = std::max(max_res, res);
                    max_oracle_diff = std::max(max_oracle_diff, odiff);
                    rows.push_back({t, u.norm(), odiff, res, solution->tail_bound(t)});
                }
                out.metrics["max_ode_residual"] = max_res;
                out.metrics["max_oracle_diff"] = max_oracle_diff;
                out.pass = max_res <= tol && max_oracle_diff <= tol;
                if (opt.write_files)
                    write_csv(csv_path("ode"),
                              {"t", "norm_u", "diff_oracle", "ode_residual", "tail_bound"}, rows);
            });
        } else if (name == "contraction") {
            detail::run_check(rep, name, [&](CheckOutcome& out) {
                const AccretivityReport acc =
                    accretivity_check(B, sc.phi, 200, sc.h_seed ^ 0xacc);
                out.info["accretivity_sampled_min"] = acc.sampled_min;
                out.info["accretivity_exact_min"] = acc.exact_min;
                if (!acc.accretive)
                    throw PreconditionFailed("contraction: phi(W) is not accretive (min Hermitian "
                                             "eigenvalue " + format_sig17(acc.exact_min) + ")");
                std::vector<Vector> h_set;
                GaussianSource src(sc.h_seed ^ 0x9e3779b9);
                for (int k = 0; k < 50; ++k) {
                    Vector v = src.complex_vector(B.dim());
                    h_set.push_back(v / v.norm());
                }
                const ContractionReport con =
                    contraction_check(*solution, h_set, detail::geometric_grid(1e-2, 2.0, 20));
                out.metrics["max_ratio_to_initial"] = con.max_ratio_to_initial;
                out.pass = con.max_ratio_to_initial <= 1.0 + 1e-8 * opt.tol_scale;
                if (opt.write_files)
                    write_csv(csv_path("contraction"), {"max_ratio_to_initial"},
                              {{con.max_ratio_to_initial}});
            });
        } else if (name == "initial") {
            detail::run_check(rep, name, [&](CheckOutcome& out) {
                const InitialConditionReport rep_ic = initial_condition_check(
                    *solution, h, detail::decade_grid(), 1e-6 * opt.tol_scale);
                out.metrics["final_error"] = rep_ic.final_error;
                out.pass = rep_ic.passed;
                std::vector<std::vector<double>> rows;
                for (size_t i = 0; i < rep_ic.ts.size(); ++i)
                    rows.push_back({rep_ic.ts[i], rep_ic.errors[i]});
                if (opt.write_files) write_csv(csv_path("initial"), {"t", "error"}, rows);
            });
        } else if (name == "tails") {
            detail::run_check(rep, name, [&](CheckOutcome& out) {
                const TailNorms tn = tail_norms(B, sc.phi, spec, h, t_min);
                const double last_pole = spec.pole_radii.back();
                std::vector<std::vector<double>> rows;
                double past_sum = 0.0;
                for (size_t nu = 0; nu < tn.radii.size(); ++nu) {
                    rows.push_back({static_cast<double>(nu), tn.arc[nu], tn.upper[nu],
                                    tn.lower[nu]});
                    if (tn.radii[nu] > last_pole)
                        past_sum += tn.arc[nu] + tn.upper[nu] + tn.lower[nu];
                }
                // The trace must have decayed below threshold by the
                // truncation radius: final arc plus the final ray segments.
                const size_t k = tn.radii.size();
                double tail_final = tn.arc.back();
                if (k >= 2) tail_final = std::max({tail_final, tn.upper[k - 2], tn.lower[k - 2]});
                out.metrics["tail_final"] = tail_final;
                out.info["tail_sum_past_poles"] = past_sum;
                out.pass = tail_final <= 1e-10 * h_scale * opt.tol_scale;
                if (opt.write_files)
                    write_csv(csv_path("tails"), {"nu", "J_nu", "J_plus_nu", "J_minus_nu"}, rows);
            });
        } else if (name == "stats") {
            detail::run_check(rep, name, [&](CheckOutcome& out) {
                SingularProfile prof = SingularProfile::of(B);
                prof.declared_law = sc.declared_rho;
                double rho = 1.0;
                try {
                    rho = convergence_exponent_estimate(prof).rho;
                    out.info["rho_estimate"] = rho;
                } catch (const std::exception&) {
                    // Narrow spectra give no usable fit; diagnostics fall back to rho = 1.
                }
                double schatten_rel = 0.0;
                for (double p : {1.0, 2.0}) {
                    const double a = schatten_sum(prof, p);
                    const double b = schatten_sum_stieltjes(prof, p);
                    schatten_rel = std::max(schatten_rel, std::abs(a - b) / a);
                }
                const int m = static_cast<int>(std::floor(rho));
                SingularProfile power = SingularProfile::of_power(B, m + 1);
                const double jump_lo = 1.0 / power.values.front();
                const double jump_hi = 1.0 / power.values.back();
                // Radii so that r^{m+1} sweeps the jump range well past
                // saturation of the counting function.
                const std::vector<double> grid = detail::geometric_grid(
                    0.5 * std::pow(jump_lo, 1.0 / (m + 1)),
                    4.0 * std::pow(jump_hi, 1.0 / (m + 1)), 25);
                const Lemma2Table tab = lemma2_diagnostics(power, std::max(rho, 0.5), grid);
                const Condition24aReport c24 =
                    condition_24a_probe(power, std::max(rho, 0.5), grid);
                std::vector<std::vector<double>> rows;
                for (size_t i = 0; i < grid.size(); ++i)
                    rows.push_back({grid[i], tab.beta[i], tab.gamma[i], c24.ratio[i]});
                out.metrics["schatten_two_route_rel"] = schatten_rel;
                out.info["ratio_24a_final"] = c24.ratio.back();
                out.pass = schatten_rel <= 1e-10 * opt.tol_scale && c24.tail_nonincreasing;
                if (opt.write_files)
                    write_csv(csv_path("stats"), {"r", "beta", "gamma", "ratio_24a"}, rows);
            });
        }
    }

    rep.pass = !rep.checks.empty();
    for (const auto& c : rep.checks) rep.pass = rep.pass && c.pass;
    if (opt.write_files) {
        std::ofstream f(out_dir + "/report.json");
        f << report_to_json(rep).dump(2) << "\n";
    }
    return rep;
}

/// Golden form of a report: metric values plus the comparison tolerance each
/// metric was frozen with.
inline json golden_from_report(const ScenarioReport& rep) {
    json j;
    j["scenario"] = rep.scenario;
    j["pass"] = rep.pass;
    json checks = json::array();
    for (const auto& c : rep.checks) {
        json jc;
        jc["name"] = c.name;
        jc["pass"] = c.pass;
        jc["metrics"] = c.metrics;
        json tols;
        for (const auto& [k, v] : c.metrics)
            tols[k] = std::max(1e-9, 1e-6 * std::abs(v));
        jc["metrics_tol"] = std::move(tols);
        checks.push_back(std::move(jc));
    }
    j["checks"] = std::move(checks);
    return j;
}

/// Mismatches between a fresh report and a committed golden (empty = match).
inline std::vector<std::string> compare_to_golden(const ScenarioReport& rep, const json& golden) {
    std::vector<std::string> bad;
    if (golden.at("pass").get<bool>() != rep.pass)
        bad.push_back("overall pass flag differs");
    std::map<std::string, const CheckOutcome*> by_name;
    for (const auto& c : rep.checks) by_name[c.name] = &c;
    for (const auto& gc : golden.at("checks")) {
        const std::string name = gc.at("name").get<std::string>();
        auto it = by_name.find(name);
        if (it == by_name.end()) {
            bad.push_back("check '" + name + "' missing from the fresh report");
            continue;
        }
        if (gc.at("pass").get<bool>() != it->second->pass)
            bad.push_back("check '" + name + "' pass flag differs");
        for (const auto& [key, gv] : gc.at("metrics").items()) {
            auto mv = it->second->metrics.find(key);
            if (mv == it->second->metrics.end()) {
                bad.push_back("metric '" + name + "." + key + "' missing");
                continue;
            }
            const double tol = gc.at("metrics_tol").at(key).get<double>();
            if (std::abs(mv->second - gv.get<double>()) > tol)
                bad.push_back("metric '" + name + "." + key + "' off by more than " +
                              format_sig17(tol));
        }
    }
    return bad;
}

// ---------------------------------------------------------------------------
// Fixture generation

namespace detail {

inline std::vector<cplx> draw_eigenvalues(int count, GaussianSource& src, double arg_span,
                                          double mod_lo, double mod_hi) {
    for (int attempt = 0; attempt < 200; ++attempt) {
        std::vector<cplx> mus;
        for (int i = 0; i < count; ++i) {
            const double mod = mod_lo * std::pow(mod_hi / mod_lo, src.uniform());
            const double arg = arg_span * (2.0 * src.uniform() - 1.0);
            mus.push_back(std::polar(mod, arg));
        }
        const double sep_target = std::min(0.1, 1.2 / count);
        bool ok = true;
        for (size_t a = 0; a < mus.size() && ok; ++a)
            for (size_t b = a + 1; b < mus.size(); ++b)
                if (std::abs(mus[a] - mus[b]) < sep_target) { ok = false; break; }
        if (ok) return mus;
    }
    throw Error("draw_eigenvalues: could not place separated eigenvalues");
}

}  // namespace detail

/// Deterministic scenario skeleton of the requested kind.  The sector
/// semi-angle written into the scenario is the analytic disk bound of the
/// synthesized fixture plus a small slack, so sectorial_check passes by
/// construction.
inline Scenario generate_fixture(const std::string& kind, int dim, std::uint64_t seed) {
    if (dim < 1 || dim > 64)
        throw DomainError("generate_fixture: dim must lie in [1, 64]");
    if (kind != "diagonal" && kind != "jordan-mixed" && kind != "sectorial-random")
        throw DomainError("generate_fixture: unknown kind '" + kind + "'");

    GaussianSource src(seed * 0x9e3779b97f4a7c15ULL + 12345);
    Scenario sc;
    sc.name = kind + "-d" + std::to_string(dim) + "-s" + std::to_string(seed);
    sc.basis_seed = seed;
    sc.h_seed = seed ^ 0x5151;

    // Chain length pattern per kind.
    std::vector<std::vector<int>> cluster_chains;
    int left = dim;
    while (left > 0) {
        int len = 1;
        if (kind == "jordan-mixed")
            len = 1 + static_cast<int>(src.uniform() * 3.0);  // 1..3
        else if (kind == "sectorial-random")
            len = 1 + static_cast<int>(src.uniform() * 2.0);  // 1..2
        len = std::min(len, left);
        // Occasionally give an eigenvalue two chains (geometric multiplicity 2).
        std::vector<int> chains{len};
        left -= len;
        if (kind != "diagonal" && left > 0 && src.uniform() < 0.25) {
            const int extra = std::min(left, 1 + static_cast<int>(src.uniform() * 2.0));
            chains.push_back(extra);
            left -= extra;
        }
        cluster_chains.push_back(std::move(chains));
    }

    const std::vector<cplx> mus = detail::draw_eigenvalues(
        static_cast<int>(cluster_chains.size()), src, std::numbers::pi / 10.0, 1.5, 2.0);
    double mod_min = std::numeric_limits<double>::infinity();
    double arg_max = 0.0;
    for (size_t i = 0; i < cluster_chains.size(); ++i) {
        sc.specs.push_back({mus[i], cluster_chains[i]});
        mod_min = std::min(mod_min, std::abs(mus[i]));
        arg_max = std::max(arg_max, std::abs(std::arg(mus[i])));
    }

    int longest = 1;
    for (const auto& ch : cluster_chains)
        for (int len : ch) longest = std::max(longest, len);
    sc.epsilon = longest > 1 ? std::min(0.35, 0.25 * mod_min) : 0.35;

    // Disk bound on the numerical range: union of disks of radius epsilon
    // around the eigenvalues (unitary conjugation preserves it exactly).
    const double disk = longest > 1 ? sc.epsilon : 0.0;
    sc.theta = arg_max + std::asin(std::min(0.999, disk / mod_min)) + 0.02;
    sc.margin = std::min(0.1, (std::numbers::pi / 2.0 - sc.theta) / 4.0);
    sc.phi = LaurentFunction::monomial(1);  // phi(z) = z
    sc.t_grid = {0.01, 0.1, 1.0};
    sc.checks = {"residue", "grouping", "ode", "contraction", "initial", "tails", "stats"};
    sc.output_dir = "out/" + sc.name;
    return sc;
}

struct VerifyAllResult {
    int scenarios = 0;
    int failed = 0;
    std::vector<std::string> lines;
};

/// Runs every *.json scenario in `dir` (golden files excluded) and compares
/// the regenerated metrics against the committed <name>.golden.json.  With
/// `update` set, goldens are rewritten instead of compared.
inline VerifyAllResult verify_all(const std::string& dir, const RunOptions& opt = {},
                                  bool update = false) {
    namespace fs = std::filesystem;
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(dir)) {
        const std::string name = entry.path().filename().string();
        if (entry.path().extension() == ".json" && name.find(".golden.") == std::string::npos)
            files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());

    VerifyAllResult res;
    res.scenarios = static_cast<int>(files.size());

    auto process = [&](const fs::path& path) -> std::pair<bool, std::string> {
        std::ifstream in(path);
        json j = json::parse(in);
        const Scenario sc = scenario_from_json(j);
        RunOptions local = opt;
        local.out_dir = (opt.out_dir.empty() ? "out" : opt.out_dir) + "/" + sc.name;
        const ScenarioReport rep = run_scenario(sc, local);
        const fs::path golden_path = fs::path(path).replace_extension(".golden.json");
        if (update) {
            std::ofstream out(golden_path);
            out << golden_from_report(rep).dump(2) << "\n";
            return {rep.pass, path.filename().string() + ": golden updated, pass=" +
                                  (rep.pass ? "true" : "false")};
        }
        if (!fs::exists(golden_path))
            return {false, path.filename().string() + ": missing golden file"};
        std::ifstream gin(golden_path);
        const json golden = json::parse(gin);
        std::vector<std::string> bad = compare_to_golden(rep, golden);
        if (!rep.pass) bad.insert(bad.begin(), "scenario checks failed");
        if (bad.empty()) return {true, path.filename().string() + ": ok"};
        std::string msg = path.filename().string() + ": ";
        for (size_t i = 0; i < bad.size(); ++i) msg += (i ? "; " : "") + bad[i];
        return {false, msg};
    };

    if (opt.parallel) {
        std::vector<std::future<std::pair<bool, std::string>>> futs;
        for (const auto& f : files)
            futs.push_back(std::async(std::launch::async, process, f));
        for (auto& fu : futs) {
            auto [ok, line] = fu.get();
            if (!ok) ++res.failed;
            res.lines.push_back(std::move(line));
        }
    } else {
        for (const auto& f : files) {
            auto [ok, line] = process(f);
            if (!ok) ++res.failed;
            res.lines.push_back(std::move(line));
        }
    }
    return res;
}

}  // namespace lidskii
