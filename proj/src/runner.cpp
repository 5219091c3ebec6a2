// SPDX-License-Identifier: Apache-2.0
#include "insopt/runner.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "insopt/oracles.hpp"

namespace insopt {

namespace {

using ordered_json = nlohmann::ordered_json;
namespace fs = std::filesystem;

std::string fmt17(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

void write_file(const fs::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write " + path.string());
    out << content;
}

const char* direction_name(TraceDirection d) {
    switch (d) {
        case TraceDirection::Increasing: return "increasing";
        case TraceDirection::Decreasing: return "decreasing";
        case TraceDirection::Stationary: return "stationary";
    }
    return "stationary";
}

ordered_json trace_to_json(const SolverTrace& trace) {
    ordered_json j;
    j["m0"] = trace.m0;
    j["converged"] = trace.converged;
    j["direction"] = direction_name(trace.direction);
    j["fixed_point_residual"] = trace.fixed_point_residual;
    ordered_json iters = ordered_json::array();
    for (const IterationRecord& r : trace.iterations) {
        ordered_json item;
        item["n"] = r.n;
        item["m"] = r.m;
        item["deductible"] = r.deductible;
        item["residual"] = r.residual;
        iters.push_back(item);
    }
    j["iterations"] = iters;
    return j;
}

std::string curve_to_csv(const std::vector<IndemnitySchedule::CurvePoint>& curve) {
    std::string csv = "x,indemnity,retained\n";
    for (const auto& p : curve) {
        csv += fmt17(p.x);
        csv += ',';
        csv += fmt17(p.indemnity);
        csv += ',';
        csv += fmt17(p.retained);
        csv += '\n';
    }
    return csv;
}

double effective_grid_max(const ScenarioConfig& cfg, const LossDistribution& dist,
                          const IndemnitySchedule& schedule) {
    if (cfg.output.grid_max) return *cfg.output.grid_max;
    const double q = dist.bounded_support() ? dist.support_upper()
                                            : dist.upper_quantile(0.9999);
    return std::max(q, schedule.deductible() * 2.0 + 1.0);
}

struct SolvedScenario {
    ScenarioConfig config;
    LossDistribution dist;
    PremiumFunction g;
    SolverConfig solver;
    SolveResult result;
    double grid_max = 0.0;
};

ScenarioConfig load_config(const std::string& config_path, const RunOverrides& overrides) {
    ScenarioConfig cfg = ScenarioConfig::from_file(config_path);
    if (overrides.m0) cfg.m0 = *overrides.m0;
    if (overrides.m_tolerance) cfg.m_tolerance = *overrides.m_tolerance;
    if (overrides.seed) cfg.verify.seed = *overrides.seed;
    return cfg;
}

SolvedScenario solve_scenario(ScenarioConfig cfg) {
    LossDistribution dist = cfg.make_distribution();
    PremiumFunction g = cfg.make_premium();
    SolverConfig solver = cfg.make_solver_config();
    SolveResult result = fixed_point_solve(dist, g, solver);
    const double grid_max = effective_grid_max(cfg, dist, result.schedule);
    return SolvedScenario{std::move(cfg), std::move(dist), std::move(g),
                          solver, std::move(result), grid_max};
}

ordered_json result_to_json(const SolvedScenario& s, const ObjectiveReport& obj) {
    ordered_json r;
    r["m_star"] = s.result.schedule.m_star();
    r["deductible"] = s.result.schedule.deductible();
    r["iterations"] = s.result.trace.iterations.size();
    r["converged"] = s.result.trace.converged;
    r["direction"] = direction_name(s.result.trace.direction);
    r["last_residual"] = s.result.trace.iterations.empty()
                             ? 0.0
                             : s.result.trace.iterations.back().residual;
    r["fixed_point_residual"] = s.result.trace.fixed_point_residual;

    const ValidationReport validation = s.g.validate();
    ordered_json v;
    v["passed"] = validation.passed;
    v["extended_family"] = validation.extended_family;
    r["premium_validation"] = v;

    ordered_json o;
    o["premium"] = obj.premium_value;
    o["post_indemnity_moment"] = obj.post_indemnity_moment;
    o["objective"] = obj.objective_value;
    o["certainty_equivalent"] = obj.certainty_equivalent;
    r["objective"] = o;
    return r;
}

ordered_json scenario_echo(const ScenarioConfig& cfg) {
    return ordered_json::parse(cfg.to_json_text());
}

/// Maps domain failures that indicate a bad configuration to exit 2 and
/// numerical failures to exit 4. Returns -1 when ex is not recognized.
int classify_failure(const std::exception& ex, std::ostream& log) {
    if (dynamic_cast<const ConfigError*>(&ex) ||
        dynamic_cast<const std::invalid_argument*>(&ex)) {
        log << "config error: " << ex.what() << "\n";
        return kExitConfig;
    }
    if (dynamic_cast<const QuadratureBudgetExceeded*>(&ex) ||
        dynamic_cast<const DivergentMoment*>(&ex) ||
        dynamic_cast<const DegeneratePremium*>(&ex) ||
        dynamic_cast<const BracketFailure*>(&ex)) {
        log << "numerical failure: " << ex.what() << "\n";
        return kExitQuadrature;
    }
    return -1;
}

}  // namespace

int cmd_solve(const std::string& config_path, const std::string& out_dir,
              const RunOverrides& overrides, std::ostream& log) {
    ScenarioConfig cfg;
    try {
        cfg = load_config(config_path, overrides);
    } catch (const ConfigError& e) {
        log << "config error: " << e.what() << "\n";
        return kExitConfig;
    }

    fs::create_directories(out_dir);
    const auto t0 = std::chrono::steady_clock::now();
    try {
        SolvedScenario s = solve_scenario(cfg);
        const ObjectiveReport obj = objective(s.result.schedule, s.dist, s.solver);

        write_file(fs::path(out_dir) / "trace.json",
                   trace_to_json(s.result.trace).dump(2) + "\n");
        write_file(fs::path(out_dir) / "indemnity.csv",
                   curve_to_csv(s.result.schedule.curve(s.grid_max,
                                                        s.config.output.grid_points)));
        ordered_json report;
        report["scenario"] = scenario_echo(s.config);
        report["result"] = result_to_json(s, obj);
        write_file(fs::path(out_dir) / "report.json", report.dump(2) + "\n");

        const auto elapsed = std::chrono::duration<double>(
                                 std::chrono::steady_clock::now() - t0)
                                 .count();
        log << "solve: m_star = " << fmt17(s.result.schedule.m_star())
            << ", deductible = " << fmt17(s.result.schedule.deductible())
            << ", iterations = " << s.result.trace.iterations.size() << ", "
            << elapsed << " s\n";
        return kExitOk;
    } catch (const NoConvergence& e) {
        log << "no convergence: " << e.what() << "\n";
        write_file(fs::path(out_dir) / "trace.json",
                   trace_to_json(e.trace).dump(2) + "\n");
        ordered_json report;
        report["scenario"] = scenario_echo(cfg);
        report["error"] = e.what();
        write_file(fs::path(out_dir) / "report.json", report.dump(2) + "\n");
        return kExitNoConvergence;
    } catch (const std::exception& e) {
        const int code = classify_failure(e, log);
        if (code >= 0) return code;
        throw;
    }
}

int cmd_verify(const std::string& config_path, const std::string& out_dir,
               const RunOverrides& overrides, std::ostream& log) {
    ScenarioConfig cfg;
    try {
        cfg = load_config(config_path, overrides);
    } catch (const ConfigError& e) {
        log << "config error: " << e.what() << "\n";
        return kExitConfig;
    }

    fs::create_directories(out_dir);
    try {
        SolvedScenario s = solve_scenario(cfg);
        const IndemnitySchedule& schedule = s.result.schedule;
        const VerifySpec& v = s.config.verify;

        ordered_json checks = ordered_json::array();
        int exit_code = kExitOk;
        auto record = [&](const std::string& name, bool passed, double value,
                          double threshold, int fail_code, const std::string& detail) {
            ordered_json c;
            c["name"] = name;
            c["passed"] = passed;
            c["value"] = value;
            c["threshold"] = threshold;
            if (!detail.empty()) c["detail"] = detail;
            checks.push_back(c);
            if (!passed && exit_code == kExitOk) exit_code = fail_code;
            log << (passed ? "PASS " : "FAIL ") << name << " (value " << value
                << ", threshold " << threshold << ")\n";
        };

        // admissibility: 0 <= I(x) <= x on the display grid
        {
            const auto curve = schedule.curve(s.grid_max, v.comonotone_points);
            double worst = 0.0;
            for (const auto& p : curve) {
                worst = std::max(worst, std::max(-p.indemnity, p.indemnity - p.x));
            }
            record("admissibility", worst <= 1e-10, worst, 1e-10, kExitAdmissibility, "");
        }

        // comonotonicity: 1-Lipschitz increase, strict beyond the deductible
        {
            const auto curve = schedule.curve(s.grid_max, v.comonotone_points);
            std::vector<double> grid;
            grid.reserve(curve.size());
            for (const auto& p : curve) grid.push_back(p.x);
            const ComonotoneReport rep = check_comonotone(schedule, grid);
            record("comonotone", rep.ok, rep.ok ? 0.0 : rep.x_lo, 0.0, kExitComonotone,
                   rep.reason);
        }

        // first-order condition: kappa residual on points beyond the deductible
        {
            const double d = schedule.deductible();
            const double m = schedule.m_star();
            const PremiumFunction& g = schedule.premium_function();
            double worst = 0.0;
            bool bracket_ok = true;
            for (int i = 1; i <= v.kappa_points; ++i) {
                const double x =
                    d + (s.grid_max - d) * i / (v.kappa_points + 1.0);
                const double y = schedule(x);
                if (y <= 0.0 || y >= x) continue;
                bool at_kink = false;
                for (double yk : g.kinks()) {
                    if (std::abs(y - yk) <= 1e-12 * std::max(1.0, yk)) {
                        // subdifferential bracketing at the kink
                        const double w = std::exp(s.solver.gamma * (x - y));
                        const double lo = m * g.deriv_left(yk) * (1.0 - 1e-9);
                        const double hi = m * g.deriv_right(yk) * (1.0 + 1e-9);
                        if (w < lo || w > hi) bracket_ok = false;
                        at_kink = true;
                        break;
                    }
                }
                if (!at_kink) {
                    worst = std::max(
                        worst, std::abs(kappa(x, y, m, s.solver.gamma, g)));
                }
            }
            record("kappa_residual", worst <= v.kappa_tolerance && bracket_ok, worst,
                   v.kappa_tolerance, kExitKappa,
                   bracket_ok ? "" : "subdifferential bracketing failed at a kink");
        }

        // self-consistency: recomputed post-indemnity moment equals m_star
        {
            const double moment = post_indemnity_moment(schedule, s.dist, s.solver);
            const double delta = std::abs(moment - schedule.m_star());
            const double threshold = v.self_consistency_factor * s.solver.m_tolerance;
            record("self_consistency", delta <= threshold, delta, threshold,
                   kExitSelfConsistency, "");
        }

        // variational optimality: random admissible bumps never improve
        {
            const PerturbationReport rep =
                perturbation_test(schedule, s.dist, s.solver, v.trials, v.seed);
            record("perturbation", rep.min_gap >= -v.gap_tolerance, rep.min_gap,
                   -v.gap_tolerance, kExitPerturbation, "");
        }

        const ObjectiveReport obj = objective(schedule, s.dist, s.solver);
        ordered_json report;
        report["scenario"] = scenario_echo(s.config);
        report["result"] = result_to_json(s, obj);
        report["checks"] = checks;
        report["passed"] = (exit_code == kExitOk);
        write_file(fs::path(out_dir) / "report.json", report.dump(2) + "\n");
        return exit_code;
    } catch (const NoConvergence& e) {
        log << "no convergence: " << e.what() << "\n";
        return kExitNoConvergence;
    } catch (const std::exception& e) {
        const int code = classify_failure(e, log);
        if (code >= 0) return code;
        throw;
    }
}

int cmd_compare(const std::string& config_path, const std::string& out_dir,
                const RunOverrides& overrides, std::ostream& log) {
    ScenarioConfig cfg;
    try {
        cfg = load_config(config_path, overrides);
    } catch (const ConfigError& e) {
        log << "config error: " << e.what() << "\n";
        return kExitConfig;
    }

    if (cfg.distribution.family != "exponential") {
        log << "no closed-form oracle for distribution family \""
            << cfg.distribution.family << "\"\n";
        return kExitNoOracle;
    }

    fs::create_directories(out_dir);
    try {
        SolvedScenario s = solve_scenario(cfg);

        ClosedFormSolution oracle;
        if (cfg.premium.family == "expected_value") {
            oracle = oracle_deductible(cfg.gamma, cfg.distribution.lambda,
                                       cfg.premium.theta);
        } else if (cfg.premium.family == "quadratic") {
            oracle = oracle_quadratic(cfg.gamma, cfg.distribution.lambda,
                                      cfg.premium.alpha);
        } else if (cfg.premium.family == "stop_loss") {
            oracle = oracle_multilayer(cfg.gamma, cfg.distribution.lambda,
                                       cfg.premium.loadings, cfg.premium.thresholds);
        } else {
            log << "no closed-form oracle for premium family \"" << cfg.premium.family
                << "\"\n";
            return kExitNoOracle;
        }

        const IndemnitySchedule& schedule = s.result.schedule;
        const double m_delta = std::abs(schedule.m_star() - oracle.m);

        // shared grid: uniform plus both sides' breakpoints
        std::vector<double> xs;
        const int n = s.config.compare.grid_points;
        for (int i = 0; i < n; ++i) xs.push_back(s.grid_max * i / (n - 1.0));
        for (double b : schedule.breakpoints(s.grid_max)) xs.push_back(b);
        for (double b : oracle.breakpoints) {
            if (b > 0.0 && b < s.grid_max) xs.push_back(b);
        }
        std::sort(xs.begin(), xs.end());
        xs.erase(std::unique(xs.begin(), xs.end(),
                             [](double a, double b) { return std::abs(a - b) <= 1e-12; }),
                 xs.end());

        std::string csv = "x,solver,oracle,delta\n";
        std::string oracle_csv = "x,indemnity,retained\n";
        double curve_delta = 0.0;
        for (double x : xs) {
            const double ours = schedule(x);
            const double ref = oracle.indemnity(x);
            curve_delta = std::max(curve_delta, std::abs(ours - ref));
            csv += fmt17(x);
            csv += ',';
            csv += fmt17(ours);
            csv += ',';
            csv += fmt17(ref);
            csv += ',';
            csv += fmt17(ours - ref);
            csv += '\n';
            oracle_csv += fmt17(x);
            oracle_csv += ',';
            oracle_csv += fmt17(ref);
            oracle_csv += ',';
            oracle_csv += fmt17(x - ref);
            oracle_csv += '\n';
        }
        write_file(fs::path(out_dir) / "compare.csv", csv);
        // oracle curve in the solver's CSV schema for diff tooling
        write_file(fs::path(out_dir) / "oracle.csv", oracle_csv);

        const bool m_ok = m_delta <= s.config.compare.m_tolerance;
        const bool curve_ok = curve_delta <= s.config.compare.curve_tolerance;
        ordered_json summary;
        summary["scenario"] = scenario_echo(s.config);
        summary["m_solver"] = schedule.m_star();
        summary["m_oracle"] = oracle.m;
        summary["m_delta"] = m_delta;
        summary["m_tolerance"] = s.config.compare.m_tolerance;
        summary["deductible_solver"] = schedule.deductible();
        summary["deductible_oracle"] = oracle.deductible;
        summary["curve_max_delta"] = curve_delta;
        summary["curve_tolerance"] = s.config.compare.curve_tolerance;
        summary["passed"] = m_ok && curve_ok;
        write_file(fs::path(out_dir) / "compare.json", summary.dump(2) + "\n");

        log << "compare: m_delta = " << fmt17(m_delta) << ", curve_max_delta = "
            << fmt17(curve_delta) << (m_ok && curve_ok ? " (ok)\n" : " (exceeded)\n");
        return (m_ok && curve_ok) ? kExitOk : kExitCompareTolerance;
    } catch (const NoConvergence& e) {
        log << "no convergence: " << e.what() << "\n";
        return kExitNoConvergence;
    } catch (const std::exception& e) {
        const int code = classify_failure(e, log);
        if (code >= 0) return code;
        throw;
    }
}

}  // namespace insopt
