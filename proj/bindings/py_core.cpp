// SPDX-License-Identifier: Apache-2.0
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "insopt/oracles.hpp"
#include "insopt/scenario.hpp"

namespace py = pybind11;
using namespace insopt;

PYBIND11_MODULE(_core, m) {
    m.doc() = "Optimal insurance indemnity under exponential utility with convex "
              "premium principles";

    py::register_exception<DivergentMoment>(m, "DivergentMoment");
    py::register_exception<QuadratureBudgetExceeded>(m, "QuadratureBudgetExceeded");
    py::register_exception<DegeneratePremium>(m, "DegeneratePremium");
    py::register_exception<BracketFailure>(m, "BracketFailure");
    py::register_exception<InadmissibleIndemnity>(m, "InadmissibleIndemnity");
    py::register_exception<NoRoot>(m, "NoRoot");
    py::register_exception<BudgetExceeded>(m, "BudgetExceeded");
    py::register_exception<ConfigError>(m, "ConfigError");
    py::register_exception<NoConvergence>(m, "NoConvergenceError");

    py::class_<Atom>(m, "Atom")
        .def(py::init<double, double>(), py::arg("x"), py::arg("p"))
        .def_readwrite("x", &Atom::x)
        .def_readwrite("p", &Atom::p)
        .def("__repr__", [](const Atom& a) {
            return "Atom(x=" + std::to_string(a.x) + ", p=" + std::to_string(a.p) + ")";
        });

    py::class_<QuadratureSpec>(m, "QuadratureSpec")
        .def(py::init<>())
        .def_readwrite("truncation_tail_mass", &QuadratureSpec::truncation_tail_mass)
        .def_readwrite("panel_count", &QuadratureSpec::panel_count)
        .def_readwrite("refinement_limit", &QuadratureSpec::refinement_limit);

    py::class_<LossDistribution>(m, "LossDistribution")
        .def_static("exponential", &LossDistribution::exponential, py::arg("rate"))
        .def_static("empirical",
                    [](const std::vector<std::pair<double, double>>& pairs) {
                        std::vector<Atom> atoms;
                        atoms.reserve(pairs.size());
                        for (const auto& [x, p] : pairs) atoms.push_back({x, p});
                        return LossDistribution::empirical(std::move(atoms));
                    },
                    py::arg("atoms"))
        .def("cdf", &LossDistribution::cdf, py::arg("x"))
        .def("survival", &LossDistribution::survival, py::arg("x"))
        .def("exp_moment", &LossDistribution::exp_moment, py::arg("gamma"))
        .def("upper_quantile", &LossDistribution::upper_quantile, py::arg("q"))
        .def_property_readonly("bounded_support", &LossDistribution::bounded_support);

    py::enum_<Side>(m, "Side").value("LEFT", Side::Left).value("RIGHT", Side::Right);

    py::class_<PremiumFunction>(m, "PremiumFunction")
        .def_static("expected_value", &PremiumFunction::expected_value,
                    py::arg("theta"))
        .def_static("quadratic", &PremiumFunction::quadratic, py::arg("alpha"))
        .def_static("stop_loss", &PremiumFunction::stop_loss, py::arg("loadings"),
                    py::arg("thresholds"))
        .def("value", &PremiumFunction::value, py::arg("y"))
        .def("deriv", &PremiumFunction::deriv, py::arg("y"),
             py::arg("side") = Side::Right)
        .def("validate",
             [](const PremiumFunction& g, double grid_max, int grid_points) {
                 const auto rep = g.validate(grid_max, grid_points);
                 py::dict out;
                 out["passed"] = rep.passed;
                 out["extended_family"] = rep.extended_family;
                 py::list checks;
                 for (const auto& c : rep.checks) {
                     py::dict item;
                     item["name"] = c.name;
                     item["passed"] = c.passed;
                     item["detail"] = c.detail;
                     checks.append(item);
                 }
                 out["checks"] = checks;
                 return out;
             },
             py::arg("grid_max") = 10.0, py::arg("grid_points") = 1000);

    py::enum_<M0Strategy>(m, "M0Strategy")
        .value("LOWER_ENDPOINT", M0Strategy::LowerEndpoint)
        .value("UPPER_ENDPOINT", M0Strategy::UpperEndpoint)
        .value("CUSTOM", M0Strategy::Custom);

    py::class_<SolverConfig>(m, "SolverConfig")
        .def(py::init<>())
        .def_readwrite("gamma", &SolverConfig::gamma)
        .def_readwrite("m_tolerance", &SolverConfig::m_tolerance)
        .def_readwrite("max_iterations", &SolverConfig::max_iterations)
        .def_readwrite("root_tolerance", &SolverConfig::root_tolerance)
        .def_readwrite("m0_strategy", &SolverConfig::m0_strategy)
        .def_readwrite("m0_custom", &SolverConfig::m0_custom)
        .def_readwrite("quadrature", &SolverConfig::quadrature);

    py::class_<IterationRecord>(m, "IterationRecord")
        .def_readonly("n", &IterationRecord::n)
        .def_readonly("m", &IterationRecord::m)
        .def_readonly("deductible", &IterationRecord::deductible)
        .def_readonly("residual", &IterationRecord::residual);

    py::enum_<TraceDirection>(m, "TraceDirection")
        .value("INCREASING", TraceDirection::Increasing)
        .value("DECREASING", TraceDirection::Decreasing)
        .value("STATIONARY", TraceDirection::Stationary);

    py::class_<SolverTrace>(m, "SolverTrace")
        .def_readonly("iterations", &SolverTrace::iterations)
        .def_readonly("converged", &SolverTrace::converged)
        .def_readonly("direction", &SolverTrace::direction)
        .def_readonly("m0", &SolverTrace::m0)
        .def_readonly("fixed_point_residual", &SolverTrace::fixed_point_residual);

    py::class_<IndemnitySchedule>(m, "IndemnitySchedule")
        .def_property_readonly("m_star", &IndemnitySchedule::m_star)
        .def_property_readonly("deductible", &IndemnitySchedule::deductible)
        .def_property_readonly("gamma", &IndemnitySchedule::gamma)
        .def("__call__", &IndemnitySchedule::operator(), py::arg("x"))
        .def("retention", &IndemnitySchedule::retention, py::arg("x"))
        .def("curve",
             [](const IndemnitySchedule& s, double x_max, int points) {
                 py::list out;
                 for (const auto& p : s.curve(x_max, points)) {
                     out.append(py::make_tuple(p.x, p.indemnity, p.retained));
                 }
                 return out;
             },
             py::arg("x_max"), py::arg("points") = 500)
        .def("plateaus", [](const IndemnitySchedule& s) {
            py::list out;
            for (const auto& p : s.plateaus()) {
                out.append(py::make_tuple(p.level, p.x_enter, p.x_exit));
            }
            return out;
        });

    py::class_<ObjectiveReport>(m, "ObjectiveReport")
        .def_readonly("premium_value", &ObjectiveReport::premium_value)
        .def_readonly("post_indemnity_moment", &ObjectiveReport::post_indemnity_moment)
        .def_readonly("objective_value", &ObjectiveReport::objective_value)
        .def_readonly("certainty_equivalent", &ObjectiveReport::certainty_equivalent);

    m.def("deductible_from_m", &deductible_from_m, py::arg("m"), py::arg("gamma"),
          py::arg("premium"));
    m.def("kappa", &kappa, py::arg("x"), py::arg("y"), py::arg("m"), py::arg("gamma"),
          py::arg("premium"));
    m.def("indemnity_at", &indemnity_at, py::arg("x"), py::arg("m"), py::arg("config"),
          py::arg("premium"));
    m.def("h_map", &h_map, py::arg("m"), py::arg("distribution"), py::arg("premium"),
          py::arg("config"));
    m.def(
        "fixed_point_solve",
        [](const LossDistribution& dist, const PremiumFunction& g,
           const SolverConfig& cfg) {
            auto res = fixed_point_solve(dist, g, cfg);
            return py::make_tuple(std::move(res.schedule), std::move(res.trace));
        },
        py::arg("distribution"), py::arg("premium"), py::arg("config"),
        "Returns (schedule, trace)");
    m.def("objective",
          py::overload_cast<const IndemnitySchedule&, const LossDistribution&,
                            const SolverConfig&>(&objective),
          py::arg("schedule"), py::arg("distribution"), py::arg("config"));
    m.def("post_indemnity_moment", &post_indemnity_moment, py::arg("schedule"),
          py::arg("distribution"), py::arg("config"));
    m.def(
        "check_comonotone",
        [](const IndemnitySchedule& s, const std::vector<double>& grid, double slack) {
            const auto rep = check_comonotone(s, grid, slack);
            py::dict out;
            out["ok"] = rep.ok;
            out["reason"] = rep.reason;
            out["x_lo"] = rep.x_lo;
            out["x_hi"] = rep.x_hi;
            return out;
        },
        py::arg("schedule"), py::arg("grid"), py::arg("slack") = 1e-9);

    m.def("lambert_w", &lambert_w, py::arg("z"));

    auto closed_form_to_dict = [](const ClosedFormSolution& sol) {
        py::dict out;
        out["m"] = sol.m;
        out["deductible"] = sol.deductible;
        out["gamma"] = sol.gamma;
        out["lambda"] = sol.lambda;
        out["breakpoints"] = sol.breakpoints;
        out["indemnity"] = py::cpp_function(sol.indemnity);
        return out;
    };
    m.def("oracle_deductible",
          [closed_form_to_dict](double gamma, double lambda, double theta) {
              return closed_form_to_dict(oracle_deductible(gamma, lambda, theta));
          },
          py::arg("gamma"), py::arg("lambda_"), py::arg("theta"));
    m.def("oracle_quadratic",
          [closed_form_to_dict](double gamma, double lambda, double alpha) {
              return closed_form_to_dict(oracle_quadratic(gamma, lambda, alpha));
          },
          py::arg("gamma"), py::arg("lambda_"), py::arg("alpha"));
    m.def("oracle_multilayer",
          [closed_form_to_dict](double gamma, double lambda,
                                const std::vector<double>& loadings,
                                const std::vector<double>& thresholds) {
              return closed_form_to_dict(
                  oracle_multilayer(gamma, lambda, loadings, thresholds));
          },
          py::arg("gamma"), py::arg("lambda_"), py::arg("loadings"),
          py::arg("thresholds"));

    m.def(
        "brute_force_discrete",
        [](const std::vector<std::pair<double, double>>& pairs,
           const PremiumFunction& g, double gamma, double grid_step,
           bool comonotone_only, long long budget) {
            std::vector<Atom> atoms;
            for (const auto& [x, p] : pairs) atoms.push_back({x, p});
            const auto res =
                brute_force_discrete(atoms, g, gamma, grid_step, comonotone_only, budget);
            py::dict out;
            out["payouts"] = res.payouts;
            out["objective"] = res.objective;
            out["visited"] = res.visited;
            return out;
        },
        py::arg("atoms"), py::arg("premium"), py::arg("gamma"), py::arg("grid_step"),
        py::arg("comonotone_only") = true, py::arg("budget") = 10'000'000LL);

    m.def(
        "perturbation_test",
        [](const IndemnitySchedule& s, const LossDistribution& dist,
           const SolverConfig& cfg, int trials, std::uint64_t seed) {
            const auto rep = perturbation_test(s, dist, cfg, trials, seed);
            py::dict out;
            out["trials"] = rep.trials;
            out["seed"] = rep.seed;
            out["min_gap"] = rep.min_gap;
            out["max_gap"] = rep.max_gap;
            out["skipped"] = rep.skipped;
            out["baseline_objective"] = rep.baseline_objective;
            return out;
        },
        py::arg("schedule"), py::arg("distribution"), py::arg("config"),
        py::arg("trials") = 200, py::arg("seed") = 20240115);

    m.attr("__version__") = "0.1.0";
}
