// SPDX-License-Identifier: Apache-2.0
/**
 * @file solver.hpp
 * @brief Optimal-indemnity machinery: deductible, kappa root finder, h map,
 *        and the monotone fixed-point iteration.
 *
 * For a scalar m >= 1 the candidate indemnity I_m is
 *
 *   I_m(x) = 0                         for x <= d(m),
 *   I_m(x) = unique y in (0, x) with   e^{gamma (x - y)} = m g'(y),
 *
 * where d(m) = ln(m g'(0+)) / gamma. The post-indemnity exponential moment
 *
 *   h(m) = E[e^{gamma (X - I_m(X))}]
 *
 * is continuous and strictly increasing with a unique fixed point m* >= 1;
 * iterating m_{n} = h(m_{n-1}) converges monotonically to m* from any
 * admissible starting point, and I_{m*} is the optimal contract.
 *
 * At kinks of g' the root condition is replaced by subdifferential
 * bracketing, e^{gamma (x - y)} in m [g'(y-), g'(y+)], which produces the
 * flat layers of piecewise-linear premium functions; the root finder snaps
 * to the kink exactly in that case.
 */
#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "insopt/distributions.hpp"
#include "insopt/premium.hpp"

namespace insopt {

/// Choice of the fixed-point starting value M0.
enum class M0Strategy {
    LowerEndpoint,  ///< M0 = 1
    UpperEndpoint,  ///< M0 = E[e^{gamma X}] (must be finite)
    Custom,         ///< M0 = m0_custom
};

struct SolverConfig {
    double gamma = 1.0;          ///< absolute risk aversion, > 0
    double m_tolerance = 1e-8;   ///< stop when |M_n - M_{n-1}| <= m_tolerance
    int max_iterations = 500;
    double root_tolerance = 1e-12;  ///< absolute bisection tolerance on y
    M0Strategy m0_strategy = M0Strategy::LowerEndpoint;
    double m0_custom = 1.0;      ///< used when m0_strategy == Custom, >= 1
    QuadratureSpec quadrature{};

    /// Throws std::invalid_argument on out-of-range fields.
    void validate() const;
};

/// One fixed-point iteration record.
struct IterationRecord {
    int n = 0;
    double m = 0.0;           ///< M_n
    double deductible = 0.0;  ///< d_n induced by M_{n-1}
    double residual = 0.0;    ///< |M_n - M_{n-1}|
};

enum class TraceDirection { Increasing, Decreasing, Stationary };

struct SolverTrace {
    std::vector<IterationRecord> iterations;
    bool converged = false;
    TraceDirection direction = TraceDirection::Stationary;
    double m0 = 1.0;
    /// |h(m_star) - m_star| evaluated once after the loop; a small step
    /// residual alone does not bound the distance to the fixed point.
    double fixed_point_residual = 0.0;
};

/// Fixed-point iteration ran out of iterations. Carries the trace so callers
/// can report partial progress.
struct NoConvergence : Error {
    NoConvergence(const std::string& what, SolverTrace trace_)
        : Error(what), trace(std::move(trace_)) {}
    SolverTrace trace;
};

/// The converged optimal contract: evaluates I(x) on demand from (m*, g,
/// gamma). Immutable and safe for concurrent evaluation.
class IndemnitySchedule {
  public:
    IndemnitySchedule(double m_star, double gamma, PremiumFunction g,
                      double root_tolerance = 1e-12);

    double m_star() const { return m_star_; }
    double deductible() const { return deductible_; }
    double gamma() const { return gamma_; }
    const PremiumFunction& premium_function() const { return g_; }

    /// I(x); 0 below the deductible, kappa root (or kink snap) above.
    double operator()(double x) const;

    /// x - I(x).
    double retention(double x) const { return x - (*this)(x); }

    /// One flat layer of the schedule, induced by a kink of g'.
    struct Plateau {
        double level = 0.0;    ///< indemnity value on the layer
        double x_enter = 0.0;  ///< first loss with I(x) == level
        double x_exit = 0.0;   ///< last loss with I(x) == level
    };

    /// Flat layers in increasing order (empty for smooth g).
    std::vector<Plateau> plateaus() const;

    /// Slope breakpoints of x -> I(x) up to x_max: the deductible plus every
    /// plateau boundary. Sorted, deduplicated, all in (0, x_max).
    std::vector<double> breakpoints(double x_max) const;

    struct CurvePoint {
        double x = 0.0;
        double indemnity = 0.0;
        double retained = 0.0;
    };

    /// Uniform grid over [0, x_max] with the breakpoints inserted as
    /// mandatory nodes, so plateaus are never straddled.
    std::vector<CurvePoint> curve(double x_max, int points) const;

  private:
    double m_star_;
    double gamma_;
    double root_tolerance_;
    PremiumFunction g_;
    double deductible_;
};

/// Premium pi(I), objective J(I) = e^{gamma pi(I)} E[e^{gamma (X - I(X))}],
/// and the certainty equivalent ln(J)/gamma.
struct ObjectiveReport {
    double premium_value = 0.0;
    double post_indemnity_moment = 0.0;
    double objective_value = 0.0;
    double certainty_equivalent = 0.0;
};

/// Result of a comonotonicity / 1-Lipschitz sweep over a grid.
struct ComonotoneReport {
    bool ok = true;
    int violation_index = -1;  ///< left index of the offending pair
    double x_lo = 0.0;
    double x_hi = 0.0;
    std::string reason;
};

/// d(m) = ln(m g'(0+)) / gamma. Throws DegeneratePremium when
/// m g'(0+) <= 1, which cannot happen for admissible g and m > 1.
double deductible_from_m(double m, double gamma, const PremiumFunction& g);

/// kappa(y) = e^{gamma (x - y)} - m g'(y+), strictly decreasing in y.
double kappa(double x, double y, double m, double gamma, const PremiumFunction& g);

/// The candidate indemnity at loss x for a given m: 0 at or below the
/// deductible, otherwise the kappa root located by kink snapping plus
/// bracketing bisection. Intermediate iterates with m g'(0+) == 1 are
/// allowed (deductible 0).
double indemnity_at(double x, double m, const SolverConfig& cfg,
                    const PremiumFunction& g);

/// h(m) = E[e^{gamma (X - I_m(X))}] with certified tail truncation. Strictly
/// increasing in m; h(1) > 1.
double h_map(double m, const LossDistribution& dist, const PremiumFunction& g,
             const SolverConfig& cfg);

struct SolveResult {
    IndemnitySchedule schedule;
    SolverTrace trace;
};

/// Iterates M_n = h(M_{n-1}) from the configured M0 until the step residual
/// drops below m_tolerance. Throws NoConvergence (with trace) when
/// max_iterations is exhausted.
SolveResult fixed_point_solve(const LossDistribution& dist, const PremiumFunction& g,
                              const SolverConfig& cfg);

/// Recomputes E[e^{gamma (X - I(X))}] from the schedule; equals m_star up to
/// solver plus quadrature tolerances.
double post_indemnity_moment(const IndemnitySchedule& schedule,
                             const LossDistribution& dist, const SolverConfig& cfg);

/// Objective report for a converged schedule.
ObjectiveReport objective(const IndemnitySchedule& schedule,
                          const LossDistribution& dist, const SolverConfig& cfg);

/// Objective report for an arbitrary admissible indemnity callable.
/// Admissibility (0 <= I <= x within 1e-10) is checked on an evaluation grid;
/// violations throw InadmissibleIndemnity. On unbounded support the
/// post-indemnity tail is certified either by gamma < rate or by a caller
/// supplied retention cap (x - I(x) <= cap for all x); otherwise throws
/// DivergentMoment.
ObjectiveReport objective(const std::function<double(double)>& indemnity,
                          std::span<const double> indemnity_kinks,
                          const LossDistribution& dist, const PremiumFunction& g,
                          const SolverConfig& cfg,
                          std::optional<double> retention_cap = std::nullopt);

/// Pairwise-adjacent check of 0 <= I(x') - I(x) <= x' - x on a sorted grid.
ComonotoneReport check_comonotone(const std::function<double(double)>& indemnity,
                                  std::span<const double> grid, double slack = 1e-9);

/// Schedule-aware variant: additionally requires strict increase beyond the
/// deductible except across the schedule's flat layers.
ComonotoneReport check_comonotone(const IndemnitySchedule& schedule,
                                  std::span<const double> grid, double slack = 1e-9);

}  // namespace insopt
