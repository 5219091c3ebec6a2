// SPDX-License-Identifier: Apache-2.0
/**
 * @file oracles.hpp
 * @brief Independent ground truths used to verify the solver.
 *
 * Closed-form optimal contracts for exponential losses under the three
 * built-in premium families, a Lambert-W evaluator, an exhaustive discrete
 * optimizer, and a variational perturbation test. None of these share the
 * solver's kappa/h-map code path: the closed forms use their own adaptive
 * Simpson integration and scalar bisection so that agreement with the solver
 * is meaningful evidence.
 */
#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "insopt/solver.hpp"

namespace insopt {

/// Principal-branch Lambert W on z >= 0: returns w >= 0 with w e^w = z to
/// relative accuracy ~1e-13 (Halley iteration from a log-based guess).
double lambert_w(double z);

/// Analytically known optimal contract for an Exponential(lambda) loss.
struct ClosedFormSolution {
    enum class Family { Deductible, QuadraticLambertW, MultiLayer };

    Family family{};
    double gamma = 0.0;
    double lambda = 0.0;
    double m = 0.0;           ///< post-indemnity exponential moment
    double deductible = 0.0;  ///< d = ln(m g'(0+)) / gamma
    /// Branch boundaries of the indemnity in increasing order: just the
    /// deductible for smooth families, the full layer table for MultiLayer.
    std::vector<double> breakpoints;
    /// Evaluates the optimal indemnity at a loss level.
    std::function<double(double)> indemnity;
};

/// Expected-value premium g(x) = (1 + theta) x: the optimal contract is a
/// deductible (x - d)_+ with d solving
///   e^{gamma d} / (1 + theta) = E[e^{gamma min(X, d)}].
/// Throws NoRoot when the equation has no positive root in the bracket.
ClosedFormSolution oracle_deductible(double gamma, double lambda, double theta);

/// Quadratic premium g(x) = x + alpha x^2: above the deductible
///   I(x) = W((gamma / 2 alpha) e^{gamma (x - d + 1/(2 alpha))}) / gamma
///          - 1 / (2 alpha),
/// with d fixed by matching the post-indemnity moment to e^{gamma d}.
/// Outer bisection on d, inner adaptive Simpson for the moment integral.
ClosedFormSolution oracle_quadratic(double gamma, double lambda, double alpha);

/// Multi-layer stop-loss premium: the optimal indemnity alternates slope-1
/// coverage bands with flat caps at the thresholds. The post-indemnity
/// moment is available in closed form for any m, so m* is found by scalar
/// bisection on m - E[e^{gamma (X - I_m(X))}].
ClosedFormSolution oracle_multilayer(double gamma, double lambda,
                                     std::vector<double> loadings,
                                     std::vector<double> thresholds);

/// Exhaustive minimizer of the discrete objective
///   e^{gamma sum_i p_i g(y_i)} * sum_i p_i e^{gamma (x_i - y_i)}
/// over grid payouts y_i in {0, step, ..., x_i}. With comonotone_only the
/// search is restricted to 0 <= y_j - y_i <= x_j - x_i, which contains the
/// optimum; the unrestricted search is available for small spot checks.
struct BruteForceResult {
    std::vector<double> payouts;
    double objective = 0.0;
    long long visited = 0;  ///< candidate vectors evaluated
};

BruteForceResult brute_force_discrete(std::span<const Atom> atoms,
                                      const PremiumFunction& g, double gamma,
                                      double grid_step, bool comonotone_only = true,
                                      long long budget = 10'000'000);

/// The discrete objective itself, exposed for cross-checks.
double discrete_objective(std::span<const Atom> atoms, std::span<const double> payouts,
                          const PremiumFunction& g, double gamma);

/// Result of randomized admissible bump perturbations around a candidate
/// optimum. Every gap is J(I + eps * eta) - J(I); at a true optimum gaps are
/// nonnegative up to numerics because the objective is convex in I.
struct PerturbationReport {
    int trials = 0;
    std::uint64_t seed = 0;
    double min_gap = 0.0;
    double max_gap = 0.0;
    int skipped = 0;  ///< degenerate draws (no admissible scale), resampled
    struct Trial {
        double center = 0.0;
        double half_width = 0.0;
        double scale = 0.0;
        int sign = 0;
        double gap = 0.0;
    };
    Trial worst{};
    double baseline_premium = 0.0;
    double baseline_moment = 0.0;
    double baseline_objective = 0.0;
};

/// Objective change J(I + sign * scale * eta) - J(I) for one explicit bump
/// eta(x) = (x - (center - half_width)) ((center + half_width) - x). The
/// difference is evaluated on the bump support only, against the supplied
/// baseline, so no semi-infinite integral of the perturbed contract is
/// needed. scale == 0 returns exactly 0.
double perturbation_gap(const std::function<double(double)>& indemnity,
                        std::span<const double> indemnity_kinks,
                        const ObjectiveReport& baseline, double center,
                        double half_width, int sign, double scale,
                        const LossDistribution& dist, const PremiumFunction& g,
                        const SolverConfig& cfg);

/// Perturbs a converged schedule with `trials` seeded quadratic bumps
/// eta(x) = (x - (c - w)) ((c + w) - x) on |x - c| < w, signed and scaled so
/// the perturbed indemnity stays admissible.
PerturbationReport perturbation_test(const IndemnitySchedule& schedule,
                                     const LossDistribution& dist,
                                     const SolverConfig& cfg, int trials,
                                     std::uint64_t seed);

/// Same test for an arbitrary indemnity callable with known kinks. The
/// caller certifies x - I(x) <= retention_cap so the baseline moment can be
/// truncated on unbounded support.
PerturbationReport perturbation_test_fn(const std::function<double(double)>& indemnity,
                                        std::span<const double> indemnity_kinks,
                                        double retention_cap,
                                        const LossDistribution& dist,
                                        const PremiumFunction& g,
                                        const SolverConfig& cfg, int trials,
                                        std::uint64_t seed);

}  // namespace insopt
