// SPDX-License-Identifier: Apache-2.0
/**
 * @file distributions.hpp
 * @brief Loss distributions and numerically controlled integration against dF.
 *
 * A LossDistribution models the nonnegative insurable loss X. Three families
 * are supported:
 *  - Exponential(rate): unbounded support, closed-form exponential moments
 *    E[e^{g X}] = rate / (rate - g) for g < rate;
 *  - PiecewiseEmpirical: finitely many atoms (x_i, p_i), integrals are exact
 *    weighted sums;
 *  - TruncatedContinuous: user-supplied cdf/density on a bounded interval.
 *
 * integrate_dF evaluates Lebesgue-Stieltjes integrals of user integrands with
 * composite Gauss-Legendre panels and adaptive bisection. Known kinks of the
 * integrand are placed on panel boundaries so each panel sees a smooth
 * function. Integrals over atom families use the convention (lower, upper],
 * with the atom at 0 included when lower == 0, so adjacent ranges add exactly.
 */
#pragma once

#include <cmath>
#include <functional>
#include <limits>
#include <span>
#include <vector>

#include "insopt/errors.hpp"

namespace insopt {

/// One point mass of a discrete loss distribution.
struct Atom {
    double x = 0.0;  ///< loss level, >= 0
    double p = 0.0;  ///< probability, > 0
};

/// Controls for quadrature against dF.
struct QuadratureSpec {
    /// Bound on the neglected weighted tail mass when the integration range
    /// is truncated, and the absolute refinement target per integral.
    double truncation_tail_mass = 1e-12;
    /// Initial composite panels per smooth segment.
    int panel_count = 16;
    /// Maximum adaptive bisection depth per panel.
    int refinement_limit = 14;

    /// Throws std::invalid_argument on out-of-range fields.
    void validate() const;
};

/// Value plus a conservative absolute error bound (panel estimates plus any
/// certified truncation tail).
struct Integral {
    double value = 0.0;
    double error_bound = 0.0;
};

class LossDistribution {
  public:
    enum class Family { Exponential, PiecewiseEmpirical, TruncatedContinuous };

    /// Exponential loss with the given rate (mean 1/rate).
    static LossDistribution exponential(double rate);

    /// Discrete loss on sorted atoms. Requires x strictly increasing, x >= 0,
    /// p > 0, and sum(p) == 1 within 1e-12.
    static LossDistribution empirical(std::vector<Atom> atoms);

    /// Absolutely continuous loss on [0, upper] given by cdf/density
    /// callables. Requires cdf(0) >= 0 and cdf(upper) == 1 within 1e-12.
    static LossDistribution truncated_continuous(std::function<double(double)> cdf,
                                                 std::function<double(double)> density,
                                                 double upper);

    Family family() const { return family_; }

    /// F(x) for x >= 0.
    double cdf(double x) const;

    /// S(x) = 1 - F(x).
    double survival(double x) const { return 1.0 - cdf(x); }

    /// Upper end of the support; +infinity for Exponential.
    double support_upper() const { return support_upper_; }

    bool bounded_support() const { return std::isfinite(support_upper_); }
    bool is_discrete() const { return family_ == Family::PiecewiseEmpirical; }

    /// E[e^{gamma X}]. Throws DivergentMoment when the moment does not exist
    /// (gamma >= rate for the Exponential family).
    double exp_moment(double gamma) const;

    /// Supremum of the gammas with finite E[e^{gamma X}]: the rate for
    /// Exponential, +infinity for bounded-support families.
    double exp_moment_abscissa() const;

    /// Closed-form bound on the weighted tail: integral of e^{gamma x} dF
    /// over (t, infinity). Returns 0 beyond bounded support and +infinity
    /// when the weighted tail diverges.
    double exp_tail_mass(double gamma, double t) const;

    /// Smallest x with F(x) >= q; used for display grids.
    double upper_quantile(double q) const;

    /// Density at x (Exponential / TruncatedContinuous only).
    double density(double x) const;

    /// Atoms of a PiecewiseEmpirical distribution.
    std::span<const Atom> atoms() const { return atoms_; }

    double rate() const { return rate_; }

  private:
    LossDistribution() = default;

    Family family_ = Family::Exponential;
    double rate_ = 0.0;
    double support_upper_ = std::numeric_limits<double>::infinity();
    std::vector<Atom> atoms_;
    std::function<double(double)> cdf_fn_;
    std::function<double(double)> density_fn_;
};

/// Integral of `integrand` against dF over (lower, upper], with `kinks`
/// forced onto panel boundaries. When lower == 0 the atom at 0 is included
/// as well (so ranges starting at the origin carry the full mass) unless
/// include_zero_atom is false, which callers use to continue an adjacent
/// range that already counted it. `upper` may be +infinity; the range is
/// then truncated where the certified tail of e^{weight_growth * x} dF drops
/// below spec.truncation_tail_mass (weight_growth must lie below the
/// exponential moment abscissa). Exact summation for PiecewiseEmpirical.
/// Throws QuadratureBudgetExceeded when the refinement budget is exhausted.
Integral integrate_dF_detail(const LossDistribution& dist,
                             const std::function<double(double)>& integrand,
                             double lower, double upper, const QuadratureSpec& spec,
                             std::span<const double> kinks = {},
                             double weight_growth = 0.0,
                             bool include_zero_atom = true);

/// Value-only convenience wrapper around integrate_dF_detail.
double integrate_dF(const LossDistribution& dist,
                    const std::function<double(double)>& integrand, double lower,
                    double upper, const QuadratureSpec& spec,
                    std::span<const double> kinks = {}, double weight_growth = 0.0,
                    bool include_zero_atom = true);

}  // namespace insopt
