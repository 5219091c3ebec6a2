// SPDX-License-Identifier: Apache-2.0
/**
 * @file premium.hpp
 * @brief Convex premium functions g and the premium functional E[g(I(X))].
 *
 * Admissible premium functions are increasing convex g with g(0) = 0 and
 * g(x) >= x (hence g' >= 1), excluding the identity. Built-in families:
 *  - ExpectedValue(theta):        g(x) = (1 + theta) x
 *  - Quadratic(alpha):            g(x) = x + alpha x^2
 *  - MultiLayerStopLoss(t, d):    g(x) = x + sum_i t_i (x - d_i)_+
 *  - CustomConvex:                value / right-derivative callables
 *
 * The stop-loss family is not differentiable at its thresholds; it is
 * accepted as an "extended family" and exposed through one-sided derivatives,
 * with the subdifferential [g'(y-), g'(y+)] available at kinks.
 */
#pragma once

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "insopt/distributions.hpp"

namespace insopt {

/// Which one-sided derivative of g to evaluate.
enum class Side { Left, Right };

/// Outcome of one membership check on a validation grid.
struct ValidationCheck {
    std::string name;
    bool passed = false;
    std::string detail;
};

/// Grid-based report on membership in the admissible premium class.
struct ValidationReport {
    std::vector<ValidationCheck> checks;
    bool passed = false;
    /// True for families with derivative kinks (piecewise-linear stop-loss):
    /// convex and admissible in every other respect, but outside the smooth
    /// class the uniqueness theory is stated for.
    bool extended_family = false;
};

class PremiumFunction {
  public:
    enum class Family { ExpectedValue, Quadratic, MultiLayerStopLoss, CustomConvex };

    /// g(x) = (1 + theta) x, theta > 0.
    static PremiumFunction expected_value(double theta);

    /// g(x) = x + alpha x^2, alpha > 0.
    static PremiumFunction quadratic(double alpha);

    /// g(x) = x + sum_i loadings[i] * (x - thresholds[i])_+ with positive
    /// loadings and strictly increasing positive thresholds.
    static PremiumFunction stop_loss(std::vector<double> loadings,
                                     std::vector<double> thresholds);

    /// Arbitrary convex g given by value and right-derivative callables plus
    /// the list of derivative kinks. `deriv_affine_bound`, when provided,
    /// certifies g'(x) <= first + second * x and enables tail truncation on
    /// unbounded-support distributions.
    static PremiumFunction custom(std::function<double(double)> value,
                                  std::function<double(double)> right_deriv,
                                  std::vector<double> kinks,
                                  std::optional<std::pair<double, double>>
                                      deriv_affine_bound = std::nullopt);

    Family family() const { return family_; }

    /// g(y) for y >= 0.
    double value(double y) const;

    /// One-sided derivative. Side::Left requires y > 0.
    double deriv(double y, Side side) const;
    double deriv_right(double y) const { return deriv(y, Side::Right); }
    double deriv_left(double y) const { return deriv(y, Side::Left); }

    /// g'(0+), the slope entering the deductible formula.
    double deriv_at_zero() const { return deriv(0.0, Side::Right); }

    /// Sorted kink locations of g' (empty for smooth families).
    std::span<const double> kinks() const { return kinks_; }
    bool smooth() const { return kinks_.empty(); }

    /// Affine envelope (a, b) with g'(x) <= a + b x for all x >= 0, when one
    /// is known. Built-in families always provide one.
    std::optional<std::pair<double, double>> deriv_affine_bound() const;

    /// Checks the admissibility conditions on grid_points samples of
    /// [0, grid_max]. Built-in families pass by construction.
    ValidationReport validate(double grid_max = 10.0, int grid_points = 1000) const;

    /// Family parameters, for reports.
    double theta() const { return theta_; }
    double alpha() const { return alpha_; }
    std::span<const double> loadings() const { return loadings_; }
    std::span<const double> thresholds() const { return thresholds_; }

  private:
    PremiumFunction() = default;

    Family family_ = Family::ExpectedValue;
    double theta_ = 0.0;
    double alpha_ = 0.0;
    std::vector<double> loadings_;
    std::vector<double> thresholds_;
    std::vector<double> cumulative_loadings_;  // stop-loss: 1 + sum of loadings up to i
    std::function<double(double)> custom_value_;
    std::function<double(double)> custom_rderiv_;
    std::optional<std::pair<double, double>> custom_bound_;
    std::vector<double> kinks_;
};

/// Premium functional pi(I) = E[g(I(X))] for an indemnity callable with known
/// kinks. Requires 0 <= I(x) <= x. On unbounded support the tail is truncated
/// with the affine envelope of g'; throws DivergentMoment when no envelope is
/// available.
double premium(const PremiumFunction& g, const std::function<double(double)>& indemnity,
               std::span<const double> indemnity_kinks, const LossDistribution& dist,
               const QuadratureSpec& spec);

}  // namespace insopt
