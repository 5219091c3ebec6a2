// SPDX-License-Identifier: Apache-2.0
#include "insopt/premium.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <utility>

namespace insopt {

PremiumFunction PremiumFunction::expected_value(double theta) {
    if (!(theta > 0.0)) throw std::invalid_argument("expected-value loading must be positive");
    PremiumFunction g;
    g.family_ = Family::ExpectedValue;
    g.theta_ = theta;
    return g;
}

PremiumFunction PremiumFunction::quadratic(double alpha) {
    if (!(alpha > 0.0)) throw std::invalid_argument("quadratic loading must be positive");
    PremiumFunction g;
    g.family_ = Family::Quadratic;
    g.alpha_ = alpha;
    return g;
}

PremiumFunction PremiumFunction::stop_loss(std::vector<double> loadings,
                                           std::vector<double> thresholds) {
    if (loadings.empty() || loadings.size() != thresholds.size()) {
        throw std::invalid_argument("stop-loss needs matching nonempty loadings/thresholds");
    }
    double prev = 0.0;
    for (std::size_t i = 0; i < loadings.size(); ++i) {
        if (!(loadings[i] > 0.0)) throw std::invalid_argument("loadings must be positive");
        if (!(thresholds[i] > prev)) {
            throw std::invalid_argument("thresholds must be positive and strictly increasing");
        }
        prev = thresholds[i];
    }
    PremiumFunction g;
    g.family_ = Family::MultiLayerStopLoss;
    g.loadings_ = std::move(loadings);
    g.thresholds_ = std::move(thresholds);
    g.kinks_ = g.thresholds_;
    g.cumulative_loadings_.resize(g.loadings_.size() + 1);
    g.cumulative_loadings_[0] = 1.0;
    for (std::size_t i = 0; i < g.loadings_.size(); ++i) {
        g.cumulative_loadings_[i + 1] = g.cumulative_loadings_[i] + g.loadings_[i];
    }
    return g;
}

PremiumFunction PremiumFunction::custom(std::function<double(double)> value,
                                        std::function<double(double)> right_deriv,
                                        std::vector<double> kinks,
                                        std::optional<std::pair<double, double>>
                                            deriv_affine_bound) {
    if (!value || !right_deriv) {
        throw std::invalid_argument("custom premium needs value and right-derivative");
    }
    std::sort(kinks.begin(), kinks.end());
    PremiumFunction g;
    g.family_ = Family::CustomConvex;
    g.custom_value_ = std::move(value);
    g.custom_rderiv_ = std::move(right_deriv);
    g.custom_bound_ = deriv_affine_bound;
    g.kinks_ = std::move(kinks);
    return g;
}

double PremiumFunction::value(double y) const {
    if (!(y >= 0.0)) throw std::invalid_argument("premium argument must be >= 0");
    switch (family_) {
        case Family::ExpectedValue:
            return (1.0 + theta_) * y;
        case Family::Quadratic:
            return y + alpha_ * y * y;
        case Family::MultiLayerStopLoss: {
            double acc = y;
            for (std::size_t i = 0; i < loadings_.size(); ++i) {
                if (y > thresholds_[i]) acc += loadings_[i] * (y - thresholds_[i]);
            }
            return acc;
        }
        case Family::CustomConvex:
            return custom_value_(y);
    }
    return y;
}

double PremiumFunction::deriv(double y, Side side) const {
    if (!(y >= 0.0)) throw std::invalid_argument("premium argument must be >= 0");
    if (side == Side::Left && !(y > 0.0)) {
        throw std::invalid_argument("left derivative requires y > 0");
    }
    switch (family_) {
        case Family::ExpectedValue:
            return 1.0 + theta_;
        case Family::Quadratic:
            return 1.0 + 2.0 * alpha_ * y;
        case Family::MultiLayerStopLoss: {
            double slope = 1.0;
            for (std::size_t i = 0; i < loadings_.size(); ++i) {
                const bool beyond = (side == Side::Right) ? (y >= thresholds_[i])
                                                          : (y > thresholds_[i]);
                if (beyond) slope += loadings_[i];
            }
            return slope;
        }
        case Family::CustomConvex: {
            if (side == Side::Right) return custom_rderiv_(y);
            // evaluate the right derivative just below y
            const double eps = std::max(1e-12, 1e-12 * y);
            return custom_rderiv_(std::max(0.0, y - eps));
        }
    }
    return 1.0;
}

std::optional<std::pair<double, double>> PremiumFunction::deriv_affine_bound() const {
    switch (family_) {
        case Family::ExpectedValue:
            return std::pair{1.0 + theta_, 0.0};
        case Family::Quadratic:
            return std::pair{1.0, 2.0 * alpha_};
        case Family::MultiLayerStopLoss:
            return std::pair{cumulative_loadings_.back(), 0.0};
        case Family::CustomConvex:
            return custom_bound_;
    }
    return std::nullopt;
}

ValidationReport PremiumFunction::validate(double grid_max, int grid_points) const {
    if (grid_points < 3) throw std::invalid_argument("grid_points must be >= 3");
    if (!(grid_max > 0.0)) throw std::invalid_argument("grid_max must be positive");

    ValidationReport report;
    report.extended_family = !kinks_.empty();

    const double step = grid_max / (grid_points - 1);
    bool zero_ok = std::abs(value(0.0)) <= 1e-12;
    bool dominates = true;
    bool convex = true;
    bool slope_ge1 = deriv(0.0, Side::Right) >= 1.0 - 1e-12;
    bool not_identity = false;
    double worst_x = 0.0;

    double prev_slope = deriv(0.0, Side::Right);
    for (int i = 0; i < grid_points; ++i) {
        const double x = i * step;
        const double gx = value(x);
        if (gx < x - 1e-12 * std::max(1.0, x)) {
            dominates = false;
            worst_x = x;
        }
        if (gx > x + 1e-9 * std::max(1.0, x)) not_identity = true;
        const double slope = deriv(x, Side::Right);
        if (slope < prev_slope - 1e-12 * std::max(1.0, prev_slope)) convex = false;
        if (slope < 1.0 - 1e-12) slope_ge1 = false;
        prev_slope = slope;
    }

    auto add = [&](std::string name, bool ok, std::string detail) {
        report.checks.push_back({std::move(name), ok, std::move(detail)});
    };
    add("g(0) == 0", zero_ok, zero_ok ? "" : "g(0) != 0");
    add("g(x) >= x", dominates,
        dominates ? "" : "violated near x = " + std::to_string(worst_x));
    add("convex (right-derivative nondecreasing)", convex,
        convex ? "" : "right derivative decreases on the grid");
    add("g'(y+) >= 1", slope_ge1, slope_ge1 ? "" : "slope below 1 on the grid");
    add("g not identically x", not_identity,
        not_identity ? "" : "g(x) == x at every grid point");

    report.passed = zero_ok && dominates && convex && slope_ge1 && not_identity;
    return report;
}

double premium(const PremiumFunction& g, const std::function<double(double)>& indemnity,
               std::span<const double> indemnity_kinks, const LossDistribution& dist,
               const QuadratureSpec& spec) {
    auto integrand = [&](double x) { return g.value(std::max(0.0, indemnity(x))); };

    double upper = dist.support_upper();
    if (!std::isfinite(upper)) {
        // 0 <= I(x) <= x and g convex with g(0) = 0 give
        // g(I(x)) <= g(x) <= x g'(x) <= x (a + b x); truncate on that envelope.
        const auto bound = g.deriv_affine_bound();
        if (!bound) {
            throw DivergentMoment(
                "cannot certify premium tail for a custom premium function without a "
                "derivative envelope on unbounded support");
        }
        const auto [a, b] = *bound;
        const double rate = dist.rate();
        // integral_T^inf x (a + b x) dF <= e^{-rate T} ((a + b T)(T + 1/rate)
        //   + (b / rate)(T + 2 / rate)); bound it with the affine helper on
        //   coefficients (a + 2 b / rate, b) times (T + 1/rate) shape.
        auto tail = [&](double t) {
            return std::exp(-rate * t) *
                   ((a + b * t) * (t + 1.0 / rate) +
                    (b / rate) * (t + 2.0 / rate));
        };
        double t = 1.0;
        while (tail(t) > spec.truncation_tail_mass) {
            t *= 2.0;
            if (t > 1e8) throw QuadratureBudgetExceeded("premium tail truncation exceeds 1e8");
        }
        upper = t;
    }

    return integrate_dF(dist, integrand, 0.0, upper, spec, indemnity_kinks);
}

}  // namespace insopt
