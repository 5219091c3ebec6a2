// SPDX-License-Identifier: Apache-2.0
/**
 * @file scenario.hpp
 * @brief JSON scenario configuration for the command-line front end.
 *
 * A scenario bundles the loss distribution, the premium function, the risk
 * aversion, solver/quadrature controls, and per-command options. Parsing is
 * strict: unknown keys are rejected with the offending path so that typos
 * fail loudly instead of silently using defaults. Serialization round-trips
 * losslessly with stable key order.
 */
#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "insopt/distributions.hpp"
#include "insopt/premium.hpp"
#include "insopt/solver.hpp"

namespace insopt {

struct DistributionSpec {
    std::string family;  ///< "exponential" | "empirical"
    double lambda = 1.0;
    std::vector<Atom> atoms;
};

struct PremiumSpec {
    std::string family;  ///< "expected_value" | "quadratic" | "stop_loss"
    double theta = 0.0;
    double alpha = 0.0;
    std::vector<double> loadings;
    std::vector<double> thresholds;
};

struct OutputSpec {
    int grid_points = 500;
    std::optional<double> grid_max;  ///< default: 0.9999 quantile of the loss
};

struct VerifySpec {
    int trials = 200;
    std::uint64_t seed = 20240115;
    double gap_tolerance = 1e-8;
    int comonotone_points = 2000;
    int kappa_points = 1000;
    double kappa_tolerance = 1e-8;
    double self_consistency_factor = 10.0;  ///< allowed |moment - m*| in units of m_tolerance
};

struct CompareSpec {
    double m_tolerance = 1e-4;
    double curve_tolerance = 1e-5;
    int grid_points = 500;
};

struct ScenarioConfig {
    DistributionSpec distribution;
    PremiumSpec premium;
    double gamma = 1.0;

    double m_tolerance = 1e-8;
    int max_iterations = 500;
    double root_tolerance = 1e-12;
    std::string m0 = "lower";  ///< "lower" | "upper" | numeric literal

    QuadratureSpec quadrature{};
    OutputSpec output{};
    VerifySpec verify{};
    CompareSpec compare{};

    /// Strict parse; throws ConfigError with a line/column or key-path
    /// diagnostic.
    static ScenarioConfig from_json_text(const std::string& text);
    static ScenarioConfig from_file(const std::string& path);

    /// Stable-key-order serialization; from_json_text(to_json_text()) is the
    /// identity.
    std::string to_json_text() const;

    /// Materialized domain objects.
    LossDistribution make_distribution() const;
    PremiumFunction make_premium() const;
    SolverConfig make_solver_config() const;
};

}  // namespace insopt
