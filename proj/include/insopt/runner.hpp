// SPDX-License-Identifier: Apache-2.0
/**
 * @file runner.hpp
 * @brief Command implementations behind the CLI: solve, verify, compare.
 *
 * Each command reads a scenario, runs the requested pipeline, writes its
 * artifacts under an output directory, and returns a process exit code.
 * Artifacts are deterministic: identical config and seed produce
 * byte-identical bytes. Wall-clock timing goes to stderr only.
 *
 * Exit codes:
 *   0  success (all checks within tolerance)
 *   1  compare deltas exceeded the configured tolerance
 *   2  configuration error (parse/validation/unknown key)
 *   3  fixed-point iteration did not converge
 *   4  quadrature failure or divergent moment
 *   5  scenario has no matching closed-form oracle
 *   10 comonotonicity check failed
 *   11 kappa residual check failed
 *   12 self-consistency of the post-indemnity moment failed
 *   13 perturbation test found an improving direction
 *   14 admissibility bounds violated
 */
#pragma once

#include <iosfwd>
#include <optional>
#include <string>

#include "insopt/scenario.hpp"

namespace insopt {

inline constexpr int kExitOk = 0;
inline constexpr int kExitCompareTolerance = 1;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitNoConvergence = 3;
inline constexpr int kExitQuadrature = 4;
inline constexpr int kExitNoOracle = 5;
inline constexpr int kExitComonotone = 10;
inline constexpr int kExitKappa = 11;
inline constexpr int kExitSelfConsistency = 12;
inline constexpr int kExitPerturbation = 13;
inline constexpr int kExitAdmissibility = 14;

/// Command-line overrides applied on top of the scenario file.
struct RunOverrides {
    std::optional<std::string> m0;
    std::optional<double> m_tolerance;
    std::optional<std::uint64_t> seed;
};

/// Runs the fixed-point solver; writes trace.json, indemnity.csv, and
/// report.json under out_dir.
int cmd_solve(const std::string& config_path, const std::string& out_dir,
              const RunOverrides& overrides, std::ostream& log);

/// Solves, then runs the full invariant suite (admissibility, comonotonicity,
/// kappa residual, self-consistency, perturbations); writes report.json.
int cmd_verify(const std::string& config_path, const std::string& out_dir,
               const RunOverrides& overrides, std::ostream& log);

/// Solves and compares against the matching closed-form oracle; writes
/// compare.csv and compare.json.
int cmd_compare(const std::string& config_path, const std::string& out_dir,
                const RunOverrides& overrides, std::ostream& log);

}  // namespace insopt
