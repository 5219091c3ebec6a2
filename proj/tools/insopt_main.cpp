// SPDX-License-Identifier: Apache-2.0
//
// insopt — optimal indemnity schedules under convex premium principles.
//
//   insopt solve   --config scenario.json [--out DIR] [--m0 lower|upper|M] [--tol T]
//   insopt verify  --config scenario.json [--out DIR] [--seed S] ...
//   insopt compare --config scenario.json [--out DIR] ...
//
// Default output root: $INSOPT_OUT_ROOT or ./out; artifacts land in
// <root>/<config stem>/.

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "insopt/runner.hpp"

namespace {

std::string default_out_dir(const std::string& config_path) {
    const char* root = std::getenv("INSOPT_OUT_ROOT");
    const std::filesystem::path base = root ? root : "out";
    return (base / std::filesystem::path(config_path).stem()).string();
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{
        "Optimal insurance indemnity under exponential utility with convex "
        "premium principles.\n"
        "Exit codes: 0 ok; 1 compare tolerance exceeded; 2 config error; "
        "3 no convergence; 4 quadrature/moment failure; 5 no matching oracle; "
        "10 comonotonicity; 11 kappa residual; 12 self-consistency; "
        "13 perturbation; 14 admissibility."};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_dir;
    std::optional<std::string> m0;
    std::optional<double> tol;
    std::optional<std::uint64_t> seed;

    auto add_common = [&](CLI::App* cmd) {
        cmd->add_option("--config", config_path, "Scenario JSON file")
            ->required()
            ->check(CLI::ExistingFile);
        cmd->add_option("--out", out_dir, "Output directory for artifacts");
        cmd->add_option("--m0", m0, "Starting point: lower, upper, or a number >= 1");
        cmd->add_option("--tol", tol, "Override the fixed-point stopping tolerance");
        cmd->add_option("--seed", seed, "Override the perturbation RNG seed");
    };

    CLI::App* solve = app.add_subcommand(
        "solve", "Run the fixed-point iteration; write trace.json, indemnity.csv, "
                 "report.json");
    CLI::App* verify = app.add_subcommand(
        "verify", "Solve and run the invariant suite (admissibility, comonotonicity, "
                  "kappa residual, self-consistency, perturbations)");
    CLI::App* compare = app.add_subcommand(
        "compare", "Solve and compare against the matching closed-form oracle");
    add_common(solve);
    add_common(verify);
    add_common(compare);

    CLI11_PARSE(app, argc, argv);

    if (out_dir.empty()) out_dir = default_out_dir(config_path);

    insopt::RunOverrides overrides;
    overrides.m0 = m0;
    overrides.m_tolerance = tol;
    overrides.seed = seed;

    try {
        if (solve->parsed()) {
            return insopt::cmd_solve(config_path, out_dir, overrides, std::cerr);
        }
        if (verify->parsed()) {
            return insopt::cmd_verify(config_path, out_dir, overrides, std::cerr);
        }
        return insopt::cmd_compare(config_path, out_dir, overrides, std::cerr);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 4;
    }
}
