// SPDX-License-Identifier: Apache-2.0
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "insopt/oracles.hpp"

using namespace insopt;

namespace {

const auto kExp1 = LossDistribution::exponential(1.0);

SolverConfig config_for(double gamma) {
    SolverConfig cfg;
    cfg.gamma = gamma;
    return cfg;
}

/// Golden-section minimizer on [lo, hi] for the single-atom cross-check.
double golden_min(const std::function<double(double)>& f, double lo, double hi) {
    const double phi = (std::sqrt(5.0) - 1.0) / 2.0;
    double a = lo, b = hi;
    double c = b - phi * (b - a);
    double d = a + phi * (b - a);
    for (int i = 0; i < 200; ++i) {
        if (f(c) < f(d)) b = d;
        else a = c;
        c = b - phi * (b - a);
        d = a + phi * (b - a);
    }
    return 0.5 * (a + b);
}

}  // namespace

TEST_CASE("lambert_w basics") {
    CHECK(lambert_w(0.0) == 0.0);
    CHECK(lambert_w(std::exp(1.0)) == doctest::Approx(1.0).epsilon(1e-14));
    const double w5 = lambert_w(5.0);
    CHECK(std::abs(w5 * std::exp(w5) - 5.0) <= 1e-13);
    CHECK_THROWS_AS(lambert_w(-0.1), std::invalid_argument);
}

TEST_CASE("lambert_w back-substitution on a log grid") {
    for (int i = -8; i <= 8; ++i) {
        for (double mult : {1.0, 2.5, 7.3}) {
            const double z = mult * std::pow(10.0, i);
            const double w = lambert_w(z);
            CHECK(w >= 0.0);
            CHECK(std::abs(w * std::exp(w) - z) <= 1e-12 * std::max(1.0, z));
        }
    }
    // huge arguments, where w e^w itself would overflow: check in log space
    for (double z : {1e20, 1e100, 1e300}) {
        const double w = lambert_w(z);
        CHECK(std::abs(std::log(w) + w - std::log(z)) <= 1e-12);
    }
}

TEST_CASE("deductible oracle reproduces the analytic contract") {
    const auto sol = oracle_deductible(2.0, 1.0, 1.0 / 3.0);
    CHECK(sol.deductible == doctest::Approx(std::log(2.0)).epsilon(1e-10));
    CHECK(sol.m == doctest::Approx(3.0).epsilon(1e-10));
    // substitute into 3 e^{2d} - 8 e^{d} + 4 = 0
    const double d = sol.deductible;
    CHECK(3.0 * std::exp(2.0 * d) - 8.0 * std::exp(d) + 4.0 ==
          doctest::Approx(0.0).epsilon(1e-9));
    CHECK(sol.indemnity(2.0) == doctest::Approx(2.0 - std::log(2.0)));
    CHECK(sol.indemnity(0.1) == 0.0);
}

TEST_CASE("deductible oracle at gamma below lambda") {
    const auto sol = oracle_deductible(0.5, 1.0, 0.3);
    CHECK(sol.m == doctest::Approx(std::exp(0.5 * sol.deductible) / 1.3).epsilon(1e-12));
    // the oracle's m is a fixed point of the solver's h map (cross-route)
    const double h_at_m = h_map(sol.m, kExp1,
                                PremiumFunction::expected_value(0.3), config_for(0.5));
    CHECK(std::abs(h_at_m - sol.m) <= 1e-8);
}

TEST_CASE("quadratic oracle matches the reported example") {
    const auto sol = oracle_quadratic(2.0, 1.0, 0.5);
    CHECK(sol.deductible == doctest::Approx(0.8452).epsilon(2e-5));
    CHECK(sol.m == doctest::Approx(5.4214).epsilon(2e-5));

    // I(d) = 0 for several parameter sets
    for (const auto& [gamma, alpha] : {std::pair{2.0, 0.5}, {0.7, 0.3}, {1.2, 1.0}}) {
        const auto s = oracle_quadratic(gamma, 1.0, alpha);
        CHECK(std::abs(s.indemnity(s.deductible)) <= 1e-12);
        CHECK(s.indemnity(s.deductible + 1e-9) >= 0.0);
    }

    // visibly linear but not actually linear
    const double d = sol.deductible;
    const double mid2 = 2.0 * sol.indemnity(d + 2.0);
    const double ends = sol.indemnity(d + 1.0) + sol.indemnity(d + 3.0);
    CHECK(std::abs(mid2 - ends) > 1e-6);
}

TEST_CASE("multilayer oracle matches the reported example") {
    const auto sol = oracle_multilayer(0.5, 1.0, {0.1, 0.2}, {1.0, 2.0});
    CHECK(sol.m == doctest::Approx(1.2288).epsilon(1e-4));
    CHECK(sol.deductible == doctest::Approx(2.0 * std::log(sol.m)).epsilon(1e-12));

    // slope pattern 1,0,1,0,1 across branch interiors beyond the deductible
    REQUIRE(sol.breakpoints.size() == 5);
    std::vector<double> bounds = sol.breakpoints;
    bounds.push_back(bounds.back() + 2.0);
    const double expected[] = {1.0, 0.0, 1.0, 0.0, 1.0};
    for (int seg = 0; seg < 5; ++seg) {
        const double a = bounds[seg];
        const double b = bounds[seg + 1];
        const double x1 = a + 0.25 * (b - a);
        const double x2 = a + 0.75 * (b - a);
        const double slope = (sol.indemnity(x2) - sol.indemnity(x1)) / (x2 - x1);
        CHECK(slope == doctest::Approx(expected[seg]).epsilon(1e-9));
    }

    // plateaus sit exactly at the thresholds
    CHECK(sol.indemnity(0.5 * (sol.breakpoints[1] + sol.breakpoints[2])) == 1.0);
    CHECK(sol.indemnity(0.5 * (sol.breakpoints[3] + sol.breakpoints[4])) == 2.0);
}

TEST_CASE("multilayer oracle collapses to a deductible as thresholds vanish") {
    const double gamma = 0.5;
    const auto sol = oracle_multilayer(gamma, 1.0, {0.1, 0.2}, {1e-6, 2e-6});
    const double shift =
        sol.deductible + std::log(1.0 + 0.1 + 0.2) / gamma;
    for (int i = 0; i <= 100; ++i) {
        const double x = 0.08 * i;
        const double expected = std::max(0.0, x - shift);
        CHECK(sol.indemnity(x) == doctest::Approx(expected).epsilon(1e-4));
    }
}

TEST_CASE("oracle and solver agree on all three example contracts") {
    struct Case {
        PremiumFunction g;
        double gamma;
        ClosedFormSolution oracle;
        double m_tol;
    };
    const Case cases[] = {
        {PremiumFunction::expected_value(1.0 / 3.0), 2.0,
         oracle_deductible(2.0, 1.0, 1.0 / 3.0), 1e-5},
        {PremiumFunction::quadratic(0.5), 2.0, oracle_quadratic(2.0, 1.0, 0.5), 1e-4},
        {PremiumFunction::stop_loss({0.1, 0.2}, {1.0, 2.0}), 0.5,
         oracle_multilayer(0.5, 1.0, {0.1, 0.2}, {1.0, 2.0}), 1e-4},
    };
    for (const auto& c : cases) {
        const auto res = fixed_point_solve(kExp1, c.g, config_for(c.gamma));
        CHECK(std::abs(res.schedule.m_star() - c.oracle.m) <= c.m_tol);
        double worst = 0.0;
        for (int i = 0; i < 500; ++i) {
            const double x = 9.0 * i / 499.0;
            worst = std::max(worst,
                             std::abs(res.schedule(x) - c.oracle.indemnity(x)));
        }
        CHECK(worst <= 1e-5);
    }
}

TEST_CASE("brute force: single certain loss retains everything") {
    const Atom atoms[] = {{1.0, 1.0}};
    const auto g = PremiumFunction::expected_value(0.5);
    const auto res = brute_force_discrete(atoms, g, 1.0, 0.01);
    CHECK(res.payouts[0] == doctest::Approx(0.0));

    // golden-section on the 1-D objective confirms the corner
    auto j = [&](double y) {
        const double payout[] = {y};
        return discrete_objective(atoms, payout, g, 1.0);
    };
    CHECK(golden_min(j, 0.0, 1.0) <= 1e-6);
    CHECK(res.objective <= j(0.01) + 1e-12);
}

TEST_CASE("brute force: vanishing loading approaches a pure deductible") {
    const Atom atoms[] = {{0.6, 0.5}, {1.4, 0.5}};
    const auto g = PremiumFunction::expected_value(1e-3);
    const double h = 0.005;
    const auto res = brute_force_discrete(atoms, g, 1.0, h);
    const double r0 = atoms[0].x - res.payouts[0];
    const double r1 = atoms[1].x - res.payouts[1];
    CHECK(std::abs(r0 - r1) <= 2.0 * h + 1e-12);
}

TEST_CASE("brute force: discrete argmin is a grid local minimum") {
    const Atom atoms[] = {{0.5, 0.3}, {1.0, 0.4}, {2.0, 0.3}};
    const auto g = PremiumFunction::quadratic(0.4);
    const double h = 0.05;
    const auto res = brute_force_discrete(atoms, g, 0.8, h, /*comonotone_only=*/false);

    for (std::size_t i = 0; i < 3; ++i) {
        for (double sign : {-1.0, 1.0}) {
            auto bumped = res.payouts;
            bumped[i] += sign * h;
            if (bumped[i] < 0.0 || bumped[i] > atoms[i].x) continue;
            CHECK(discrete_objective(atoms, bumped, g, 0.8) >=
                  res.objective - 1e-12);
        }
    }

    // the unrestricted winner already satisfies the comonotone inequalities
    for (std::size_t i = 1; i < 3; ++i) {
        const double dy = res.payouts[i] - res.payouts[i - 1];
        const double dx = atoms[i].x - atoms[i - 1].x;
        CHECK(dy >= -h - 1e-12);
        CHECK(dy <= dx + h + 1e-12);
    }

    // and the comonotone-restricted search finds the same objective
    const auto cone = brute_force_discrete(atoms, g, 0.8, h);
    CHECK(cone.objective == doctest::Approx(res.objective).epsilon(1e-12));
}

TEST_CASE("brute force guards") {
    const Atom atoms[] = {{1.0, 0.5}, {2.0, 0.5}};
    const auto g = PremiumFunction::expected_value(0.2);
    CHECK_THROWS_AS(brute_force_discrete(atoms, g, 1.0, 1e-5, true, 1000),
                    BudgetExceeded);
    const Atom unsorted[] = {{2.0, 0.5}, {1.0, 0.5}};
    CHECK_THROWS_AS(brute_force_discrete(unsorted, g, 1.0, 0.1),
                    std::invalid_argument);
}

TEST_CASE("perturbation gap is exactly zero at zero scale") {
    const auto g = PremiumFunction::expected_value(1.0 / 3.0);
    const auto cfg = config_for(0.5);
    const auto res = fixed_point_solve(kExp1, g, cfg);
    const auto baseline = objective(res.schedule, kExp1, cfg);
    const double gap = perturbation_gap([&](double x) { return res.schedule(x); }, {},
                                        baseline, 2.0, 0.5, 1, 0.0, kExp1, g, cfg);
    CHECK(gap == 0.0);
}

TEST_CASE("perturbations never improve the solved contracts") {
    struct Case {
        PremiumFunction g;
        double gamma;
    };
    const Case cases[] = {
        {PremiumFunction::expected_value(1.0 / 3.0), 2.0},
        {PremiumFunction::quadratic(0.5), 2.0},
        {PremiumFunction::stop_loss({0.1, 0.2}, {1.0, 2.0}), 0.5},
    };
    for (const auto& c : cases) {
        const auto res = fixed_point_solve(kExp1, c.g, config_for(c.gamma));
        const auto rep =
            perturbation_test(res.schedule, kExp1, config_for(c.gamma), 200, 20240115);
        CHECK(rep.trials == 200);
        CHECK(rep.min_gap >= -1e-8);
        CHECK(rep.max_gap > 0.0);
    }
}

TEST_CASE("a shifted deductible is caught by the perturbation test") {
    const auto g = PremiumFunction::expected_value(1.0 / 3.0);
    const auto cfg = config_for(2.0);
    const double d_bad = std::log(2.0) + 0.1;
    auto corrupted = [d_bad](double x) { return std::max(0.0, x - d_bad); };
    const double kinks[] = {d_bad};
    const auto rep = perturbation_test_fn(corrupted, kinks, d_bad, kExp1, g, cfg, 200,
                                          20240115);
    CHECK(rep.min_gap < -1e-7);
}
