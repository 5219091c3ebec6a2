// SPDX-License-Identifier: Apache-2.0
#include "insopt/oracles.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>
#include <string>

namespace insopt {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

/// Plain adaptive Simpson; deliberately independent of the Gauss-Legendre
/// machinery the solver uses.
double simpson_rec(const std::function<double(double)>& f, double a, double b,
                   double fa, double fm, double fb, double whole, double tol,
                   int depth) {
    const double m = 0.5 * (a + b);
    const double lm = 0.5 * (a + m);
    const double rm = 0.5 * (m + b);
    const double flm = f(lm);
    const double frm = f(rm);
    const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    const double delta = left + right - whole;
    if (depth <= 0 || std::abs(delta) <= 15.0 * tol) {
        return left + right + delta / 15.0;
    }
    return simpson_rec(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
           simpson_rec(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

double adaptive_simpson(const std::function<double(double)>& f, double a, double b,
                        double tol) {
    if (!(b > a)) return 0.0;
    const double fa = f(a);
    const double fb = f(b);
    const double fm = f(0.5 * (a + b));
    const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    return simpson_rec(f, a, b, fa, fm, fb, whole, tol, 48);
}

/// Bisection for a strictly monotone function with f(lo), f(hi) of opposite
/// signs.
double bisect(const std::function<double(double)>& f, double lo, double hi,
              double tol) {
    double flo = f(lo);
    double fhi = f(hi);
    if (flo == 0.0) return lo;
    if (fhi == 0.0) return hi;
    if ((flo > 0.0) == (fhi > 0.0)) {
        throw NoRoot("bisection bracket does not change sign");
    }
    for (int i = 0; i < 400 && (hi - lo) > tol; ++i) {
        const double mid = 0.5 * (lo + hi);
        const double fmid = f(mid);
        if (fmid == 0.0) return mid;
        if ((fmid > 0.0) == (flo > 0.0)) {
            lo = mid;
            flo = fmid;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

/// integral_a^b e^{gamma x} lambda e^{-lambda x} dx in closed form.
double weighted_segment(double a, double b, double gamma, double lambda) {
    if (!(b > a)) return 0.0;
    const double c = gamma - lambda;
    if (std::abs(c) < 1e-14) return lambda * (b - a);
    if (std::isinf(b)) {
        if (c >= 0.0) return kInf;
        return -lambda / c * std::exp(c * a);
    }
    return lambda / c * (std::exp(c * b) - std::exp(c * a));
}

/// E[e^{gamma min(X, d)}] for X ~ Exp(lambda): the post-indemnity moment of a
/// deductible contract.
double deductible_moment(double d, double gamma, double lambda) {
    return weighted_segment(0.0, d, gamma, lambda) +
           std::exp(gamma * d) * std::exp(-lambda * d);
}

}  // namespace

double lambert_w(double z) {
    if (!(z >= 0.0)) throw std::invalid_argument("lambert_w requires z >= 0");
    if (z == 0.0) return 0.0;

    if (z > 1e16) {
        // Newton on ln w + w - ln z = 0; w e^w would overflow long before z
        // reaches the double limit
        const double lz = std::log(z);
        double w = lz - std::log(lz);
        for (int i = 0; i < 60; ++i) {
            const double step = (std::log(w) + w - lz) * w / (w + 1.0);
            w -= step;
            if (std::abs(step) <= 1e-15 * w) break;
        }
        return w;
    }

    double w;
    if (z < 3.0) {
        w = std::log1p(z);  // crude but inside Halley's basin on [0, 3]
    } else {
        const double l1 = std::log(z);
        const double l2 = std::log(l1);
        w = l1 - l2 + l2 / l1;
    }

    for (int i = 0; i < 60; ++i) {
        const double ew = std::exp(w);
        const double f = w * ew - z;
        const double fp = ew * (1.0 + w);
        const double step = f / (fp - f * (2.0 + w) / (2.0 * (1.0 + w)));
        w -= step;
        if (std::abs(step) <= 1e-15 * std::max(1.0, std::abs(w))) break;
    }
    return w;
}

ClosedFormSolution oracle_deductible(double gamma, double lambda, double theta) {
    if (!(gamma > 0.0) || !(lambda > 0.0) || !(theta > 0.0)) {
        throw std::invalid_argument("oracle_deductible needs positive parameters");
    }
    // e^{gamma d} / (1 + theta) = E[e^{gamma min(X, d)}]
    auto psi = [&](double d) {
        return std::exp(gamma * d) / (1.0 + theta) - deductible_moment(d, gamma, lambda);
    };
    double hi = 1.0;
    while (psi(hi) < 0.0) {
        hi *= 2.0;
        if (hi > 400.0) throw NoRoot("deductible equation has no root below 400");
    }
    const double d = bisect(psi, 0.0, hi, 1e-13);
    if (!(d > 0.0)) throw NoRoot("deductible equation root is not positive");

    ClosedFormSolution sol;
    sol.family = ClosedFormSolution::Family::Deductible;
    sol.gamma = gamma;
    sol.lambda = lambda;
    sol.deductible = d;
    sol.m = std::exp(gamma * d) / (1.0 + theta);
    sol.breakpoints = {d};
    sol.indemnity = [d](double x) { return std::max(0.0, x - d); };
    return sol;
}

ClosedFormSolution oracle_quadratic(double gamma, double lambda, double alpha) {
    if (!(gamma > 0.0) || !(lambda > 0.0) || !(alpha > 0.0)) {
        throw std::invalid_argument("oracle_quadratic needs positive parameters");
    }

    auto indemnity_for = [gamma, alpha](double d) {
        return [gamma, alpha, d](double x) {
            if (x <= d) return 0.0;
            const double arg =
                gamma / (2.0 * alpha) *
                std::exp(gamma * (x - d + 1.0 / (2.0 * alpha)));
            return lambert_w(arg) / gamma - 1.0 / (2.0 * alpha);
        };
    };

    // post-indemnity moment minus e^{gamma d}; the root in d pins the contract
    auto psi = [&](double d) {
        const auto ind = indemnity_for(d);
        // e^{gamma (x - I(x))} = e^{gamma d} (1 + 2 alpha I(x)) <= e^{gamma d}
        // (1 + 2 alpha x): truncate on that envelope
        double t = std::max(d, 1.0) + 1.0;
        auto tail = [&](double u) {
            return std::exp(gamma * d) * std::exp(-lambda * u) *
                   (1.0 + 2.0 * alpha * u + 2.0 * alpha / lambda);
        };
        while (tail(t) > 1e-13) t *= 2.0;
        auto integrand = [&](double x) {
            return lambda * std::exp((gamma - lambda) * x - gamma * ind(x));
        };
        const double above = adaptive_simpson(integrand, d, t, 1e-13);
        return weighted_segment(0.0, d, gamma, lambda) + above - std::exp(gamma * d);
    };

    double hi = 1.0;
    while (psi(hi) > 0.0) {
        hi *= 2.0;
        if (hi > 200.0) throw NoRoot("quadratic deductible equation has no root below 200");
    }
    const double d = bisect(psi, 1e-6, hi, 1e-11);

    ClosedFormSolution sol;
    sol.family = ClosedFormSolution::Family::QuadraticLambertW;
    sol.gamma = gamma;
    sol.lambda = lambda;
    sol.deductible = d;
    sol.m = std::exp(gamma * d);  // g'(0+) = 1
    sol.breakpoints = {d};
    sol.indemnity = indemnity_for(d);
    return sol;
}

ClosedFormSolution oracle_multilayer(double gamma, double lambda,
                                     std::vector<double> loadings,
                                     std::vector<double> thresholds) {
    if (!(gamma > 0.0) || !(lambda > 0.0)) {
        throw std::invalid_argument("oracle_multilayer needs positive parameters");
    }
    if (loadings.empty() || loadings.size() != thresholds.size()) {
        throw std::invalid_argument("loadings/thresholds must match and be nonempty");
    }
    const std::size_t k = loadings.size();
    double prev = 0.0;
    for (std::size_t i = 0; i < k; ++i) {
        if (!(loadings[i] > 0.0) || !(thresholds[i] > prev)) {
            throw std::invalid_argument("loadings positive, thresholds increasing required");
        }
        prev = thresholds[i];
    }

    // c[i] = ln(1 + theta_1 + ... + theta_i) / gamma, c[0] = 0
    std::vector<double> c(k + 1, 0.0);
    double load_sum = 1.0;
    for (std::size_t i = 0; i < k; ++i) {
        load_sum += loadings[i];
        c[i + 1] = std::log(load_sum) / gamma;
    }

    // closed-form E[e^{gamma (X - I_m(X))}] for the layered contract at m
    auto moment = [&](double m) {
        const double d = std::log(m) / gamma;
        double acc = weighted_segment(0.0, d, gamma, lambda);
        double cover_start = d;
        for (std::size_t i = 0; i < k; ++i) {
            const double ps = thresholds[i] + d + c[i];      // plateau start
            const double pe = thresholds[i] + d + c[i + 1];  // plateau end
            // coverage band before the plateau: retention d + c[i]
            acc += std::exp(gamma * (d + c[i])) *
                   (std::exp(-lambda * cover_start) - std::exp(-lambda * ps));
            // flat layer at thresholds[i]: retention x - thresholds[i]
            acc += std::exp(-gamma * thresholds[i]) *
                   weighted_segment(ps, pe, gamma, lambda);
            cover_start = pe;
        }
        acc += std::exp(gamma * (d + c[k])) * std::exp(-lambda * cover_start);
        return acc;
    };

    auto phi = [&](double m) { return moment(m) - m; };
    double hi = 2.0;
    while (phi(hi) > 0.0) {
        hi *= 2.0;
        if (hi > 1e12) throw NoRoot("layered moment equation has no root below 1e12");
    }
    const double m = bisect(phi, 1.0, hi, 1e-13);
    const double d = std::log(m) / gamma;

    ClosedFormSolution sol;
    sol.family = ClosedFormSolution::Family::MultiLayer;
    sol.gamma = gamma;
    sol.lambda = lambda;
    sol.m = m;
    sol.deductible = d;
    sol.breakpoints.push_back(d);
    for (std::size_t i = 0; i < k; ++i) {
        sol.breakpoints.push_back(thresholds[i] + d + c[i]);
        sol.breakpoints.push_back(thresholds[i] + d + c[i + 1]);
    }
    sol.indemnity = [d, c, thresholds, k](double x) {
        if (x <= d) return 0.0;
        for (std::size_t i = 0; i < k; ++i) {
            const double ps = thresholds[i] + d + c[i];
            const double pe = thresholds[i] + d + c[i + 1];
            if (x <= ps) return x - d - c[i];
            if (x <= pe) return thresholds[i];
        }
        return x - d - c[k];
    };
    return sol;
}

double discrete_objective(std::span<const Atom> atoms, std::span<const double> payouts,
                          const PremiumFunction& g, double gamma) {
    if (atoms.size() != payouts.size()) {
        throw std::invalid_argument("payout vector must match atoms");
    }
    double premium_part = 0.0;
    double moment_part = 0.0;
    for (std::size_t i = 0; i < atoms.size(); ++i) {
        premium_part += atoms[i].p * g.value(payouts[i]);
        moment_part += atoms[i].p * std::exp(gamma * (atoms[i].x - payouts[i]));
    }
    return std::exp(gamma * premium_part) * moment_part;
}

BruteForceResult brute_force_discrete(std::span<const Atom> atoms,
                                      const PremiumFunction& g, double gamma,
                                      double grid_step, bool comonotone_only,
                                      long long budget) {
    if (atoms.empty() || atoms.size() > 6) {
        throw std::invalid_argument("brute force supports 1..6 atoms");
    }
    if (!(grid_step > 0.0)) throw std::invalid_argument("grid_step must be positive");
    for (std::size_t i = 1; i < atoms.size(); ++i) {
        if (!(atoms[i].x > atoms[i - 1].x)) {
            throw std::invalid_argument("atoms must be sorted by loss level");
        }
    }

    const std::size_t n = atoms.size();
    BruteForceResult best;
    best.objective = kInf;
    std::vector<double> current(n, 0.0);
    long long visited = 0;

    // DFS over grid payouts, optionally restricted to the comonotone cone
    auto recurse = [&](auto&& self, std::size_t i) -> void {
        if (i == n) {
            ++visited;
            if (visited > budget) {
                throw BudgetExceeded("brute-force candidate count exceeded budget");
            }
            const double obj = discrete_objective(atoms, current, g, gamma);
            if (obj < best.objective) {
                best.objective = obj;
                best.payouts = current;
            }
            return;
        }
        double lo = 0.0;
        double hi = atoms[i].x;
        if (comonotone_only && i > 0) {
            lo = current[i - 1];
            hi = std::min(hi, current[i - 1] + (atoms[i].x - atoms[i - 1].x));
        }
        const long long k_lo = static_cast<long long>(std::ceil(lo / grid_step - 1e-12));
        const long long k_hi = static_cast<long long>(std::floor(hi / grid_step + 1e-12));
        for (long long j = k_lo; j <= k_hi; ++j) {
            current[i] = std::min(hi, j * grid_step);
            self(self, i + 1);
        }
    };
    recurse(recurse, 0);

    best.visited = visited;
    return best;
}

double perturbation_gap(const std::function<double(double)>& indemnity,
                        std::span<const double> indemnity_kinks,
                        const ObjectiveReport& baseline, double center,
                        double half_width, int sign, double scale,
                        const LossDistribution& dist, const PremiumFunction& g,
                        const SolverConfig& cfg) {
    const double gamma = cfg.gamma;
    const double lo = std::max(0.0, center - half_width);
    const double hi = center + half_width;
    auto eta = [&](double x) {
        return (x - (center - half_width)) * ((center + half_width) - x);
    };
    auto bumped = [&](double x) { return indemnity(x) + sign * scale * eta(x); };

    std::vector<double> kinks(indemnity_kinks.begin(), indemnity_kinks.end());

    auto d_premium = [&](double x) {
        return g.value(std::max(0.0, bumped(x))) - g.value(std::max(0.0, indemnity(x)));
    };
    auto d_moment = [&](double x) {
        const double base = indemnity(x);
        return std::exp(gamma * (x - bumped(x))) - std::exp(gamma * (x - base));
    };
    const double dpi = integrate_dF(dist, d_premium, lo, hi, cfg.quadrature, kinks);
    const double dmoment = integrate_dF(dist, d_moment, lo, hi, cfg.quadrature, kinks);

    const double j_perturbed =
        std::exp(gamma * (baseline.premium_value + dpi)) *
        (baseline.post_indemnity_moment + dmoment);
    return j_perturbed - baseline.objective_value;
}

namespace {

PerturbationReport run_perturbations(const std::function<double(double)>& indemnity,
                                     std::span<const double> indemnity_kinks,
                                     const ObjectiveReport& baseline,
                                     const LossDistribution& dist,
                                     const PremiumFunction& g, const SolverConfig& cfg,
                                     int trials, std::uint64_t seed) {
    if (trials <= 0) throw std::invalid_argument("trials must be positive");

    PerturbationReport report;
    report.trials = trials;
    report.seed = seed;
    report.baseline_premium = baseline.premium_value;
    report.baseline_moment = baseline.post_indemnity_moment;
    report.baseline_objective = baseline.objective_value;
    report.min_gap = kInf;
    report.max_gap = -kInf;

    const double x_cap =
        dist.bounded_support() ? dist.support_upper() : dist.upper_quantile(1.0 - 1e-5);

    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u01(0.0, 1.0);

    int done = 0;
    int attempts = 0;
    const int max_attempts = 50 * trials;
    while (done < trials && attempts < max_attempts) {
        ++attempts;
        const double center = 0.02 * x_cap + 0.96 * x_cap * u01(rng);
        const double half_width = 0.05 + 0.45 * u01(rng);
        const int sign = u01(rng) < 0.5 ? 1 : -1;
        const double u_scale = 0.1 + 0.9 * u01(rng);

        const double lo = std::max(0.0, center - half_width);
        const double hi = center + half_width;
        auto eta = [&](double x) {
            return (x - (center - half_width)) * ((center + half_width) - x);
        };

        // largest admissible scale on a fine local grid
        double eps_max = kInf;
        const int grid_n = 256;
        for (int i = 0; i <= grid_n; ++i) {
            const double x = lo + (hi - lo) * i / grid_n;
            const double e = eta(x);
            if (e <= 1e-300) continue;
            const double y = indemnity(x);
            const double room = sign > 0 ? (x - y) : y;
            eps_max = std::min(eps_max, room / e);
        }
        if (!(eps_max > 1e-12)) {
            ++report.skipped;
            continue;
        }

        const double scale = 0.9 * eps_max * u_scale;
        const double gap = perturbation_gap(indemnity, indemnity_kinks, baseline,
                                            center, half_width, sign, scale, dist, g,
                                            cfg);
        if (gap < report.min_gap) {
            report.min_gap = gap;
            report.worst = {center, half_width, scale, sign, gap};
        }
        report.max_gap = std::max(report.max_gap, gap);
        ++done;
    }
    if (done < trials) {
        throw Error("perturbation test could not draw enough admissible bumps");
    }
    return report;
}

}  // namespace

PerturbationReport perturbation_test(const IndemnitySchedule& schedule,
                                     const LossDistribution& dist,
                                     const SolverConfig& cfg, int trials,
                                     std::uint64_t seed) {
    const ObjectiveReport baseline = objective(schedule, dist, cfg);
    const auto kinks = schedule.breakpoints(kInf);
    return run_perturbations([&](double x) { return schedule(x); }, kinks, baseline,
                             dist, schedule.premium_function(), cfg, trials, seed);
}

PerturbationReport perturbation_test_fn(const std::function<double(double)>& indemnity,
                                        std::span<const double> indemnity_kinks,
                                        double retention_cap,
                                        const LossDistribution& dist,
                                        const PremiumFunction& g,
                                        const SolverConfig& cfg, int trials,
                                        std::uint64_t seed) {
    const ObjectiveReport baseline =
        objective(indemnity, indemnity_kinks, dist, g, cfg, retention_cap);
    return run_perturbations(indemnity, indemnity_kinks, baseline, dist, g, cfg,
                             trials, seed);
}

}  // namespace insopt
