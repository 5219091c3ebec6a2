// SPDX-License-Identifier: Apache-2.0
#include "insopt/solver.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace insopt {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

/// d(m) = ln(m g'(0+)) / gamma, tolerating the boundary product m g'(0+) == 1
/// (deductible 0) that intermediate iterates may produce.
double deductible_raw(double m, double gamma, const PremiumFunction& g) {
    const double product = m * g.deriv_at_zero();
    if (product < 1.0 - 1e-12) {
        throw DegeneratePremium("m * g'(0+) = " + std::to_string(product) +
                                " < 1; premium function is not admissible");
    }
    return std::log(std::max(1.0, product)) / gamma;
}

/// Root of kappa on (0, x): snaps to a kink of g' when the subdifferential
/// brackets e^{gamma (x - y)}, otherwise bisects the smooth segment where the
/// sign changes. Assumes x > d(m). May return x itself on the boundary
/// iterates where m g'(x-) == 1.
double solve_indemnity(double x, double m, double gamma, const PremiumFunction& g,
                       double root_tol) {
    const double expg = std::exp(gamma * x);

    // kink snap: flat layers arise exactly where m [g'(y-), g'(y+)] brackets
    // the exponential term
    for (double yk : g.kinks()) {
        if (!(yk > 0.0 && yk < x)) continue;
        const double w = std::exp(gamma * (x - yk));
        if (w >= m * g.deriv_left(yk) && w <= m * g.deriv_right(yk)) return yk;
    }

    std::vector<double> bounds;
    bounds.push_back(0.0);
    for (double yk : g.kinks()) {
        if (yk > 0.0 && yk < x) bounds.push_back(yk);
    }
    bounds.push_back(x);
    std::sort(bounds.begin(), bounds.end());

    auto kappa_right = [&](double y) {
        return std::exp(gamma * (x - y)) - m * g.deriv_right(y);
    };

    for (std::size_t s = 0; s + 1 < bounds.size(); ++s) {
        double lo = bounds[s];
        double hi = bounds[s + 1];
        const double k_lo = (s == 0) ? expg - m * g.deriv_at_zero() : kappa_right(lo);
        const double k_hi = std::exp(gamma * (x - hi)) - m * g.deriv_left(hi);
        if (k_lo < 0.0) break;            // kappa already negative: no root here or later
        if (k_hi > 0.0) continue;         // still positive at segment end: move on
        if (k_hi == 0.0) return hi;       // boundary root (m g'(x-) == 1 iterates)

        for (int iter = 0; iter < 200 && (hi - lo) > root_tol; ++iter) {
            const double mid = 0.5 * (lo + hi);
            (kappa_right(mid) > 0.0 ? lo : hi) = mid;
        }
        // secant step inside the final bracket: removes the bisection
        // quantization so the root varies smoothly with x (quadrature on
        // integrands of the schedule needs that smoothness)
        const double f_lo = kappa_right(lo);
        const double f_hi = kappa_right(hi);
        if (f_lo > 0.0 && f_hi < 0.0) {
            const double y = lo + (hi - lo) * f_lo / (f_lo - f_hi);
            if (y > lo && y < hi) return y;
        }
        return 0.5 * (lo + hi);
    }
    throw BracketFailure("kappa has no sign change on (0, " + std::to_string(x) +
                         ") for m = " + std::to_string(m));
}

/// Flat-layer boundaries of I_m in loss space: a kink y_k of g' maps to the
/// interval [y_k + ln(m g'(y_k-))/gamma, y_k + ln(m g'(y_k+))/gamma].
std::vector<double> plateau_breakpoints(double m, double gamma,
                                        const PremiumFunction& g) {
    std::vector<double> pts;
    for (double yk : g.kinks()) {
        const double lo = m * g.deriv_left(yk);
        const double hi = m * g.deriv_right(yk);
        if (lo >= 1.0) pts.push_back(yk + std::log(lo) / gamma);
        if (hi >= 1.0) pts.push_back(yk + std::log(hi) / gamma);
    }
    std::sort(pts.begin(), pts.end());
    return pts;
}

/// Certified truncation point for integrals of e^{gamma (x - I_m(x))} dF over
/// (d, infinity). For gamma below the moment abscissa the crude weight
/// e^{gamma x} suffices; otherwise the first-order condition bounds the
/// integrand by m g'(x), whose affine envelope gives a closed-form tail.
double certified_upper(const LossDistribution& dist, const PremiumFunction& g,
                       double gamma, double m, double d, double tail_mass) {
    if (dist.bounded_support()) return dist.support_upper();
    const double rate = dist.rate();
    if (gamma < rate) {
        const double t =
            std::log(rate / ((rate - gamma) * tail_mass)) / (rate - gamma);
        return std::max(t, d + 1.0);
    }
    const auto bound = g.deriv_affine_bound();
    if (!bound) {
        throw DivergentMoment(
            "gamma >= rate and the premium function has no derivative envelope: "
            "E[g'(X)] cannot be certified finite");
    }
    const auto [a, b] = *bound;
    auto tail = [&](double t) {
        return m * std::exp(-rate * t) * (a + b * t + b / rate);
    };
    double t = std::max(d, 1.0) + 1.0;
    while (tail(t) > tail_mass) {
        t *= 2.0;
        if (t > 1e8) throw QuadratureBudgetExceeded("tail truncation point exceeds 1e8");
    }
    return t;
}

}  // namespace

void SolverConfig::validate() const {
    if (!(gamma > 0.0)) throw std::invalid_argument("gamma must be positive");
    if (!(m_tolerance > 0.0)) throw std::invalid_argument("m_tolerance must be positive");
    if (max_iterations <= 0) throw std::invalid_argument("max_iterations must be positive");
    if (!(root_tolerance > 0.0)) {
        throw std::invalid_argument("root_tolerance must be positive");
    }
    if (m0_strategy == M0Strategy::Custom && !(m0_custom >= 1.0)) {
        throw std::invalid_argument("custom M0 must be >= 1");
    }
    quadrature.validate();
}

double deductible_from_m(double m, double gamma, const PremiumFunction& g) {
    if (!(m >= 1.0)) throw std::invalid_argument("m must be >= 1");
    if (!(gamma > 0.0)) throw std::invalid_argument("gamma must be positive");
    const double product = m * g.deriv_at_zero();
    if (product <= 1.0) {
        throw DegeneratePremium(
            "m * g'(0+) <= 1: the deductible would not be positive (m = " +
            std::to_string(m) + ", g'(0+) = " + std::to_string(g.deriv_at_zero()) + ")");
    }
    return std::log(product) / gamma;
}

double kappa(double x, double y, double m, double gamma, const PremiumFunction& g) {
    if (!(y > 0.0) || !(y < x)) throw std::invalid_argument("kappa requires 0 < y < x");
    return std::exp(gamma * (x - y)) - m * g.deriv_right(y);
}

double indemnity_at(double x, double m, const SolverConfig& cfg,
                    const PremiumFunction& g) {
    if (!(x >= 0.0)) throw std::invalid_argument("loss must be >= 0");
    if (!(m >= 1.0)) throw std::invalid_argument("m must be >= 1");
    const double d = deductible_raw(m, cfg.gamma, g);
    if (x <= d) return 0.0;
    return solve_indemnity(x, m, cfg.gamma, g, cfg.root_tolerance);
}

double h_map(double m, const LossDistribution& dist, const PremiumFunction& g,
             const SolverConfig& cfg) {
    if (!(m >= 1.0)) throw std::invalid_argument("m must be >= 1");
    const double gamma = cfg.gamma;
    const QuadratureSpec& spec = cfg.quadrature;
    const double d = deductible_raw(m, gamma, g);

    const double support_hi = dist.support_upper();
    const double part1_hi = std::isfinite(support_hi) ? std::min(d, support_hi) : d;
    const Integral below = integrate_dF_detail(
        dist, [gamma](double x) { return std::exp(gamma * x); }, 0.0, part1_hi, spec);

    const double t = certified_upper(dist, g, gamma, m, d, spec.truncation_tail_mass);
    Integral above{0.0, 0.0};
    if (t > d) {
        const auto kinks = plateau_breakpoints(m, gamma, g);
        auto retained_weight = [&](double x) {
            const double y =
                x > d ? solve_indemnity(x, m, gamma, g, cfg.root_tolerance) : 0.0;
            return std::exp(gamma * (x - y));
        };
        // the boundary mass at d (and at 0 when d == 0) belongs to `below`
        above = integrate_dF_detail(dist, retained_weight, d, t, spec, kinks, 0.0,
                                    /*include_zero_atom=*/false);
    }
    return below.value + above.value;
}

SolveResult fixed_point_solve(const LossDistribution& dist, const PremiumFunction& g,
                              const SolverConfig& cfg) {
    cfg.validate();
    if (g.deriv_at_zero() < 1.0 - 1e-12) {
        throw DegeneratePremium("g'(0+) < 1: premium function is not admissible");
    }

    double m0 = 1.0;
    switch (cfg.m0_strategy) {
        case M0Strategy::LowerEndpoint:
            m0 = 1.0;
            break;
        case M0Strategy::UpperEndpoint:
            try {
                m0 = dist.exp_moment(cfg.gamma);
            } catch (const DivergentMoment& e) {
                throw DivergentMoment(std::string(e.what()) +
                                      "; start from the lower endpoint M0 = 1 instead");
            }
            break;
        case M0Strategy::Custom:
            m0 = cfg.m0_custom;
            break;
    }

    SolverTrace trace;
    trace.m0 = m0;
    double m_prev = m0;
    double m_star = m0;
    for (int n = 1; n <= cfg.max_iterations; ++n) {
        const double d_n = deductible_raw(m_prev, cfg.gamma, g);
        const double m_n = h_map(m_prev, dist, g, cfg);
        trace.iterations.push_back({n, m_n, d_n, std::abs(m_n - m_prev)});
        if (std::abs(m_n - m_prev) <= cfg.m_tolerance) {
            trace.converged = true;
            m_star = m_n;
            break;
        }
        m_prev = m_n;
    }

    if (!trace.iterations.empty()) {
        const double first = trace.iterations.front().m;
        if (first > m0) trace.direction = TraceDirection::Increasing;
        else if (first < m0) trace.direction = TraceDirection::Decreasing;
        else trace.direction = TraceDirection::Stationary;
    }

    if (!trace.converged) {
        trace.fixed_point_residual = trace.iterations.empty()
                                         ? 0.0
                                         : trace.iterations.back().residual;
        throw NoConvergence("fixed-point iteration did not converge in " +
                                std::to_string(cfg.max_iterations) + " iterations",
                            std::move(trace));
    }

    trace.fixed_point_residual = std::abs(h_map(m_star, dist, g, cfg) - m_star);
    return SolveResult{IndemnitySchedule(m_star, cfg.gamma, g, cfg.root_tolerance),
                       std::move(trace)};
}

IndemnitySchedule::IndemnitySchedule(double m_star, double gamma, PremiumFunction g,
                                     double root_tolerance)
    : m_star_(m_star),
      gamma_(gamma),
      root_tolerance_(root_tolerance),
      g_(std::move(g)),
      deductible_(deductible_raw(m_star, gamma, g_)) {
    if (!(m_star >= 1.0)) throw std::invalid_argument("m_star must be >= 1");
    if (!(gamma > 0.0)) throw std::invalid_argument("gamma must be positive");
}

double IndemnitySchedule::operator()(double x) const {
    if (!(x >= 0.0)) throw std::invalid_argument("loss must be >= 0");
    if (x <= deductible_) return 0.0;
    return solve_indemnity(x, m_star_, gamma_, g_, root_tolerance_);
}

std::vector<IndemnitySchedule::Plateau> IndemnitySchedule::plateaus() const {
    std::vector<Plateau> out;
    for (double yk : g_.kinks()) {
        const double lo = m_star_ * g_.deriv_left(yk);
        const double hi = m_star_ * g_.deriv_right(yk);
        if (!(hi > lo) || hi < 1.0) continue;
        Plateau p;
        p.level = yk;
        p.x_enter = yk + std::log(std::max(1.0, lo)) / gamma_;
        p.x_exit = yk + std::log(hi) / gamma_;
        out.push_back(p);
    }
    std::sort(out.begin(), out.end(),
              [](const Plateau& a, const Plateau& b) { return a.level < b.level; });
    return out;
}

std::vector<double> IndemnitySchedule::breakpoints(double x_max) const {
    std::vector<double> pts;
    auto push = [&](double v) {
        if (v > 0.0 && v < x_max) pts.push_back(v);
    };
    push(deductible_);
    for (const Plateau& p : plateaus()) {
        push(p.x_enter);
        push(p.x_exit);
    }
    std::sort(pts.begin(), pts.end());
    pts.erase(std::unique(pts.begin(), pts.end(),
                          [](double a, double b) {
                              return std::abs(a - b) <= 1e-12 * std::max(1.0, a);
                          }),
              pts.end());
    return pts;
}

std::vector<IndemnitySchedule::CurvePoint> IndemnitySchedule::curve(double x_max,
                                                                    int points) const {
    if (points < 2) throw std::invalid_argument("curve needs at least 2 points");
    if (!(x_max > 0.0)) throw std::invalid_argument("x_max must be positive");
    std::vector<double> xs;
    xs.reserve(points + 8);
    const double step = x_max / (points - 1);
    for (int i = 0; i < points; ++i) xs.push_back(i * step);
    for (double b : breakpoints(x_max)) xs.push_back(b);
    std::sort(xs.begin(), xs.end());
    xs.erase(std::unique(xs.begin(), xs.end(),
                         [&](double a, double b) { return std::abs(a - b) <= 1e-12; }),
             xs.end());

    std::vector<CurvePoint> out;
    out.reserve(xs.size());
    for (double x : xs) {
        const double y = (*this)(x);
        out.push_back({x, y, x - y});
    }
    return out;
}

double post_indemnity_moment(const IndemnitySchedule& schedule,
                             const LossDistribution& dist, const SolverConfig& cfg) {
    return h_map(schedule.m_star(), dist, schedule.premium_function(), cfg);
}

ObjectiveReport objective(const IndemnitySchedule& schedule,
                          const LossDistribution& dist, const SolverConfig& cfg) {
    const PremiumFunction& g = schedule.premium_function();
    const auto kinks = schedule.breakpoints(kInf);
    const double pi = premium(
        g, [&](double x) { return schedule(x); }, kinks, dist, cfg.quadrature);
    const double moment = post_indemnity_moment(schedule, dist, cfg);

    ObjectiveReport report;
    report.premium_value = pi;
    report.post_indemnity_moment = moment;
    report.objective_value = std::exp(cfg.gamma * pi) * moment;
    report.certainty_equivalent = std::log(report.objective_value) / cfg.gamma;
    return report;
}

ObjectiveReport objective(const std::function<double(double)>& indemnity,
                          std::span<const double> indemnity_kinks,
                          const LossDistribution& dist, const PremiumFunction& g,
                          const SolverConfig& cfg,
                          std::optional<double> retention_cap) {
    cfg.validate();
    const double gamma = cfg.gamma;
    const QuadratureSpec& spec = cfg.quadrature;

    // integration/checking range with a certified tail
    double upper = dist.support_upper();
    double weight_growth = 0.0;
    if (!std::isfinite(upper)) {
        if (gamma < dist.exp_moment_abscissa()) {
            upper = kInf;  // integrate_dF truncates on e^{gamma x} itself
            weight_growth = gamma;
        } else if (retention_cap) {
            // integrand <= e^{gamma cap}, so cutting at t leaves at most
            // e^{gamma cap} S(t) <= truncation_tail_mass
            const double rate = dist.rate();
            const double t =
                (gamma * *retention_cap - std::log(spec.truncation_tail_mass)) / rate;
            upper = std::max(t, 1.0);
        } else {
            throw DivergentMoment(
                "gamma >= rate: supply a retention cap to certify the objective tail "
                "for a raw indemnity callable");
        }
    }

    const double check_hi =
        std::isfinite(upper) ? upper : dist.upper_quantile(1.0 - 1e-9);
    const int check_points = 512;
    for (int i = 0; i <= check_points; ++i) {
        const double x = check_hi * i / check_points;
        const double y = indemnity(x);
        if (y < -1e-10 || y > x + 1e-10) {
            throw InadmissibleIndemnity("indemnity outside [0, x] at x = " +
                                        std::to_string(x) + " (I = " +
                                        std::to_string(y) + ")");
        }
    }

    const double pi = premium(g, indemnity, indemnity_kinks, dist, spec);
    auto retained_weight = [&](double x) {
        return std::exp(gamma * (x - indemnity(x)));
    };
    const double moment = integrate_dF(dist, retained_weight, 0.0, upper, spec,
                                       indemnity_kinks, weight_growth);

    ObjectiveReport report;
    report.premium_value = pi;
    report.post_indemnity_moment = moment;
    report.objective_value = std::exp(gamma * pi) * moment;
    report.certainty_equivalent = std::log(report.objective_value) / gamma;
    return report;
}

ComonotoneReport check_comonotone(const std::function<double(double)>& indemnity,
                                  std::span<const double> grid, double slack) {
    ComonotoneReport report;
    if (grid.size() < 2) return report;
    double prev_x = grid[0];
    double prev_y = indemnity(prev_x);
    for (std::size_t i = 1; i < grid.size(); ++i) {
        const double x = grid[i];
        const double y = indemnity(x);
        const double dx = x - prev_x;
        const double dy = y - prev_y;
        if (dy < -slack) {
            report.ok = false;
            report.violation_index = static_cast<int>(i - 1);
            report.x_lo = prev_x;
            report.x_hi = x;
            report.reason = "indemnity decreases";
            return report;
        }
        if (dy > dx + slack) {
            report.ok = false;
            report.violation_index = static_cast<int>(i - 1);
            report.x_lo = prev_x;
            report.x_hi = x;
            report.reason = "retained loss decreases (slope above 1)";
            return report;
        }
        prev_x = x;
        prev_y = y;
    }
    return report;
}

ComonotoneReport check_comonotone(const IndemnitySchedule& schedule,
                                  std::span<const double> grid, double slack) {
    ComonotoneReport base = check_comonotone(
        [&](double x) { return schedule(x); }, grid, slack);
    if (!base.ok) return base;

    const auto layers = schedule.plateaus();
    auto inside_layer = [&](double a, double b) {
        for (const auto& p : layers) {
            if (a >= p.x_enter - slack && b <= p.x_exit + slack) return true;
        }
        return false;
    };

    const double d = schedule.deductible();
    for (std::size_t i = 0; i + 1 < grid.size(); ++i) {
        const double a = grid[i];
        const double b = grid[i + 1];
        if (a < d || !(b > a)) continue;
        if (schedule(b) - schedule(a) <= slack && !inside_layer(a, b)) {
            base.ok = false;
            base.violation_index = static_cast<int>(i);
            base.x_lo = a;
            base.x_hi = b;
            base.reason = "not strictly increasing beyond the deductible";
            return base;
        }
    }
    return base;
}

}  // namespace insopt
