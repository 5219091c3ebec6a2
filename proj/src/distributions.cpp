// SPDX-License-Identifier: Apache-2.0
#include "insopt/distributions.hpp"

#include <algorithm>
#include <cmath>
#include <queue>
#include <stdexcept>
#include <string>
#include <utility>

namespace insopt {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

/// Gauss-Legendre nodes/weights on [-1, 1], computed once per order by
/// Newton iteration on the Legendre polynomial.
struct GaussRule {
    std::vector<double> nodes;
    std::vector<double> weights;
};

GaussRule make_gauss_rule(int n) {
    GaussRule rule;
    rule.nodes.resize(n);
    rule.weights.resize(n);
    const double pi = 3.14159265358979323846;
    for (int i = 0; i < (n + 1) / 2; ++i) {
        double t = std::cos(pi * (i + 0.75) / (n + 0.5));
        double dp = 0.0;
        for (int iter = 0; iter < 100; ++iter) {
            double p0 = 1.0, p1 = t;
            for (int k = 2; k <= n; ++k) {
                const double p2 = ((2.0 * k - 1.0) * t * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            dp = n * (t * p1 - p0) / (t * t - 1.0);
            const double dt = p1 / dp;
            t -= dt;
            if (std::abs(dt) < 1e-15) break;
        }
        rule.nodes[i] = -t;
        rule.nodes[n - 1 - i] = t;
        const double w = 2.0 / ((1.0 - t * t) * dp * dp);
        rule.weights[i] = w;
        rule.weights[n - 1 - i] = w;
    }
    return rule;
}

const GaussRule& rule16() {
    static const GaussRule r = make_gauss_rule(16);
    return r;
}

const GaussRule& rule8() {
    static const GaussRule r = make_gauss_rule(8);
    return r;
}

double apply_rule(const GaussRule& rule, const std::function<double(double)>& f,
                  double a, double b) {
    const double mid = 0.5 * (a + b);
    const double half = 0.5 * (b - a);
    double acc = 0.0;
    for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
        acc += rule.weights[i] * f(mid + half * rule.nodes[i]);
    }
    return acc * half;
}

struct Panel {
    double a = 0.0;
    double b = 0.0;
    double value = 0.0;  // GL16 estimate
    double error = 0.0;  // |GL16 - GL8|
    int depth = 0;
};

Panel make_panel(const std::function<double(double)>& f, double a, double b, int depth) {
    Panel p;
    p.a = a;
    p.b = b;
    p.depth = depth;
    p.value = apply_rule(rule16(), f, a, b);
    p.error = std::abs(p.value - apply_rule(rule8(), f, a, b));
    return p;
}

/// Composite adaptive Gauss-Legendre over [a, b] with mandatory segment
/// boundaries. Refines the worst panel until the summed error estimate is
/// below tol or the depth budget runs out.
Integral integrate_density(const std::function<double(double)>& f,
                           const std::vector<double>& boundaries,
                           const QuadratureSpec& spec, double tol) {
    auto worse = [](const Panel& x, const Panel& y) { return x.error < y.error; };
    std::priority_queue<Panel, std::vector<Panel>, decltype(worse)> queue(worse);
    std::vector<Panel> done;

    for (std::size_t s = 0; s + 1 < boundaries.size(); ++s) {
        const double a = boundaries[s];
        const double b = boundaries[s + 1];
        if (!(b > a)) continue;
        const double w = (b - a) / spec.panel_count;
        for (int i = 0; i < spec.panel_count; ++i) {
            queue.push(make_panel(f, a + i * w, a + (i + 1) * w, 0));
        }
    }

    double total_error = 0.0;
    double total_abs = 0.0;
    {
        // totals over a copy of the heap
        auto tmp = queue;
        while (!tmp.empty()) {
            total_error += tmp.top().error;
            total_abs += std::abs(tmp.top().value);
            tmp.pop();
        }
    }

    // the absolute target cannot undercut double precision on the integral's
    // own scale, so the effective tolerance carries a relative floor
    auto effective_tol = [&] { return std::max(tol, 1e-14 * total_abs); };

    while (total_error > effective_tol() && !queue.empty()) {
        Panel worst = queue.top();
        queue.pop();
        if (worst.depth >= spec.refinement_limit) {
            throw QuadratureBudgetExceeded(
                "quadrature refinement limit reached (error estimate " +
                std::to_string(total_error) + " > tolerance " +
                std::to_string(effective_tol()) + ")");
        }
        const double mid = 0.5 * (worst.a + worst.b);
        Panel left = make_panel(f, worst.a, mid, worst.depth + 1);
        Panel right = make_panel(f, mid, worst.b, worst.depth + 1);
        total_error += left.error + right.error - worst.error;
        total_abs += std::abs(left.value) + std::abs(right.value) - std::abs(worst.value);
        queue.push(left);
        queue.push(right);
    }

    while (!queue.empty()) {
        done.push_back(queue.top());
        queue.pop();
    }
    std::sort(done.begin(), done.end(),
              [](const Panel& x, const Panel& y) { return x.a < y.a; });

    // compensated summation in position order for deterministic results
    double sum = 0.0, carry = 0.0;
    double err = 0.0;
    for (const Panel& p : done) {
        const double y = p.value - carry;
        const double t = sum + y;
        carry = (t - sum) - y;
        sum = t;
        err += p.error;
    }
    return Integral{sum, err};
}

std::vector<double> build_boundaries(double lower, double upper,
                                     std::span<const double> kinks) {
    std::vector<double> bounds;
    bounds.push_back(lower);
    for (double k : kinks) {
        if (k > lower && k < upper) bounds.push_back(k);
    }
    bounds.push_back(upper);
    std::sort(bounds.begin(), bounds.end());
    bounds.erase(std::unique(bounds.begin(), bounds.end(),
                             [](double a, double b) {
                                 return std::abs(a - b) <=
                                        1e-14 * std::max(1.0, std::abs(a));
                             }),
                 bounds.end());
    return bounds;
}

}  // namespace

void QuadratureSpec::validate() const {
    if (!(truncation_tail_mass > 0.0) || !(truncation_tail_mass < 1.0)) {
        throw std::invalid_argument("truncation_tail_mass must lie in (0, 1)");
    }
    if (panel_count <= 0) throw std::invalid_argument("panel_count must be positive");
    if (refinement_limit <= 0) {
        throw std::invalid_argument("refinement_limit must be positive");
    }
}

LossDistribution LossDistribution::exponential(double rate) {
    if (!(rate > 0.0)) throw std::invalid_argument("exponential rate must be positive");
    LossDistribution d;
    d.family_ = Family::Exponential;
    d.rate_ = rate;
    d.support_upper_ = kInf;
    return d;
}

LossDistribution LossDistribution::empirical(std::vector<Atom> atoms) {
    if (atoms.empty()) throw std::invalid_argument("empirical atoms must be nonempty");
    double mass = 0.0;
    double prev = -kInf;
    for (const Atom& a : atoms) {
        if (!(a.x >= 0.0)) throw std::invalid_argument("atom locations must be >= 0");
        if (!(a.x > prev)) {
            throw std::invalid_argument("atom locations must be strictly increasing");
        }
        if (!(a.p > 0.0)) throw std::invalid_argument("atom masses must be positive");
        prev = a.x;
        mass += a.p;
    }
    if (std::abs(mass - 1.0) > 1e-12) {
        throw std::invalid_argument("atom masses must sum to 1 within 1e-12");
    }
    LossDistribution d;
    d.family_ = Family::PiecewiseEmpirical;
    d.support_upper_ = atoms.back().x;
    d.atoms_ = std::move(atoms);
    return d;
}

LossDistribution LossDistribution::truncated_continuous(
    std::function<double(double)> cdf, std::function<double(double)> density,
    double upper) {
    if (!cdf || !density) throw std::invalid_argument("cdf and density are required");
    if (!(upper > 0.0) || !std::isfinite(upper)) {
        throw std::invalid_argument("upper support bound must be finite and positive");
    }
    if (std::abs(cdf(upper) - 1.0) > 1e-12) {
        throw std::invalid_argument("cdf(upper) must equal 1 within 1e-12");
    }
    if (cdf(0.0) < -1e-12) throw std::invalid_argument("cdf(0) must be >= 0");
    LossDistribution d;
    d.family_ = Family::TruncatedContinuous;
    d.support_upper_ = upper;
    d.cdf_fn_ = std::move(cdf);
    d.density_fn_ = std::move(density);
    return d;
}

double LossDistribution::cdf(double x) const {
    if (x < 0.0) return 0.0;
    switch (family_) {
        case Family::Exponential:
            return -std::expm1(-rate_ * x);
        case Family::PiecewiseEmpirical: {
            double acc = 0.0;
            for (const Atom& a : atoms_) {
                if (a.x <= x) acc += a.p;
                else break;
            }
            return acc;
        }
        case Family::TruncatedContinuous:
            return x >= support_upper_ ? 1.0 : std::min(1.0, std::max(0.0, cdf_fn_(x)));
    }
    return 0.0;
}

double LossDistribution::exp_moment(double gamma) const {
    if (!(gamma > 0.0)) throw std::invalid_argument("gamma must be positive");
    switch (family_) {
        case Family::Exponential:
            if (gamma >= rate_) {
                throw DivergentMoment("E[e^{gamma X}] diverges: gamma >= rate (" +
                                      std::to_string(gamma) + " >= " +
                                      std::to_string(rate_) + ")");
            }
            return rate_ / (rate_ - gamma);
        case Family::PiecewiseEmpirical: {
            double acc = 0.0;
            for (const Atom& a : atoms_) acc += a.p * std::exp(gamma * a.x);
            return acc;
        }
        case Family::TruncatedContinuous: {
            QuadratureSpec spec;
            return integrate_dF(*this, [gamma](double x) { return std::exp(gamma * x); },
                                0.0, support_upper_, spec);
        }
    }
    return 1.0;
}

double LossDistribution::exp_moment_abscissa() const {
    return family_ == Family::Exponential ? rate_ : kInf;
}

double LossDistribution::exp_tail_mass(double gamma, double t) const {
    switch (family_) {
        case Family::Exponential:
            if (gamma >= rate_) return kInf;
            return rate_ / (rate_ - gamma) * std::exp(-(rate_ - gamma) * t);
        case Family::PiecewiseEmpirical: {
            double acc = 0.0;
            for (const Atom& a : atoms_) {
                if (a.x > t) acc += a.p * std::exp(gamma * a.x);
            }
            return acc;
        }
        case Family::TruncatedContinuous: {
            if (t >= support_upper_) return 0.0;
            QuadratureSpec spec;
            return integrate_dF(*this, [gamma](double x) { return std::exp(gamma * x); },
                                t, support_upper_, spec);
        }
    }
    return 0.0;
}

double LossDistribution::upper_quantile(double q) const {
    if (!(q > 0.0) || !(q < 1.0)) throw std::invalid_argument("q must lie in (0, 1)");
    switch (family_) {
        case Family::Exponential:
            return -std::log1p(-q) / rate_;
        case Family::PiecewiseEmpirical: {
            double acc = 0.0;
            for (const Atom& a : atoms_) {
                acc += a.p;
                if (acc >= q) return a.x;
            }
            return atoms_.back().x;
        }
        case Family::TruncatedContinuous: {
            // bisection on the cdf
            double lo = 0.0, hi = support_upper_;
            for (int i = 0; i < 200; ++i) {
                const double mid = 0.5 * (lo + hi);
                (cdf(mid) < q ? lo : hi) = mid;
            }
            return 0.5 * (lo + hi);
        }
    }
    return 0.0;
}

double LossDistribution::density(double x) const {
    switch (family_) {
        case Family::Exponential:
            return x < 0.0 ? 0.0 : rate_ * std::exp(-rate_ * x);
        case Family::TruncatedContinuous:
            return (x < 0.0 || x > support_upper_) ? 0.0 : density_fn_(x);
        case Family::PiecewiseEmpirical:
            throw std::logic_error("discrete distribution has no density");
    }
    return 0.0;
}

Integral integrate_dF_detail(const LossDistribution& dist,
                             const std::function<double(double)>& integrand,
                             double lower, double upper, const QuadratureSpec& spec,
                             std::span<const double> kinks, double weight_growth,
                             bool include_zero_atom) {
    spec.validate();
    if (!(lower >= 0.0)) throw std::invalid_argument("lower must be >= 0");
    if (!(upper >= lower)) throw std::invalid_argument("upper must be >= lower");

    if (dist.is_discrete()) {
        // exact weighted sum over atoms in (lower, upper], plus the atom at 0
        // when the range starts there
        double sum = 0.0;
        for (const Atom& a : dist.atoms()) {
            const bool include =
                (a.x > lower && a.x <= upper) ||
                (include_zero_atom && lower == 0.0 && a.x == 0.0);
            if (include) sum += a.p * integrand(a.x);
        }
        return Integral{sum, 0.0};
    }

    double hi = std::min(upper, dist.support_upper());
    double tail = 0.0;
    if (!std::isfinite(hi)) {
        // truncate where the certified weighted tail drops below budget
        if (weight_growth >= dist.exp_moment_abscissa()) {
            throw DivergentMoment(
                "cannot truncate semi-infinite integral: weight growth rate >= "
                "exponential moment abscissa; supply a finite upper bound");
        }
        const double target = spec.truncation_tail_mass;
        double t = std::max(lower, 1.0);
        while (dist.exp_tail_mass(weight_growth, t) > target) {
            t *= 2.0;
            if (t > 1e8) {
                throw QuadratureBudgetExceeded("tail truncation point exceeds 1e8");
            }
        }
        tail = dist.exp_tail_mass(weight_growth, t);
        hi = t;
    }
    if (!(hi > lower)) return Integral{0.0, tail};

    auto f = [&](double x) { return integrand(x) * dist.density(x); };
    const auto boundaries = build_boundaries(lower, hi, kinks);
    Integral result = integrate_density(f, boundaries, spec, spec.truncation_tail_mass);
    result.error_bound += tail;
    return result;
}

double integrate_dF(const LossDistribution& dist,
                    const std::function<double(double)>& integrand, double lower,
                    double upper, const QuadratureSpec& spec,
                    std::span<const double> kinks, double weight_growth,
                    bool include_zero_atom) {
    return integrate_dF_detail(dist, integrand, lower, upper, spec, kinks,
                               weight_growth, include_zero_atom)
        .value;
}

}  // namespace insopt
