#include "bsr/priors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "bsr/errors.hpp"

namespace bsr {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr int kMaxResampleAttempts = 1000;

double poisson_pmf(double alpha, int n) {
    return std::exp(n * std::log(alpha) - alpha - std::lgamma(n + 1.0));
}

void check_interval(const Interval& iv, const char* name) {
    if (!(iv.lo < iv.hi)) throw ConfigError(std::string(name) + " interval is empty");
}

}  // namespace

OrderDistribution::OrderDistribution(double alpha, int n_max, OrderShift kind)
    : alpha_(alpha), n_max_(n_max), kind_(kind) {
    if (!(alpha > 0.0)) throw ConfigError("order distribution needs alpha > 0");
    if (n_max < 3) throw ConfigError("order distribution needs n_max >= 3");
    const int lo = min_order();
    probs_.resize(n_max_ - lo + 1, 0.0);
    if (kind_ == OrderShift::Isotonic) {
        probs_[0] = std::exp(-alpha_) * (1.0 + alpha_);
    } else {
        probs_[0] = std::exp(-alpha_) * (1.0 + alpha_ + alpha_ * alpha_ / 2.0);
    }
    double acc = probs_[0];
    for (int n = lo + 1; n < n_max_; ++n) {
        probs_[n - lo] = poisson_pmf(alpha_, n);
        acc += probs_[n - lo];
    }
    probs_[n_max_ - lo] = std::max(0.0, 1.0 - acc);
}

double OrderDistribution::pmf(int n) const {
    if (n < min_order() || n > n_max_) throw DomainError("order outside the distribution support");
    return probs_[n - min_order()];
}

double OrderDistribution::pmf_or_zero(int n) const {
    if (n < min_order() || n > n_max_) return 0.0;
    return probs_[n - min_order()];
}

int OrderDistribution::sample(Rng& rng) const {
    double u = rng.uniform();
    for (std::size_t i = 0; i + 1 < probs_.size(); ++i) {
        u -= probs_[i];
        if (u < 0.0) return min_order() + static_cast<int>(i);
    }
    return n_max_;
}

PriorSpec PriorSpec::monotone(OrderDistribution dist, Interval q1, Interval q2, double tau) {
    check_interval(q1, "q1");
    check_interval(q2, "q2");
    if (!(q1.lo < q2.hi))
        throw ConfigError("monotone prior cannot achieve a0 < an: q1 lies above q2");
    PriorSpec s{ShapeKind::Monotone, std::move(dist)};
    s.q1 = q1;
    s.q2 = q2;
    s.tau = tau;
    return s;
}

PriorSpec PriorSpec::concave(OrderDistribution dist, Interval q, double beta1, double beta2,
                             double tau) {
    check_interval(q, "q");
    if (!(q.hi > std::max(beta1, beta2)))
        throw ConfigError("concave prior: q range cannot exceed the beta lower bounds");
    PriorSpec s{ShapeKind::UnimodalConcave, std::move(dist)};
    s.q = q;
    s.beta1 = beta1;
    s.beta2 = beta2;
    s.tau = tau;
    return s;
}

PriorSpec PriorSpec::convex(OrderDistribution dist, Interval q, double beta1, double beta2,
                            double tau) {
    check_interval(q, "q");
    if (!(q.lo < std::min(beta1, beta2)))
        throw ConfigError("convex prior: q range cannot fall below the beta upper bounds");
    PriorSpec s{ShapeKind::UnimodalConvex, std::move(dist)};
    s.q = q;
    s.beta1 = beta1;
    s.beta2 = beta2;
    s.tau = tau;
    return s;
}

PriorDraw sample_isotonic_given_order(const PriorSpec& spec, int n, Rng& rng) {
    if (spec.shape != ShapeKind::Monotone) throw ConfigError("isotonic sampler needs a Monotone spec");
    double a0 = 0.0, an = 0.0;
    int attempts = 0;
    do {
        if (++attempts > kMaxResampleAttempts)
            throw ConfigError("could not draw endpoints with a0 < an; q1/q2 ranges incompatible");
        a0 = rng.uniform(spec.q1.lo, spec.q1.hi);
        an = rng.uniform(spec.q2.lo, spec.q2.hi);
    } while (!(a0 < an));

    std::vector<double> coeffs(n + 1);
    coeffs.front() = a0;
    coeffs.back() = an;
    for (int i = 1; i < n; ++i) coeffs[i] = rng.uniform(a0, an);
    std::sort(coeffs.begin() + 1, coeffs.end() - 1);
    return PriorDraw{BernsteinPoly(std::move(coeffs), spec.tau), -1};
}

PriorDraw sample_isotonic(const PriorSpec& spec, Rng& rng) {
    const int n = spec.order_dist.sample(rng);
    return sample_isotonic_given_order(spec, n, rng);
}

namespace {

// Shared body of Algorithms for concave/convex construction. `sign` is +1 for
// concave (a_l is the maximum) and -1 for convex (a_l is the minimum); the
// convex case is the exact mirror image with all coefficients negated.
PriorDraw sample_peaked_given_order(const PriorSpec& spec, int n, Rng& rng, double sign) {
    if (n < 2) throw ConfigError("concave/convex prior needs order n >= 2");
    const double b1 = sign * spec.beta1;
    const double b2 = sign * spec.beta2;
    const double qlo = sign > 0 ? spec.q.lo : -spec.q.hi;
    const double qhi = sign > 0 ? spec.q.hi : -spec.q.lo;

    const int l = static_cast<int>(rng.uniform_int(1, n - 1));
    double al = 0.0;
    int attempts = 0;
    do {
        if (++attempts > kMaxResampleAttempts)
            throw ConfigError("peak value never exceeded the beta bounds; q range inconsistent");
        al = rng.uniform(qlo, qhi);
    } while (!(al > b1 && al > b2));

    const double a0 = rng.uniform(2.0 * b1 - al, al);
    const double an = rng.uniform(2.0 * b2 - al, al);

    std::vector<double> coeffs(n + 1);
    coeffs[0] = a0;
    coeffs[l] = al;
    coeffs[n] = an;

    // Left segment: gaps of uniform order statistics on (a0, al), laid down
    // largest first so the increments decrease toward the peak.
    if (l >= 2) {
        std::vector<double> pts(l - 1);
        for (double& p : pts) p = rng.uniform(a0, al);
        std::sort(pts.begin(), pts.end());
        std::vector<double> gaps(l);
        gaps[0] = pts[0] - a0;
        for (int i = 1; i < l - 1; ++i) gaps[i] = pts[i] - pts[i - 1];
        gaps[l - 1] = al - pts[l - 2];
        std::sort(gaps.begin(), gaps.end());  // ascending: gaps[l-1] is largest
        double acc = a0;
        for (int i = 1; i < l; ++i) {
            acc += gaps[l - i];
            coeffs[i] = acc;
        }
    }

    // Right segment: same construction on (an, al), smallest gap first so the
    // decrements grow away from the peak.
    const int m = n - l;
    if (m >= 2) {
        std::vector<double> pts(m - 1);
        for (double& p : pts) p = rng.uniform(an, al);
        std::sort(pts.begin(), pts.end());
        std::vector<double> gaps(m);
        gaps[0] = pts[0] - an;
        for (int i = 1; i < m - 1; ++i) gaps[i] = pts[i] - pts[i - 1];
        gaps[m - 1] = al - pts[m - 2];
        std::sort(gaps.begin(), gaps.end());
        double acc = al;
        for (int i = 1; i < m; ++i) {
            acc -= gaps[i - 1];
            coeffs[l + i] = acc;
        }
    }

    if (sign < 0)
        for (double& c : coeffs) c = -c;
    return PriorDraw{BernsteinPoly(std::move(coeffs), spec.tau), l};
}

}  // namespace

PriorDraw sample_concave_given_order(const PriorSpec& spec, int n, Rng& rng) {
    if (spec.shape != ShapeKind::UnimodalConcave)
        throw ConfigError("concave sampler needs a UnimodalConcave spec");
    return sample_peaked_given_order(spec, n, rng, +1.0);
}

PriorDraw sample_concave(const PriorSpec& spec, Rng& rng) {
    return sample_concave_given_order(spec, spec.order_dist.sample(rng), rng);
}

PriorDraw sample_convex_given_order(const PriorSpec& spec, int n, Rng& rng) {
    if (spec.shape != ShapeKind::UnimodalConvex)
        throw ConfigError("convex sampler needs a UnimodalConvex spec");
    return sample_peaked_given_order(spec, n, rng, -1.0);
}

PriorDraw sample_convex(const PriorSpec& spec, Rng& rng) {
    return sample_convex_given_order(spec, spec.order_dist.sample(rng), rng);
}

PriorDraw sample_prior(const PriorSpec& spec, Rng& rng) {
    return sample_prior_given_order(spec, spec.order_dist.sample(rng), rng);
}

PriorDraw sample_prior_given_order(const PriorSpec& spec, int n, Rng& rng) {
    switch (spec.shape) {
        case ShapeKind::Monotone: return sample_isotonic_given_order(spec, n, rng);
        case ShapeKind::UnimodalConcave: return sample_concave_given_order(spec, n, rng);
        case ShapeKind::UnimodalConvex: return sample_convex_given_order(spec, n, rng);
        default: throw ConfigError("no prior sampler for this shape class");
    }
}

double isotonic_prior_logdensity(const BernsteinPoly& poly, const PriorSpec& spec) {
    if (spec.shape != ShapeKind::Monotone)
        throw ConfigError("isotonic_prior_logdensity needs a Monotone spec");
    const auto& a = poly.coeffs();
    const int n = poly.order();
    if (n < spec.order_dist.min_order() || n > spec.order_dist.max_order()) return kNegInf;
    if (!shape_check(a, ShapeKind::Monotone)) return kNegInf;
    const double a0 = a.front();
    const double an = a.back();
    if (!spec.q1.contains(a0) || !spec.q2.contains(an) || !(a0 < an)) return kNegInf;
    double logd = -std::log(spec.q1.width()) - std::log(spec.q2.width());
    logd += std::lgamma(static_cast<double>(n)) - (n - 1) * std::log(an - a0);
    logd += std::log(spec.order_dist.pmf(n));
    return logd;
}

}  // namespace bsr
