#pragma once

#include <vector>

#include "bsr/bernstein.hpp"
#include "bsr/rng.hpp"

namespace bsr {

/// Closed real interval used for uniform hyperparameter densities.
struct Interval {
    double lo = 0.0;
    double hi = 0.0;
    double width() const { return hi - lo; }
    bool contains(double x) const { return x >= lo && x <= hi; }
};

/// Which low orders absorb the leftover Poisson mass.
enum class OrderShift { Isotonic, Convex };

/// Truncated shifted-Poisson distribution on polynomial orders.
///
/// Isotonic: support {1, ..., n0} with p(1) = e^-a (1 + a), p(n) = Pois(a)(n)
/// for 2 <= n <= n0-1 and p(n0) taking the remaining mass.
/// Convex: support {2, ..., n0} with p(2) = e^-a (1 + a + a^2/2) and the same
/// tail treatment.
class OrderDistribution {
public:
    OrderDistribution(double alpha, int n_max, OrderShift kind);

    /// Probability of order n; throws DomainError outside the support.
    double pmf(int n) const;

    /// Probability of order n, 0 outside the support (move-schedule helper).
    double pmf_or_zero(int n) const;

    int min_order() const { return kind_ == OrderShift::Isotonic ? 1 : 2; }
    int max_order() const { return n_max_; }
    double alpha() const { return alpha_; }
    OrderShift kind() const { return kind_; }

    int sample(Rng& rng) const;

private:
    double alpha_;
    int n_max_;
    OrderShift kind_;
    std::vector<double> probs_;  // probs_[n - min_order()]
};

/// Hyperparameters of one constructive prior.
///
/// Monotone uses q1/q2 (uniform endpoint densities). UnimodalConcave and
/// UnimodalConvex use q (uniform density of the peak/trough coefficient) with
/// beta1/beta2 bounding F(0) and F(tau) from below (concave) or above (convex).
struct PriorSpec {
    ShapeKind shape;
    OrderDistribution order_dist;
    Interval q1{};
    Interval q2{};
    Interval q{};
    double beta1 = 0.0;
    double beta2 = 0.0;
    double tau = 1.0;

    static PriorSpec monotone(OrderDistribution dist, Interval q1, Interval q2, double tau = 1.0);
    static PriorSpec concave(OrderDistribution dist, Interval q, double beta1, double beta2,
                             double tau = 1.0);
    static PriorSpec convex(OrderDistribution dist, Interval q, double beta1, double beta2,
                            double tau = 1.0);
};

/// A sampled prior realization; peak_index is set for concave/convex draws.
struct PriorDraw {
    BernsteinPoly poly;
    int peak_index = -1;
};

PriorDraw sample_isotonic(const PriorSpec& spec, Rng& rng);
PriorDraw sample_isotonic_given_order(const PriorSpec& spec, int n, Rng& rng);

PriorDraw sample_concave(const PriorSpec& spec, Rng& rng);
PriorDraw sample_concave_given_order(const PriorSpec& spec, int n, Rng& rng);

PriorDraw sample_convex(const PriorSpec& spec, Rng& rng);
PriorDraw sample_convex_given_order(const PriorSpec& spec, int n, Rng& rng);

/// Prior draw for any shape the spec supports.
PriorDraw sample_prior(const PriorSpec& spec, Rng& rng);
PriorDraw sample_prior_given_order(const PriorSpec& spec, int n, Rng& rng);

/// Exact log joint density of the isotonic construction:
///   log q1(a0) + log q2(an) + log (n-1)! - (n-1) log(an - a0) + log p(n).
/// Returns -infinity outside the support instead of throwing.
double isotonic_prior_logdensity(const BernsteinPoly& poly, const PriorSpec& spec);
inline double isotonic_prior_logdensity(const PriorDraw& draw, const PriorSpec& spec) {
    return isotonic_prior_logdensity(draw.poly, spec);
}

}  // namespace bsr
