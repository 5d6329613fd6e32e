#pragma once

#include <cstddef>
#include <iosfwd>
#include <vector>

#include "bsr/bernstein.hpp"
#include "bsr/priors.hpp"
#include "bsr/rng.hpp"

namespace bsr {

/// Regression data: design points xs[k] with responses ys[k][j], j < m_k.
struct Dataset {
    std::vector<double> xs;
    std::vector<std::vector<double>> ys;
    double tau = 1.0;

    std::size_t num_groups() const { return xs.size(); }
    std::size_t num_obs() const;

    /// Group indices sorted ascending by x; ties keep original order.
    std::vector<std::size_t> sorted_order() const;

    void validate() const;
};

/// Gaussian noise scale.
struct NoiseModel {
    double sigma = 1.0;
};

/// The four benchmark regression functions on [0, 1].
enum class TestFunction { F1, F2, F3, F4 };

double true_fn_eval(TestFunction f, double t);

/// K design points i.i.d. Uniform(0,1), one Gaussian response each.
Dataset generate_dataset(TestFunction f, std::size_t K, NoiseModel noise, Rng& rng);

/// First-difference variance estimator on responses ordered by x:
///   (1 / (2(K-1))) * sum (Y[i+1] - Y[i])^2.
double estimate_sigma_sq(const Dataset& d);

/// Gaussian log likelihood of the data under regression curve p.
double log_likelihood(const Dataset& d, const BernsteinPoly& p, double sigma_sq);

/// Data-driven prior plus the sampler bounds M1 <= F <= M2.
struct HyperParams {
    PriorSpec prior;
    double m1 = 0.0;
    double m2 = 0.0;
};

/// Extracts the empirical hyperparameters for the given shape class.
///
/// Monotone: q1 = (min of the first ceil(K/10) responses by x, mean Y),
/// q2 = (mean Y, max of the last ceil(K/10) responses by x), alpha=10, n0=20.
/// Convex: q = (mean of the ceil(K/10) smallest responses, |q01 + mean|/2),
/// beta1/beta2 = max over the first/last ceil(K/20) responses by x.
/// Concave is the sign-flipped mirror of Convex.
///
/// q02_midpoint replaces |q01 + mean|/2 by the plain midpoint (q01 + mean)/2.
HyperParams empirical_hyperparams(const Dataset& d, ShapeKind shape, bool q02_midpoint = false);

/// CSV with header "x,y", one row per observation (ragged groups flattened).
void write_csv(const Dataset& d, std::ostream& out);
Dataset read_csv(std::istream& in);

}  // namespace bsr
