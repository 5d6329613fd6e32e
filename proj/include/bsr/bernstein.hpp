#pragma once

#include <optional>
#include <span>
#include <vector>

namespace bsr {

/// Shape classes recognized by the coefficient-level predicates.
enum class ShapeKind { Monotone, UnimodalConcave, UnimodalConvex, Unimodal };

/// Witness indices for the Unimodal coefficient pattern:
/// flat [0..l1], strict rise, non-decreasing up to l2, non-increasing down to
/// l3, strict drop, flat [l3+1..n].
struct UnimodalWitness {
    int l1 = 0;
    int l2 = 0;
    int l3 = 0;
};

/// Polynomial in Bernstein form on [0, domain_end]:
///   F(t) = sum_i coeffs[i] * C(n,i) (t/tau)^i (1 - t/tau)^(n-i).
class BernsteinPoly {
public:
    BernsteinPoly(std::vector<double> coeffs, double domain_end = 1.0);

    int order() const { return static_cast<int>(coeffs_.size()) - 1; }
    double domain_end() const { return domain_end_; }
    const std::vector<double>& coeffs() const { return coeffs_; }

    /// Evaluates at t in [0, domain_end]; throws DomainError outside.
    double value(double t) const;

    /// Derivative polynomial: order n-1 with coefficients (n/tau)(b[i+1]-b[i]).
    /// Throws DegenerateInputError for order 0.
    BernsteinPoly derivative() const;

    /// Antiderivative value A(t) with A(0) = 0; A(domain_end) equals
    /// domain_end * mean(coeffs).
    double integral_to(double t) const;

private:
    std::vector<double> coeffs_;
    double domain_end_;
};

/// Single Bernstein basis value C(n,i) t^i (1-t)^(n-i).
/// Exact-binomial path for n <= 56, log-space above; stable far past n = 50.
double basis_eval(int i, int n, double t);

/// Fills out[0..n] with all basis values at t. out.size() must be n+1.
void basis_row(int n, double t, std::span<double> out);

/// Checks the coefficient-level pattern for the given shape class.
/// Comparisons are exact (no tolerance): the constraints are defined on the
/// coefficients themselves and the priors generate strict inequalities with
/// probability 1.
bool shape_check(std::span<const double> coeffs, ShapeKind shape);

/// Unimodal pattern scan; returns the canonical witness (smallest l1, then
/// largest feasible l2 in the maximal plateau, then smallest l3) or nullopt.
std::optional<UnimodalWitness> unimodal_witness(std::span<const double> coeffs);

/// Polynomial with coefficients sampled from a function at i*tau/n, i = 0..n.
BernsteinPoly bernstein_approx(std::span<const double> samples, double tau);

}  // namespace bsr
