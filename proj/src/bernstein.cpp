#include "bsr/bernstein.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <stdexcept>

#include "bsr/errors.hpp"

namespace bsr {

namespace {

// Binomial rows are exact in double up to n = 56 (C(56,28) < 2^53).
constexpr int kMaxExactOrder = 56;

const double* exact_binomial_row(int n) {
    static const std::vector<double> table = [] {
        std::vector<double> t;
        t.reserve((kMaxExactOrder + 1) * (kMaxExactOrder + 2) / 2);
        std::vector<double> row{1.0};
        t.push_back(1.0);
        for (int n = 1; n <= kMaxExactOrder; ++n) {
            std::vector<double> next(n + 1, 1.0);
            for (int i = 1; i < n; ++i) next[i] = row[i - 1] + row[i];
            t.insert(t.end(), next.begin(), next.end());
            row = std::move(next);
        }
        return t;
    }();
    return table.data() + n * (n + 1) / 2;
}

double log_binomial(int n, int i) {
    return std::lgamma(n + 1.0) - std::lgamma(i + 1.0) - std::lgamma(n - i + 1.0);
}

void check_unit_interval(double t) {
    if (!(t >= 0.0 && t <= 1.0)) throw DomainError("basis argument t outside [0, 1]");
}

}  // namespace

double basis_eval(int i, int n, double t) {
    if (n < 0 || i < 0 || i > n) throw DomainError("basis index outside 0..n");
    check_unit_interval(t);
    if (t == 0.0) return i == 0 ? 1.0 : 0.0;
    if (t == 1.0) return i == n ? 1.0 : 0.0;
    if (n <= kMaxExactOrder) {
        return exact_binomial_row(n)[i] * std::pow(t, i) * std::pow(1.0 - t, n - i);
    }
    return std::exp(log_binomial(n, i) + i * std::log(t) + (n - i) * std::log1p(-t));
}

void basis_row(int n, double t, std::span<double> out) {
    if (n < 0 || out.size() != static_cast<std::size_t>(n) + 1)
        throw DegenerateInputError("basis_row output has wrong length");
    check_unit_interval(t);
    if (n > kMaxExactOrder) {
        for (int i = 0; i <= n; ++i) out[i] = basis_eval(i, n, t);
        return;
    }
    const double* binom = exact_binomial_row(n);
    const double om = 1.0 - t;
    // out[i] = C(n,i) t^i (1-t)^(n-i): forward pass fills t^i, backward (1-t)^(n-i).
    double p = 1.0;
    for (int i = 0; i <= n; ++i) {
        out[i] = binom[i] * p;
        p *= t;
    }
    p = 1.0;
    for (int i = n; i >= 0; --i) {
        out[i] *= p;
        p *= om;
    }
}

BernsteinPoly::BernsteinPoly(std::vector<double> coeffs, double domain_end)
    : coeffs_(std::move(coeffs)), domain_end_(domain_end) {
    if (coeffs_.empty()) throw DegenerateInputError("coefficient vector is empty");
    if (!(domain_end_ > 0.0)) throw DegenerateInputError("domain_end must be positive");
    for (double b : coeffs_)
        if (!std::isfinite(b)) throw DegenerateInputError("non-finite coefficient");
}

double BernsteinPoly::value(double t) const {
    if (!(t >= 0.0 && t <= domain_end_)) throw DomainError("evaluation point outside [0, domain_end]");
    const int n = order();
    const double u = t / domain_end_;
    std::array<double, 64> buf;
    std::vector<double> heap;
    std::span<double> row;
    if (n + 1 <= static_cast<int>(buf.size())) {
        row = std::span<double>(buf.data(), n + 1);
    } else {
        heap.resize(n + 1);
        row = heap;
    }
    basis_row(n, u, row);
    double s = 0.0;
    for (int i = 0; i <= n; ++i) s += coeffs_[i] * row[i];
    return s;
}

BernsteinPoly BernsteinPoly::derivative() const {
    const int n = order();
    if (n < 1) throw DegenerateInputError("derivative of an order-0 polynomial");
    std::vector<double> d(n);
    const double scale = n / domain_end_;
    for (int i = 0; i < n; ++i) d[i] = scale * (coeffs_[i + 1] - coeffs_[i]);
    return BernsteinPoly(std::move(d), domain_end_);
}

double BernsteinPoly::integral_to(double t) const {
    if (!(t >= 0.0 && t <= domain_end_)) throw DomainError("integration endpoint outside [0, domain_end]");
    const int n = order();
    // Antiderivative in Bernstein form of order n+1: cumulative coefficient sums.
    std::vector<double> c(n + 2, 0.0);
    double acc = 0.0;
    const double scale = domain_end_ / (n + 1);
    for (int j = 1; j <= n + 1; ++j) {
        acc += coeffs_[j - 1];
        c[j] = scale * acc;
    }
    return BernsteinPoly(std::move(c), domain_end_).value(t);
}

bool shape_check(std::span<const double> coeffs, ShapeKind shape) {
    const auto m = coeffs.size();
    switch (shape) {
        case ShapeKind::Monotone: {
            if (m < 2) throw DegenerateInputError("Monotone check needs at least 2 coefficients");
            for (std::size_t i = 0; i + 1 < m; ++i)
                if (coeffs[i] > coeffs[i + 1]) return false;
            return true;
        }
        case ShapeKind::UnimodalConcave: {
            if (m < 3) throw DegenerateInputError("UnimodalConcave check needs at least 3 coefficients");
            if (!(coeffs[1] - coeffs[0] > 0.0)) return false;
            if (!(coeffs[m - 1] - coeffs[m - 2] < 0.0)) return false;
            for (std::size_t i = 1; i + 1 < m; ++i)
                if (coeffs[i + 1] + coeffs[i - 1] > 2.0 * coeffs[i]) return false;
            return true;
        }
        case ShapeKind::UnimodalConvex: {
            if (m < 3) throw DegenerateInputError("UnimodalConvex check needs at least 3 coefficients");
            if (!(coeffs[1] - coeffs[0] < 0.0)) return false;
            if (!(coeffs[m - 1] - coeffs[m - 2] > 0.0)) return false;
            for (std::size_t i = 1; i + 1 < m; ++i)
                if (coeffs[i + 1] + coeffs[i - 1] < 2.0 * coeffs[i]) return false;
            return true;
        }
        case ShapeKind::Unimodal:
            return unimodal_witness(coeffs).has_value();
    }
    throw DomainError("unknown shape kind");
}

std::optional<UnimodalWitness> unimodal_witness(std::span<const double> coeffs) {
    const int m = static_cast<int>(coeffs.size());
    if (m < 4) throw DegenerateInputError("Unimodal check needs at least 4 coefficients");
    const int n = m - 1;

    // l1: end of the initial constant run, followed by a strict rise.
    int l1 = 0;
    while (l1 + 1 <= n && coeffs[l1 + 1] == coeffs[l1]) ++l1;
    if (l1 == n) return std::nullopt;
    if (coeffs[l1 + 1] < coeffs[l1]) return std::nullopt;

    // l3: forced as the index just before the trailing constant run, with a
    // strict drop into it.
    int e = n;
    while (e - 1 >= 0 && coeffs[e - 1] == coeffs[e]) --e;
    const int l3 = e - 1;
    if (l3 < 0 || coeffs[l3] < coeffs[e]) return std::nullopt;
    if (l3 <= l1) return std::nullopt;

    // l2: largest index of the maximal plateau that still leaves l2 < l3.
    double peak = coeffs[l1 + 1];
    int p2 = l1 + 1;
    for (int i = l1 + 1; i <= l3; ++i) {
        if (coeffs[i] >= peak) {
            peak = coeffs[i];
            p2 = i;
        }
    }
    const int l2 = std::min(p2, l3 - 1);
    if (l2 <= l1 || coeffs[l2] != peak) return std::nullopt;

    for (int i = l1; i < l2; ++i)
        if (coeffs[i] > coeffs[i + 1]) return std::nullopt;
    for (int i = l2; i < l3; ++i)
        if (coeffs[i] < coeffs[i + 1]) return std::nullopt;
    return UnimodalWitness{l1, l2, l3};
}

BernsteinPoly bernstein_approx(std::span<const double> samples, double tau) {
    if (samples.size() < 2) throw DegenerateInputError("bernstein_approx needs at least 2 samples");
    return BernsteinPoly(std::vector<double>(samples.begin(), samples.end()), tau);
}

}  // namespace bsr
