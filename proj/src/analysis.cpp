#include "bsr/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "bsr/errors.hpp"

namespace bsr {

namespace {

void check_grid(std::span<const double> grid) {
    if (grid.size() < 2) throw DegenerateInputError("grid needs at least 2 points");
    for (std::size_t i = 0; i + 1 < grid.size(); ++i)
        if (!(grid[i] < grid[i + 1])) throw DomainError("grid must be strictly increasing");
}

// Evaluation helpers on raw coefficient spans, reusing caller scratch.
double eval_at(std::span<const double> coeffs, double u, std::vector<double>& row) {
    const int n = static_cast<int>(coeffs.size()) - 1;
    row.resize(n + 1);
    basis_row(n, u, row);
    double s = 0.0;
    for (int i = 0; i <= n; ++i) s += coeffs[i] * row[i];
    return s;
}

}  // namespace

std::vector<double> linspace(double hi, std::size_t count) {
    std::vector<double> g(count);
    for (std::size_t i = 0; i < count; ++i)
        g[i] = hi * static_cast<double>(i) / static_cast<double>(count - 1);
    return g;
}

CurveEstimate posterior_mean_curve(const ChainTrace& trace, std::span<const double> grid) {
    if (trace.size() == 0) throw DegenerateInputError("posterior mean of an empty trace");
    check_grid(grid);

    // Averaging commutes with the basis expansion, so sum coefficients per
    // order first and evaluate each aggregate once.
    std::map<int, std::vector<double>> sums;
    for (std::size_t i = 0; i < trace.size(); ++i) {
        const auto c = trace.state_coeffs(i);
        auto& s = sums[trace.orders[i]];
        if (s.empty()) s.assign(c.size(), 0.0);
        for (std::size_t j = 0; j < c.size(); ++j) s[j] += c[j];
    }

    CurveEstimate est;
    est.grid.assign(grid.begin(), grid.end());
    est.values.assign(grid.size(), 0.0);
    std::vector<double> row;
    const double inv_m = 1.0 / static_cast<double>(trace.size());
    for (const auto& [n, s] : sums) {
        for (std::size_t g = 0; g < grid.size(); ++g)
            est.values[g] += eval_at(s, grid[g] / trace.tau, row) * inv_m;
    }
    return est;
}

ErrorMetrics error_metrics(const CurveEstimate& est, TestFunction f) {
    check_grid(est.grid);
    if (est.grid.size() != est.values.size())
        throw DegenerateInputError("grid and value lengths differ");
    if (est.grid.front() > 1e-12 || est.grid.back() < 1.0 - 1e-12)
        throw DomainError("metrics grid must span [0, 1]");

    const std::size_t g = est.grid.size();
    std::vector<double> diff(g);
    for (std::size_t i = 0; i < g; ++i)
        diff[i] = est.values[i] - true_fn_eval(f, std::min(1.0, est.grid[i]));

    ErrorMetrics m;
    double sq = 0.0;
    for (std::size_t i = 0; i < g; ++i) {
        m.sup = std::max(m.sup, std::abs(diff[i]));
        sq += diff[i] * diff[i];
        if (i + 1 < g)
            m.l1 += 0.5 * (std::abs(diff[i]) + std::abs(diff[i + 1])) * (est.grid[i + 1] - est.grid[i]);
    }
    m.mse = sq / static_cast<double>(g);
    return m;
}

std::map<int, double> order_posterior(const ChainTrace& trace) {
    if (trace.size() == 0) throw DegenerateInputError("order posterior of an empty trace");
    std::map<int, double> freq;
    for (int n : trace.orders) freq[n] += 1.0;
    for (auto& [n, v] : freq) v /= static_cast<double>(trace.size());
    return freq;
}

std::vector<double> autocorrelation(std::span<const double> series, int max_lag) {
    const std::size_t m = series.size();
    if (max_lag < 1 || m <= static_cast<std::size_t>(max_lag))
        throw DegenerateInputError("series too short for the requested lag");
    const double mean = std::accumulate(series.begin(), series.end(), 0.0) / static_cast<double>(m);
    double s0 = 0.0;
    for (double s : series) s0 += (s - mean) * (s - mean);
    if (s0 == 0.0) throw UndefinedAcfError("autocorrelation of a zero-variance series");
    std::vector<double> rho(max_lag);
    for (int k = 1; k <= max_lag; ++k) {
        double acc = 0.0;
        for (std::size_t t = 0; t + k < m; ++t)
            acc += (series[t] - mean) * (series[t + k] - mean);
        rho[k - 1] = acc / s0;
    }
    return rho;
}

double effective_sample_size(std::span<const double> series) {
    const std::size_t m = series.size();
    if (m < 2) throw DegenerateInputError("ESS needs at least 2 points");
    const double mean = std::accumulate(series.begin(), series.end(), 0.0) / static_cast<double>(m);
    double s0 = 0.0;
    for (double s : series) s0 += (s - mean) * (s - mean);
    if (s0 == 0.0) throw UndefinedAcfError("ESS of a zero-variance series");

    const int cap = static_cast<int>(std::min<std::size_t>(m - 1, 2000));
    double sum = 0.0;
    for (int k = 1; k <= cap; ++k) {
        double acc = 0.0;
        for (std::size_t t = 0; t + k < m; ++t)
            acc += (series[t] - mean) * (series[t + k] - mean);
        const double rho = acc / s0;
        sum += rho;
        if (rho < 0.05 || rho < 0.0) break;
    }
    const double denom = 1.0 + 2.0 * sum;
    const double md = static_cast<double>(m);
    if (!(denom > 0.0)) return md;
    return std::min(md, md / denom);
}

namespace {

// Workspace for the per-state L1 integrals.
struct L1Work {
    std::vector<double> row;
    std::vector<double> cum;  // antiderivative coefficients

    double value(std::span<const double> c, double u) { return eval_at(c, u, row); }

    // A(u) with A(0) = 0, for tau = 1 scaling applied by the caller.
    double antideriv(std::span<const double> c, double u) {
        const int n = static_cast<int>(c.size()) - 1;
        cum.assign(n + 2, 0.0);
        double acc = 0.0;
        for (int j = 1; j <= n + 1; ++j) {
            acc += c[j - 1];
            cum[j] = acc / static_cast<double>(n + 1);
        }
        return eval_at(cum, u, row);
    }

    double trapezoid_abs(std::span<const double> c, double tau, double shift_tau,
                         TestFunction* f) {
        constexpr int kPoints = 513;
        double acc = 0.0;
        double prev = 0.0;
        for (int i = 0; i < kPoints; ++i) {
            const double u = static_cast<double>(i) / (kPoints - 1);
            double v = value(c, u);
            if (f != nullptr) v -= true_fn_eval(*f, u * shift_tau);
            v = std::abs(v);
            if (i > 0) acc += 0.5 * (prev + v) * (tau / (kPoints - 1));
            prev = v;
        }
        return acc;
    }
};

bool non_decreasing(std::span<const double> c) {
    for (std::size_t i = 0; i + 1 < c.size(); ++i)
        if (c[i] > c[i + 1]) return false;
    return true;
}

double state_l1(std::span<const double> c, double tau, L1Work& w) {
    const auto [mn_it, mx_it] = std::minmax_element(c.begin(), c.end());
    const double mean = std::accumulate(c.begin(), c.end(), 0.0) / static_cast<double>(c.size());
    if (*mn_it >= 0.0) return tau * mean;
    if (*mx_it <= 0.0) return -tau * mean;
    if (non_decreasing(c)) {
        // Single sign change: F(0) = c.front() < 0 < c.back() = F(tau).
        double lo = 0.0, hi = 1.0;
        for (int it = 0; it < 60; ++it) {
            const double mid = 0.5 * (lo + hi);
            (w.value(c, mid) < 0.0 ? lo : hi) = mid;
        }
        const double s = 0.5 * (lo + hi);
        return tau * (w.antideriv(c, 1.0) - 2.0 * w.antideriv(c, s));
    }
    return w.trapezoid_abs(c, tau, 0.0, nullptr);
}

}  // namespace

std::vector<double> curve_l1_series(const ChainTrace& trace) {
    std::vector<double> out(trace.size());
    L1Work w;
    for (std::size_t i = 0; i < trace.size(); ++i)
        out[i] = state_l1(trace.state_coeffs(i), trace.tau, w);
    return out;
}

std::vector<double> curve_err_l1_series(const ChainTrace& trace, TestFunction f) {
    std::vector<double> out(trace.size());
    L1Work w;
    for (std::size_t i = 0; i < trace.size(); ++i)
        out[i] = w.trapezoid_abs(trace.state_coeffs(i), trace.tau, trace.tau, &f);
    return out;
}

Diagnostics make_diagnostics(const ChainTrace& trace, std::span<const double> series, int max_lag) {
    Diagnostics d;
    const int lag = std::min<int>(max_lag, static_cast<int>(series.size()) - 1);
    d.acf = autocorrelation(series, lag);
    d.ess = effective_sample_size(series);
    d.acceptance_rate = trace.acceptance_rate();
    d.order_pmf_hat = order_posterior(trace);
    return d;
}

}  // namespace bsr
