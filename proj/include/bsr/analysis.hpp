#pragma once

#include <map>
#include <span>
#include <vector>

#include "bsr/model.hpp"
#include "bsr/samplers.hpp"

namespace bsr {

/// A curve tabulated on a strictly increasing grid.
struct CurveEstimate {
    std::vector<double> grid;
    std::vector<double> values;
};

/// Pointwise average of the retained curves over the grid. Exact up to
/// floating-point association (states are grouped by order before summing).
CurveEstimate posterior_mean_curve(const ChainTrace& trace, std::span<const double> grid);

struct ErrorMetrics {
    double l1 = 0.0;
    double sup = 0.0;
    double mse = 0.0;
};

/// L1 (trapezoid), sup and grid-mean-square error of est against the true
/// curve. The grid must span [0, 1].
ErrorMetrics error_metrics(const CurveEstimate& est, TestFunction f);

/// Empirical frequency of each retained order; sums to 1.
std::map<int, double> order_posterior(const ChainTrace& trace);

/// Standard biased-normalization autocorrelations rho_1..rho_max_lag.
std::vector<double> autocorrelation(std::span<const double> series, int max_lag);

/// ESS = m / (1 + 2 sum_{k<=k*} rho_k), truncating at the first lag with
/// rho < 0.05 or the first negative lag, whichever comes first; clipped to
/// (0, m].
double effective_sample_size(std::span<const double> series);

/// Integral of |F| over the domain for every retained state (the monitored
/// diagnostic series). Exact for single-signed and monotone states, 513-point
/// trapezoid for sign-changing unimodal states.
std::vector<double> curve_l1_series(const ChainTrace& trace);

/// Same, for |F - F_true| (alternative monitored series).
std::vector<double> curve_err_l1_series(const ChainTrace& trace, TestFunction f);

struct Diagnostics {
    std::vector<double> acf;
    double ess = 0.0;
    double acceptance_rate = 0.0;
    std::map<int, double> order_pmf_hat;
};

Diagnostics make_diagnostics(const ChainTrace& trace, std::span<const double> series, int max_lag);

/// Uniform grid of `count` points on [0, hi].
std::vector<double> linspace(double hi, std::size_t count);

}  // namespace bsr
