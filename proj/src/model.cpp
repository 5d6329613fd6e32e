#include "bsr/model.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>

#include "bsr/errors.hpp"

namespace bsr {

namespace {
constexpr double kPi = 3.14159265358979323846;
}

std::size_t Dataset::num_obs() const {
    std::size_t m = 0;
    for (const auto& g : ys) m += g.size();
    return m;
}

std::vector<std::size_t> Dataset::sorted_order() const {
    std::vector<std::size_t> idx(xs.size());
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    std::stable_sort(idx.begin(), idx.end(),
                     [this](std::size_t a, std::size_t b) { return xs[a] < xs[b]; });
    return idx;
}

void Dataset::validate() const {
    if (xs.size() != ys.size()) throw DegenerateInputError("xs and ys lengths differ");
    if (!(tau > 0.0)) throw DegenerateInputError("tau must be positive");
    for (std::size_t k = 0; k < xs.size(); ++k) {
        if (!(xs[k] >= 0.0 && xs[k] <= tau)) throw DomainError("design point outside [0, tau]");
        if (ys[k].empty()) throw DegenerateInputError("group with no responses");
    }
}

double true_fn_eval(TestFunction f, double t) {
    if (!(t >= 0.0 && t <= 1.0)) throw DomainError("test functions are defined on [0, 1]");
    switch (f) {
        case TestFunction::F1:
            return std::sin(kPi / 2.0 * t);
        case TestFunction::F2:
            if (t <= 0.25) return 2.0 * t;
            if (t <= 0.75) return 0.5;
            return 2.0 * t - 1.0;
        case TestFunction::F3:
            return (16.0 / 9.0) * (t - 0.25) * (t - 0.25);
        case TestFunction::F4:
            if (t <= 0.25) return -4.0 * t + 1.0;
            if (t <= 0.75) return 0.0;
            return 4.0 * t - 3.0;
    }
    throw DomainError("unknown test function");
}

Dataset generate_dataset(TestFunction f, std::size_t K, NoiseModel noise, Rng& rng) {
    if (K < 2) throw DegenerateInputError("need at least 2 design points");
    Dataset d;
    d.tau = 1.0;
    d.xs.resize(K);
    d.ys.resize(K);
    for (std::size_t k = 0; k < K; ++k) {
        d.xs[k] = rng.uniform();
        d.ys[k] = {true_fn_eval(f, d.xs[k]) + noise.sigma * rng.normal()};
    }
    return d;
}

double estimate_sigma_sq(const Dataset& d) {
    const std::size_t K = d.num_groups();
    if (K < 2) throw DegenerateInputError("sigma^2 estimator needs K >= 2");
    const auto order = d.sorted_order();
    double acc = 0.0;
    for (std::size_t i = 0; i + 1 < K; ++i) {
        const double diff = d.ys[order[i + 1]].front() - d.ys[order[i]].front();
        acc += diff * diff;
    }
    return acc / (2.0 * static_cast<double>(K - 1));
}

double log_likelihood(const Dataset& d, const BernsteinPoly& p, double sigma_sq) {
    if (!(sigma_sq > 0.0)) throw DomainError("sigma^2 must be positive");
    if (d.tau != p.domain_end()) throw DomainError("dataset and polynomial domains differ");
    double ll = 0.0;
    const double norm = -0.5 * std::log(2.0 * kPi * sigma_sq);
    for (std::size_t k = 0; k < d.num_groups(); ++k) {
        const double fx = p.value(d.xs[k]);
        for (double y : d.ys[k]) {
            const double r = y - fx;
            ll += norm - r * r / (2.0 * sigma_sq);
        }
    }
    return ll;
}

namespace {

// Responses re-indexed by ascending x (single response per group required).
std::vector<double> responses_by_x(const Dataset& d) {
    std::vector<double> out;
    out.reserve(d.num_groups());
    for (std::size_t k : d.sorted_order()) {
        if (d.ys[k].size() != 1)
            throw DegenerateInputError("hyperparameter extraction requires m_k = 1");
        out.push_back(d.ys[k].front());
    }
    return out;
}

struct ConvexParams {
    Interval q;
    double beta1, beta2;
};

ConvexParams convex_params(const std::vector<double>& y_by_x, bool q02_midpoint) {
    const std::size_t K = y_by_x.size();
    const std::size_t b10 = (K + 9) / 10;
    const std::size_t b20 = (K + 19) / 20;

    std::vector<double> sorted_y = y_by_x;
    std::sort(sorted_y.begin(), sorted_y.end());
    const double mean_y =
        std::accumulate(sorted_y.begin(), sorted_y.end(), 0.0) / static_cast<double>(K);

    const double q01 =
        std::accumulate(sorted_y.begin(), sorted_y.begin() + b10, 0.0) / static_cast<double>(b10);
    const double q02 = q02_midpoint ? (q01 + mean_y) / 2.0 : std::abs(q01 + mean_y) / 2.0;
    if (!(q02 > q01)) {
        std::ostringstream msg;
        msg << "empty q range for convex prior: q01=" << q01 << " q02=" << q02;
        throw ConfigError(msg.str());
    }
    const double beta1 = *std::max_element(y_by_x.begin(), y_by_x.begin() + b20);
    const double beta2 = *std::max_element(y_by_x.end() - b20, y_by_x.end());
    return {Interval{q01, q02}, beta1, beta2};
}

}  // namespace

HyperParams empirical_hyperparams(const Dataset& d, ShapeKind shape, bool q02_midpoint) {
    d.validate();
    const std::size_t K = d.num_groups();
    auto y_by_x = responses_by_x(d);
    OrderDistribution dist(10.0, 20,
                           shape == ShapeKind::Monotone ? OrderShift::Isotonic : OrderShift::Convex);

    if (shape == ShapeKind::Monotone) {
        if (K < 10) throw DegenerateInputError("monotone hyperparameters need K >= 10");
        const std::size_t b10 = (K + 9) / 10;
        const double mean_y =
            std::accumulate(y_by_x.begin(), y_by_x.end(), 0.0) / static_cast<double>(K);
        const double q11 = *std::min_element(y_by_x.begin(), y_by_x.begin() + b10);
        const double q22 = *std::max_element(y_by_x.end() - b10, y_by_x.end());
        if (!(mean_y > q11)) {
            std::ostringstream msg;
            msg << "empty q1 range: q11=" << q11 << " q12=" << mean_y;
            throw ConfigError(msg.str());
        }
        if (!(q22 > mean_y)) {
            std::ostringstream msg;
            msg << "empty q2 range: q21=" << mean_y << " q22=" << q22;
            throw ConfigError(msg.str());
        }
        PriorSpec spec =
            PriorSpec::monotone(dist, Interval{q11, mean_y}, Interval{mean_y, q22}, d.tau);
        return HyperParams{std::move(spec), q11, q22};
    }

    if (K < 5) throw DegenerateInputError("convex/concave hyperparameters need K >= 5");
    if (shape == ShapeKind::UnimodalConvex) {
        auto p = convex_params(y_by_x, q02_midpoint);
        PriorSpec spec = PriorSpec::convex(dist, p.q, p.beta1, p.beta2, d.tau);
        const double m1 = p.q.lo;
        const double m2 = std::max(2.0 * p.beta1 - p.q.lo, 2.0 * p.beta2 - p.q.lo);
        return HyperParams{std::move(spec), m1, m2};
    }
    if (shape == ShapeKind::UnimodalConcave) {
        // Mirror image: apply the convex rule to -Y and negate back.
        for (double& y : y_by_x) y = -y;
        auto p = convex_params(y_by_x, q02_midpoint);
        PriorSpec spec = PriorSpec::concave(dist, Interval{-p.q.hi, -p.q.lo}, -p.beta1, -p.beta2, d.tau);
        const double m2 = -p.q.lo;
        const double m1 = std::min(-2.0 * p.beta1 + p.q.lo, -2.0 * p.beta2 + p.q.lo);
        return HyperParams{std::move(spec), m1, m2};
    }
    throw ConfigError("no hyperparameter rule for this shape class");
}

void write_csv(const Dataset& d, std::ostream& out) {
    out << "x,y\n";
    out.precision(17);
    for (std::size_t k = 0; k < d.num_groups(); ++k)
        for (double y : d.ys[k]) out << d.xs[k] << ',' << y << '\n';
}

Dataset read_csv(std::istream& in) {
    Dataset d;
    std::string line;
    if (!std::getline(in, line) || line.rfind("x,y", 0) != 0)
        throw IoError("dataset CSV must start with an \"x,y\" header");
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto comma = line.find(',');
        if (comma == std::string::npos) throw IoError("malformed dataset CSV row: " + line);
        const double x = std::stod(line.substr(0, comma));
        const double y = std::stod(line.substr(comma + 1));
        if (!d.xs.empty() && d.xs.back() == x) {
            d.ys.back().push_back(y);
        } else {
            d.xs.push_back(x);
            d.ys.push_back({y});
        }
    }
    return d;
}

}  // namespace bsr
