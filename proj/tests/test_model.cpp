#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <sstream>
#include <vector>

#include "bsr/errors.hpp"
#include "bsr/model.hpp"

using namespace bsr;

namespace {

Dataset grid_dataset(const std::vector<double>& ys_by_x) {
    Dataset d;
    const std::size_t K = ys_by_x.size();
    for (std::size_t i = 0; i < K; ++i) {
        d.xs.push_back((i + 0.5) / static_cast<double>(K));
        d.ys.push_back({ys_by_x[i]});
    }
    return d;
}

}  // namespace

TEST_SUITE_BEGIN("model");

TEST_CASE("test function values from the definitions") {
    CHECK(true_fn_eval(TestFunction::F1, 1.0) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(true_fn_eval(TestFunction::F2, 0.5) == doctest::Approx(0.5).epsilon(1e-14));
    CHECK(true_fn_eval(TestFunction::F3, 0.25) == doctest::Approx(0.0).epsilon(1e-14));
    CHECK(true_fn_eval(TestFunction::F4, 0.0) == doctest::Approx(1.0).epsilon(1e-14));
    // piecewise branches agree at their breakpoints
    for (auto f : {TestFunction::F2, TestFunction::F4}) {
        for (double b : {0.25, 0.75}) {
            const double eps = 1e-9;
            CHECK(true_fn_eval(f, b - eps) == doctest::Approx(true_fn_eval(f, b + eps)).epsilon(1e-6));
        }
    }
    CHECK_THROWS_AS(true_fn_eval(TestFunction::F1, -0.1), DomainError);
    CHECK_THROWS_AS(true_fn_eval(TestFunction::F1, 1.1), DomainError);
}

TEST_CASE("test function shapes on a grid") {
    const int G = 200;
    for (auto f : {TestFunction::F1, TestFunction::F2}) {
        for (int g = 0; g < G; ++g)
            CHECK(true_fn_eval(f, (g + 1.0) / G) >= true_fn_eval(f, static_cast<double>(g) / G) - 1e-12);
    }
    for (auto f : {TestFunction::F3, TestFunction::F4}) {
        for (int g = 1; g < G; ++g) {
            const double a = true_fn_eval(f, (g - 1.0) / G);
            const double b = true_fn_eval(f, static_cast<double>(g) / G);
            const double c = true_fn_eval(f, (g + 1.0) / G);
            CHECK(a + c - 2.0 * b >= -1e-12);
        }
    }
}

TEST_CASE("generate_dataset") {
    SUBCASE("zero noise lies on the curve") {
        Rng rng(1);
        const auto d = generate_dataset(TestFunction::F1, 50, NoiseModel{0.0}, rng);
        for (std::size_t k = 0; k < 50; ++k)
            CHECK(d.ys[k][0] == doctest::Approx(true_fn_eval(TestFunction::F1, d.xs[k])).epsilon(1e-14));
    }
    SUBCASE("unit-noise residual variance is near one") {
        Rng rng(2);
        double acc = 0.0;
        const int R = 200, K = 100;
        for (int r = 0; r < R; ++r) {
            const auto d = generate_dataset(TestFunction::F1, K, NoiseModel{1.0}, rng);
            for (std::size_t k = 0; k < K; ++k) {
                const double res = d.ys[k][0] - true_fn_eval(TestFunction::F1, d.xs[k]);
                acc += res * res;
            }
        }
        const double var = acc / (R * K);
        // variance of the sample variance of N Gaussians is 2/N
        CHECK(std::abs(var - 1.0) <= 4.0 * std::sqrt(2.0 / (R * K)));
    }
    SUBCASE("fixed seed reproduces the dataset") {
        Rng r1(7), r2(7);
        const auto d1 = generate_dataset(TestFunction::F2, 30, NoiseModel{0.5}, r1);
        const auto d2 = generate_dataset(TestFunction::F2, 30, NoiseModel{0.5}, r2);
        CHECK(d1.xs == d2.xs);
        CHECK(d1.ys == d2.ys);
    }
    SUBCASE("K < 2 rejected") {
        Rng rng(3);
        CHECK_THROWS_AS(generate_dataset(TestFunction::F1, 1, NoiseModel{1.0}, rng),
                        DegenerateInputError);
    }
}

TEST_CASE("sigma^2 estimator") {
    SUBCASE("constant responses give zero") {
        const auto d = grid_dataset(std::vector<double>(20, 3.0));
        CHECK(estimate_sigma_sq(d) == 0.0);
    }
    SUBCASE("alternating responses at K=100 give one half") {
        std::vector<double> ys(100);
        for (int i = 0; i < 100; ++i) ys[i] = i % 2 ? 1.0 : 0.0;
        CHECK(estimate_sigma_sq(grid_dataset(ys)) == doctest::Approx(99.0 / 198.0).epsilon(1e-14));
    }
    SUBCASE("x order, not group order, defines the differences") {
        Dataset d;
        d.xs = {0.9, 0.1, 0.5};
        d.ys = {{3.0}, {1.0}, {2.0}};
        // sorted by x the responses are 1, 2, 3: two unit jumps over 2(K-1)=4
        CHECK(estimate_sigma_sq(d) == doctest::Approx(0.5).epsilon(1e-14));
    }
    SUBCASE("unbiased for constant regression with unit noise") {
        Rng rng(4);
        const int R = 10000, K = 100;
        double acc = 0.0, acc2 = 0.0;
        for (int r = 0; r < R; ++r) {
            std::vector<double> ys(K);
            for (double& y : ys) y = rng.normal();
            const double est = estimate_sigma_sq(grid_dataset(ys));
            acc += est;
            acc2 += est * est;
        }
        const double mean = acc / R;
        const double se = std::sqrt((acc2 / R - mean * mean) / R);
        CHECK(std::abs(mean - 1.0) <= 4.0 * se);
    }
    SUBCASE("translation invariance and quadratic scaling") {
        std::vector<double> ys{0.3, 1.7, 0.9, 2.5, 1.1};
        const double base = estimate_sigma_sq(grid_dataset(ys));
        std::vector<double> shifted = ys, scaled = ys;
        for (double& y : shifted) y += 10.0;
        for (double& y : scaled) y *= 3.0;
        CHECK(estimate_sigma_sq(grid_dataset(shifted)) == doctest::Approx(base).epsilon(1e-12));
        CHECK(estimate_sigma_sq(grid_dataset(scaled)) == doctest::Approx(9.0 * base).epsilon(1e-12));
    }
    SUBCASE("K < 2 rejected") {
        Dataset d;
        d.xs = {0.5};
        d.ys = {{1.0}};
        CHECK_THROWS_AS(estimate_sigma_sq(d), DegenerateInputError);
    }
}

TEST_CASE("log likelihood") {
    SUBCASE("single zero-residual observation") {
        Dataset d;
        d.xs = {0.0};
        d.ys = {{1.0}};
        BernsteinPoly p({1.0, 2.0});
        CHECK(log_likelihood(d, p, 1.0) == doctest::Approx(-0.9189385332046727).epsilon(1e-14));
    }
    SUBCASE("duplicate observation doubles the value") {
        Dataset d1, d2;
        d1.xs = {0.3};
        d1.ys = {{0.7}};
        d2.xs = {0.3};
        d2.ys = {{0.7, 0.7}};
        BernsteinPoly p({0.2, 0.9});
        CHECK(log_likelihood(d2, p, 0.5) ==
              doctest::Approx(2.0 * log_likelihood(d1, p, 0.5)).epsilon(1e-13));
    }
    SUBCASE("matches a long-double term-by-term oracle") {
        Rng rng(5);
        const auto d = generate_dataset(TestFunction::F3, 40, NoiseModel{0.4}, rng);
        BernsteinPoly p({1.2, 0.1, -0.2, 0.5, 1.4});
        const double s2 = 0.37;
        long double acc = 0.0L;
        for (std::size_t k = 0; k < d.num_groups(); ++k) {
            const long double r = d.ys[k][0] - p.value(d.xs[k]);
            acc += -0.5L * std::log(2.0L * 3.14159265358979323846264338328L * s2) -
                   r * r / (2.0L * s2);
        }
        CHECK(log_likelihood(d, p, s2) ==
              doctest::Approx(static_cast<double>(acc)).epsilon(1e-10));
    }
    SUBCASE("maximized over vertical shifts at the least-squares shift") {
        Rng rng(6);
        const auto d = generate_dataset(TestFunction::F1, 60, NoiseModel{0.3}, rng);
        BernsteinPoly base({0.0, 0.6, 1.0});
        double mean_resid = 0.0;
        for (std::size_t k = 0; k < d.num_groups(); ++k)
            mean_resid += (d.ys[k][0] - base.value(d.xs[k])) / 60.0;
        auto ll_at = [&](double s) {
            std::vector<double> c = base.coeffs();
            for (double& v : c) v += s;
            return log_likelihood(d, BernsteinPoly(c), 1.0);
        };
        const double opt = ll_at(mean_resid);
        for (double s : {-0.5, -0.1, 0.1, 0.5}) CHECK(ll_at(mean_resid + s) <= opt + 1e-12);
    }
    SUBCASE("domain mismatch raises") {
        Dataset d;
        d.xs = {0.5};
        d.ys = {{1.0}};
        d.tau = 1.0;
        BernsteinPoly p({0.0, 1.0}, 2.0);
        CHECK_THROWS_AS(log_likelihood(d, p, 1.0), DomainError);
        CHECK_THROWS_AS(log_likelihood(d, BernsteinPoly({0.0, 1.0}), 0.0), DomainError);
    }
}

TEST_CASE("monotone hyperparameters use the paper block indices at K=100") {
    // Position i (by x) carries value i, with markers planted inside the
    // first and last blocks of ten.
    std::vector<double> ys(100);
    for (int i = 0; i < 100; ++i) ys[i] = static_cast<double>(i);
    ys[3] = -7.0;    // min over positions 0..9
    ys[95] = 250.0;  // max over positions 90..99
    const auto d = grid_dataset(ys);
    const auto hp = empirical_hyperparams(d, ShapeKind::Monotone);
    double mean = 0.0;
    for (double y : ys) mean += y / 100.0;
    CHECK(hp.prior.q1.lo == -7.0);
    CHECK(hp.prior.q1.hi == doctest::Approx(mean).epsilon(1e-12));
    CHECK(hp.prior.q2.lo == doctest::Approx(mean).epsilon(1e-12));
    CHECK(hp.prior.q2.hi == 250.0);
    CHECK(hp.m1 == -7.0);
    CHECK(hp.m2 == 250.0);
    CHECK(hp.prior.order_dist.alpha() == 10.0);
    CHECK(hp.prior.order_dist.max_order() == 20);
}

TEST_CASE("convex hyperparameters use the paper block indices at K=100") {
    std::vector<double> ys(100);
    for (int i = 0; i < 100; ++i) ys[i] = 10.0 + i;  // by x position
    ys[2] = 42.0;    // max of positions 0..4 -> beta1
    ys[97] = 260.0;  // max of positions 95..99 -> beta2
    const auto d = grid_dataset(ys);
    const auto hp = empirical_hyperparams(d, ShapeKind::UnimodalConvex);
    std::vector<double> sorted = ys;
    std::sort(sorted.begin(), sorted.end());
    double q01 = 0.0;
    for (int i = 0; i < 10; ++i) q01 += sorted[i] / 10.0;
    double mean = 0.0;
    for (double y : ys) mean += y / 100.0;
    CHECK(hp.prior.q.lo == doctest::Approx(q01).epsilon(1e-12));
    CHECK(hp.prior.q.hi == doctest::Approx(std::abs(q01 + mean) / 2.0).epsilon(1e-12));
    CHECK(hp.prior.beta1 == 42.0);
    CHECK(hp.prior.beta2 == 260.0);
}

TEST_CASE("hyperparameter edge cases") {
    SUBCASE("constant responses collapse the ranges") {
        const auto d = grid_dataset(std::vector<double>(100, 2.0));
        CHECK_THROWS_AS(empirical_hyperparams(d, ShapeKind::Monotone), ConfigError);
        CHECK_THROWS_AS(empirical_hyperparams(d, ShapeKind::UnimodalConvex), ConfigError);
    }
    SUBCASE("F1 data with small noise brackets the range") {
        Rng rng(9);
        const auto d = generate_dataset(TestFunction::F1, 100, NoiseModel{0.1}, rng);
        const auto hp = empirical_hyperparams(d, ShapeKind::Monotone);
        CHECK(std::abs(hp.prior.q1.lo - 0.0) < 0.35);
        CHECK(std::abs(hp.prior.q2.hi - 1.0) < 0.35);
        CHECK(hp.prior.q1.lo < hp.prior.q2.hi);
    }
    SUBCASE("concave is the mirror of convex on negated data") {
        Rng rng(10);
        std::vector<double> ys(100);
        for (double& y : ys) y = rng.uniform(-1.0, 3.0);
        const auto hc = empirical_hyperparams(grid_dataset(ys), ShapeKind::UnimodalConcave);
        std::vector<double> neg = ys;
        for (double& y : neg) y = -y;
        const auto hv = empirical_hyperparams(grid_dataset(neg), ShapeKind::UnimodalConvex);
        CHECK(hc.prior.q.lo == doctest::Approx(-hv.prior.q.hi).epsilon(1e-12));
        CHECK(hc.prior.q.hi == doctest::Approx(-hv.prior.q.lo).epsilon(1e-12));
        CHECK(hc.prior.beta1 == doctest::Approx(-hv.prior.beta1).epsilon(1e-12));
        CHECK(hc.prior.beta2 == doctest::Approx(-hv.prior.beta2).epsilon(1e-12));
    }
    SUBCASE("midpoint switch changes q02 when the printed form differs") {
        // convex data shifted down so q01 + mean(Y) is negative
        std::vector<double> ys(100);
        for (int i = 0; i < 100; ++i) {
            const double t = (i + 0.5) / 100.0;
            ys[i] = 4.0 * (t - 0.5) * (t - 0.5) - 2.0;
        }
        const auto printed = empirical_hyperparams(grid_dataset(ys), ShapeKind::UnimodalConvex);
        const auto midpoint = empirical_hyperparams(grid_dataset(ys), ShapeKind::UnimodalConvex, true);
        CHECK(printed.prior.q.lo == midpoint.prior.q.lo);
        CHECK(printed.prior.q.hi > 0.0);   // |negative|/2 flips the sign
        CHECK(midpoint.prior.q.hi < 0.0);  // plain midpoint keeps it
        CHECK(printed.prior.q.hi == doctest::Approx(-midpoint.prior.q.hi).epsilon(1e-12));
    }
}

TEST_CASE("dataset CSV round trip") {
    Dataset d;
    d.xs = {0.5, 0.25, 0.25};
    d.ys = {{1.0, 2.0}, {3.0}, {4.0}};
    std::ostringstream out;
    write_csv(d, out);
    std::istringstream in(out.str());
    const Dataset back = read_csv(in);
    CHECK(back.num_obs() == d.num_obs());
    // consecutive duplicate x rows merge into one ragged group
    CHECK(back.xs.size() == 2);
    CHECK(back.ys[0] == std::vector<double>{1.0, 2.0});
    CHECK(back.ys[1] == std::vector<double>{3.0, 4.0});
    std::istringstream bad("a,b\n1,2\n");
    CHECK_THROWS_AS(read_csv(bad), IoError);
}

TEST_SUITE_END();
