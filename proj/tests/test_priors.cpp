#include <doctest.h>

#include <cmath>
#include <limits>
#include <map>
#include <vector>

#include "bsr/errors.hpp"
#include "bsr/priors.hpp"

using namespace bsr;

namespace {

OrderDistribution iso_dist(double alpha = 10.0, int n0 = 20) {
    return OrderDistribution(alpha, n0, OrderShift::Isotonic);
}

PriorSpec mono_spec() {
    return PriorSpec::monotone(iso_dist(), Interval{0.0, 0.4}, Interval{0.6, 1.0});
}

PriorSpec concave_spec() {
    return PriorSpec::concave(OrderDistribution(10.0, 20, OrderShift::Convex), Interval{1.0, 2.0},
                              0.2, 0.1);
}

PriorSpec convex_spec() {
    return PriorSpec::convex(OrderDistribution(10.0, 20, OrderShift::Convex), Interval{-1.0, 0.5},
                             1.0, 1.2);
}

}  // namespace

TEST_SUITE_BEGIN("priors");

TEST_CASE("order pmf values and normalization") {
    const auto d = iso_dist();
    // p(1) = e^-10 + 10 e^-10, frozen from direct evaluation
    CHECK(d.pmf(1) == doctest::Approx(4.993992273873334e-4).epsilon(1e-12));
    // p(20) telescopes to the Poisson tail beyond 19
    double cdf19 = 0.0;
    for (int k = 0; k <= 19; ++k) cdf19 += std::exp(k * std::log(10.0) - 10.0 - std::lgamma(k + 1.0));
    CHECK(d.pmf(20) == doctest::Approx(1.0 - cdf19).epsilon(1e-10));
    CHECK(d.pmf(20) == doctest::Approx(3.454341975856808e-3).epsilon(1e-9));
    // plain Poisson mass inside the bulk
    CHECK(d.pmf(10) == doctest::Approx(0.12511003572113330).epsilon(1e-12));

    for (double alpha : {1.0, 10.0}) {
        for (int n0 : {5, 20, 50}) {
            for (auto kind : {OrderShift::Isotonic, OrderShift::Convex}) {
                OrderDistribution dist(alpha, n0, kind);
                double s = 0.0;
                for (int n = dist.min_order(); n <= dist.max_order(); ++n) s += dist.pmf(n);
                CHECK(std::abs(s - 1.0) < 1e-12);
            }
        }
    }
}

TEST_CASE("order pmf support and construction errors") {
    const auto d = iso_dist();
    CHECK_THROWS_AS(d.pmf(0), DomainError);
    CHECK_THROWS_AS(d.pmf(21), DomainError);
    CHECK(d.pmf_or_zero(0) == 0.0);
    CHECK(d.pmf_or_zero(21) == 0.0);

    OrderDistribution cv(10.0, 20, OrderShift::Convex);
    CHECK_THROWS_AS(cv.pmf(1), DomainError);
    CHECK(cv.pmf(2) == doctest::Approx(std::exp(-10.0) * (1.0 + 10.0 + 50.0)).epsilon(1e-12));

    CHECK_THROWS_AS(OrderDistribution(0.0, 20, OrderShift::Isotonic), ConfigError);
    CHECK_THROWS_AS(OrderDistribution(10.0, 2, OrderShift::Isotonic), ConfigError);
}

TEST_CASE("sample_order matches the pmf") {
    const auto d = iso_dist();
    Rng rng(2024);
    const int N = 100000;
    std::map<int, int> counts;
    for (int i = 0; i < N; ++i) counts[d.sample(rng)]++;
    for (int n = 1; n <= 20; ++n) {
        const double p = d.pmf(n);
        const double freq = counts[n] / static_cast<double>(N);
        const double se = std::sqrt(p * (1.0 - p) / N);
        CHECK(std::abs(freq - p) <= 4.0 * se + 1e-9);
    }
}

TEST_CASE("sample_order respects a small support and is reproducible") {
    OrderDistribution d(10.0, 3, OrderShift::Isotonic);
    Rng rng(5);
    for (int i = 0; i < 2000; ++i) {
        const int n = d.sample(rng);
        CHECK(n >= 1);
        CHECK(n <= 3);
    }
    Rng r1(77), r2(77);
    for (int i = 0; i < 100; ++i) CHECK(d.sample(r1) == d.sample(r2));
}

TEST_CASE("prior spec validation") {
    CHECK_THROWS_AS(PriorSpec::monotone(iso_dist(), Interval{0.5, 0.5}, Interval{0.6, 1.0}),
                    ConfigError);
    CHECK_THROWS_AS(PriorSpec::monotone(iso_dist(), Interval{0.9, 1.0}, Interval{0.2, 0.8}),
                    ConfigError);
    // q range entirely below the beta lower bounds: peak can never clear them
    CHECK_THROWS_AS(PriorSpec::concave(OrderDistribution(10.0, 20, OrderShift::Convex),
                                       Interval{0.0, 0.1}, 0.5, 0.5),
                    ConfigError);
    CHECK_THROWS_AS(PriorSpec::convex(OrderDistribution(10.0, 20, OrderShift::Convex),
                                      Interval{0.9, 1.0}, 0.5, 0.5),
                    ConfigError);
}

TEST_CASE("isotonic draws satisfy the shape constraint") {
    const auto spec = mono_spec();
    Rng rng(11);
    for (int i = 0; i < 10000; ++i) {
        const auto draw = sample_isotonic(spec, rng);
        CHECK(shape_check(draw.poly.coeffs(), ShapeKind::Monotone));
        CHECK(draw.poly.coeffs().front() < draw.poly.coeffs().back());
    }
}

TEST_CASE("isotonic interior coefficients are uniform order statistics") {
    // (a_k - a0)/(an - a0) ~ Beta(k, n-k); its mean is k/n.
    const auto spec = mono_spec();
    Rng rng(12);
    const int n = 5;
    const int N = 100000;
    std::vector<double> mean(n - 1, 0.0);
    for (int i = 0; i < N; ++i) {
        const auto draw = sample_isotonic_given_order(spec, n, rng);
        const auto& a = draw.poly.coeffs();
        for (int k = 1; k < n; ++k) mean[k - 1] += (a[k] - a[0]) / (a[n] - a[0]);
    }
    for (int k = 1; k < n; ++k) {
        const double expect = static_cast<double>(k) / n;
        const double var = k * (n - k) / (static_cast<double>(n) * n * (n + 1));
        const double se = std::sqrt(var / N);
        CHECK(std::abs(mean[k - 1] / N - expect) <= 4.0 * se);
    }
}

TEST_CASE("isotonic n=1 draw is just the endpoint pair") {
    const auto spec = mono_spec();
    Rng rng(13);
    const auto draw = sample_isotonic_given_order(spec, 1, rng);
    CHECK(draw.poly.order() == 1);
    CHECK(spec.q1.contains(draw.poly.coeffs()[0]));
    CHECK(spec.q2.contains(draw.poly.coeffs()[1]));
}

TEST_CASE("isotonic endpoint resampling error surfaces for hostile ranges") {
    // Overlap is tiny: the a0 < an event almost never happens.
    auto spec = PriorSpec::monotone(iso_dist(), Interval{0.0, 1.0}, Interval{1e-9, 2e-9});
    Rng rng(21);
    CHECK_THROWS_AS(
        [&] {
            for (int i = 0; i < 50; ++i) sample_isotonic(spec, rng);
        }(),
        ConfigError);
}

TEST_CASE("concave draws satisfy shape and support constraints") {
    const auto spec = concave_spec();
    Rng rng(31);
    for (int i = 0; i < 10000; ++i) {
        const auto draw = sample_concave(spec, rng);
        const auto& a = draw.poly.coeffs();
        CHECK(shape_check(a, ShapeKind::UnimodalConcave));
        REQUIRE(draw.peak_index >= 1);
        REQUIRE(draw.peak_index < draw.poly.order());
        const double al = a[draw.peak_index];
        CHECK(spec.q.contains(al));
        CHECK(a.front() >= 2.0 * spec.beta1 - al - 1e-12);
        CHECK(a.back() >= 2.0 * spec.beta2 - al - 1e-12);
        CHECK((a.front() + al) / 2.0 >= spec.beta1 - 1e-12);
        // increments never increase along the whole index range
        for (std::size_t j = 0; j + 2 < a.size(); ++j)
            CHECK(a[j + 1] - a[j] >= a[j + 2] - a[j + 1] - 1e-12);
    }
}

TEST_CASE("convex draws mirror concave draws") {
    const auto spec = convex_spec();
    Rng rng(32);
    for (int i = 0; i < 10000; ++i) {
        const auto draw = sample_convex(spec, rng);
        const auto& a = draw.poly.coeffs();
        CHECK(shape_check(a, ShapeKind::UnimodalConvex));
        std::vector<double> neg(a.size());
        for (std::size_t j = 0; j < a.size(); ++j) neg[j] = -a[j];
        CHECK(shape_check(neg, ShapeKind::UnimodalConcave));
    }
}

TEST_CASE("n=2 draws have a strict interior extremum") {
    Rng rng(33);
    const auto cc_spec = concave_spec();
    const auto cv_spec = convex_spec();
    for (int i = 0; i < 200; ++i) {
        const auto cc = sample_concave_given_order(cc_spec, 2, rng);
        const auto& a = cc.poly.coeffs();
        REQUIRE(a.size() == 3);
        CHECK(a[1] > std::max(a[0], a[2]));
        const auto cv = sample_convex_given_order(cv_spec, 2, rng);
        const auto& b = cv.poly.coeffs();
        CHECK(b[1] < std::min(b[0], b[2]));
    }
}

TEST_CASE("isotonic log density closed forms") {
    const auto spec = PriorSpec::monotone(iso_dist(), Interval{0.0, 1.0}, Interval{0.0, 1.0});
    SUBCASE("n=1 has no order-statistics factor") {
        BernsteinPoly p({0.25, 0.75});
        const double expect = std::log(spec.order_dist.pmf(1));  // unit q densities
        CHECK(isotonic_prior_logdensity(p, spec) == doctest::Approx(expect).epsilon(1e-12));
    }
    SUBCASE("n=3 interior factor is 2 on the unit span") {
        BernsteinPoly p({0.0, 0.3, 0.6, 1.0});
        const double expect = std::log(2.0) + std::log(spec.order_dist.pmf(3));
        CHECK(isotonic_prior_logdensity(p, spec) == doctest::Approx(expect).epsilon(1e-12));
    }
    SUBCASE("outside support gives -infinity, not an exception") {
        CHECK(isotonic_prior_logdensity(BernsteinPoly({0.5, 0.2, 0.8, 1.0}), spec) ==
              -std::numeric_limits<double>::infinity());
        const auto narrow = mono_spec();  // q1 = (0, 0.4)
        CHECK(isotonic_prior_logdensity(BernsteinPoly({0.5, 0.8}), narrow) ==
              -std::numeric_limits<double>::infinity());
    }
}

TEST_CASE("n=2 interior coefficient is uniform between the endpoints") {
    const auto spec = mono_spec();
    Rng rng(41);
    const int N = 100000;
    const int bins = 10;
    std::vector<int> counts(bins, 0);
    for (int i = 0; i < N; ++i) {
        const auto draw = sample_isotonic_given_order(spec, 2, rng);
        const auto& a = draw.poly.coeffs();
        const double u = (a[1] - a[0]) / (a[2] - a[0]);
        counts[std::min(bins - 1, static_cast<int>(u * bins))]++;
    }
    const double p = 1.0 / bins;
    const double se = std::sqrt(p * (1.0 - p) / N);
    for (int b = 0; b < bins; ++b)
        CHECK(std::abs(counts[b] / static_cast<double>(N) - p) <= 4.0 * se);
}

TEST_CASE("isotonic slice density integrates to one (importance sampling)") {
    // Proposal: a0 ~ U(q1), an ~ U(q2), interior sorted iid U(0, 1). The
    // weight reduces to (an-a0)^-(n-1) on the event that the interior points
    // fall inside (a0, an).
    const auto spec = mono_spec();
    Rng rng(42);
    for (int n = 2; n <= 4; ++n) {
        const int N = 400000;
        double acc = 0.0;
        std::vector<double> interior(n - 1);
        for (int i = 0; i < N; ++i) {
            const double a0 = rng.uniform(spec.q1.lo, spec.q1.hi);
            const double an = rng.uniform(spec.q2.lo, spec.q2.hi);
            bool inside = true;
            for (double& v : interior) {
                v = rng.uniform();
                inside = inside && v > a0 && v < an;
            }
            if (inside) acc += std::pow(an - a0, -(n - 1));
        }
        CHECK(acc / N == doctest::Approx(1.0).epsilon(0.02));
    }
}

TEST_CASE("log density agrees with the construction via importance reweighting") {
    // Average of exp(-slice logdensity) over slice draws equals the volume of
    // the slice support; exercises isotonic_prior_logdensity on real draws.
    const auto spec = PriorSpec::monotone(iso_dist(), Interval{0.0, 1.0}, Interval{1.0, 2.0});
    Rng rng(43);
    const int n = 3;
    const int N = 200000;
    double acc = 0.0;
    for (int i = 0; i < N; ++i) {
        const auto draw = sample_isotonic_given_order(spec, n, rng);
        const double logd = isotonic_prior_logdensity(draw, spec) -
                            std::log(spec.order_dist.pmf(n));
        acc += std::exp(-logd);
    }
    // Volume of {(a0, a1, a2, a3): a0 in q1, a3 in q2, a0 < a1 < a2 < a3}:
    // integrate (a3-a0)^2/2 over the two unit endpoint boxes.
    double vol = 0.0;
    const int G = 400;
    for (int i = 0; i < G; ++i)
        for (int j = 0; j < G; ++j) {
            const double a0 = (i + 0.5) / G;
            const double a3 = 1.0 + (j + 0.5) / G;
            vol += std::pow(a3 - a0, 2) / 2.0 / (G * G);
        }
    CHECK(acc / N == doctest::Approx(vol).epsilon(0.02));
}

TEST_SUITE_END();
