#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <vector>

#include "serofit/errors.hpp"
#include "serofit/quadrature.hpp"
#include "serofit/rng.hpp"
#include "serofit/sampling.hpp"
#include "support/ks.hpp"

using namespace serofit;

namespace {

SmoothedBox unit_box(double edge = 0.01) { return SmoothedBox(0.0, 1.0, 0.0, 1.0, edge, edge); }

// Area-scaled trapezoid CDF, the inverse of the sampler's map.
double trapezoid_cdf(double x, double lo, double hi, double edge) {
    const double span = hi - lo;
    if (x <= lo - edge) return 0.0;
    if (edge > 0.0 && x < lo + edge) {
        const double u = x - (lo - edge);
        return u * u / (4.0 * edge) / span;
    }
    if (x <= hi - edge) return (x - lo) / span;
    if (edge > 0.0 && x < hi + edge) {
        const double u = (hi + edge) - x;
        return (span - u * u / (4.0 * edge)) / span;
    }
    return 1.0;
}

} // namespace

TEST_CASE("trapezoid weight at pinned points") {
    CHECK(trapezoid_eval(0.5, 0.0, 1.0, 0.01) == 1.0);
    CHECK(trapezoid_eval(0.0, 0.0, 1.0, 0.01) == 0.5);
    CHECK(trapezoid_eval(-0.02, 0.0, 1.0, 0.01) == 0.0);
    CHECK(trapezoid_eval(1.02, 0.0, 1.0, 0.01) == 0.0);
    CHECK(trapezoid_eval(0.005, 0.0, 1.0, 0.01) == doctest::Approx(0.75).epsilon(1e-14));
}

TEST_CASE("degenerate edge reduces to the closed-box indicator") {
    CHECK(trapezoid_eval(0.0, 0.0, 1.0, 0.0) == 1.0);
    CHECK(trapezoid_eval(1.0, 0.0, 1.0, 0.0) == 1.0);
    CHECK(trapezoid_eval(-1e-12, 0.0, 1.0, 0.0) == 0.0);
    CHECK(trapezoid_eval(0.5, 0.0, 1.0, 0.0) == 1.0);
}

TEST_CASE("invalid geometry is rejected") {
    CHECK_THROWS_AS(trapezoid_eval(0.0, 1.0, 0.0, 0.01), InvalidGeometry);
    CHECK_THROWS_AS(trapezoid_eval(0.0, 0.0, 1.0, -0.1), InvalidGeometry);
    CHECK_THROWS_AS(trapezoid_eval(0.0, 0.0, 1.0, 0.5), InvalidGeometry);
    CHECK_THROWS_AS(SmoothedBox(0.0, 1.0, 1.0, 1.0, 0.01, 0.01), InvalidGeometry);
    CHECK_THROWS_AS(SmoothedBox(0.0, 1.0, 0.0, 0.05, 0.01, 0.025), InvalidGeometry);
}

TEST_CASE("density at pinned points") {
    const SmoothedBox b = unit_box();
    CHECK(b.density(0.5, 0.5) == 1.0);
    CHECK(b.density(-0.5, 0.5) == 0.0);
    CHECK(b.density(0.5, 1.5) == 0.0);

    // Year-wide window over a 0.05-year age slice: interior density is 20.
    const SmoothedBox thin(0.0, 1.0, 0.0, 0.05, 0.01, 0.0005);
    CHECK(thin.density(0.5, 0.025) == doctest::Approx(20.0).epsilon(1e-14));
}

TEST_CASE("density integrates to one") {
    const std::vector<SmoothedBox> boxes = {
        unit_box(),
        unit_box(0.0),
        SmoothedBox(0.0, 1.0, 0.0, 0.05, 0.01, 0.0005),
        SmoothedBox(1999.0, 2000.0, 4.0, 5.0, 0.01, 0.01),
        SmoothedBox(-3.0, 2.5, 0.5, 21.0, 1.0, 2.0),
    };
    for (const SmoothedBox& b : boxes) {
        const auto tk = b.t_kinks();
        const auto ak = b.a_kinks();
        const double mass = quad::adaptive_2d_panels(
            [&](double t, double a) { return b.density(t, a); }, b.t_support_lo(), b.t_support_hi(),
            b.a_support_lo(), b.a_support_hi(), std::vector<double>(tk.begin(), tk.end()),
            std::vector<double>(ak.begin(), ak.end()), 1e-10);
        CHECK(std::abs(mass - 1.0) < 1e-9);
    }
}

TEST_CASE("density is nonnegative everywhere") {
    Rng r(41);
    const SmoothedBox b(1999.0, 2000.0, 4.0, 5.0, 0.01, 0.01);
    for (int i = 0; i < 100000; ++i) {
        CHECK(b.density(r.uniform(1998.0, 2001.0), r.uniform(3.0, 6.0)) >= 0.0);
    }
}

TEST_CASE("time marginal matches the age-integrated density") {
    const SmoothedBox b(1999.0, 2000.0, 4.0, 5.0, 0.03, 0.01);
    CHECK(b.time_marginal(1999.5) == 1.0);
    CHECK(b.time_marginal(1998.9) == 0.0);
    const auto ak = b.a_kinks();
    Rng r(42);
    for (int i = 0; i < 50; ++i) {
        const double t = r.uniform(1998.9, 2000.1);
        const double integral = quad::adaptive_panels(
            [&](double a) { return b.density(t, a); }, b.a_support_lo(), b.a_support_hi(),
            std::vector<double>(ak.begin(), ak.end()), 1e-13);
        CHECK(std::abs(b.time_marginal(t) - integral) < 1e-12);
    }
    const auto tk = b.t_kinks();
    const double mass = quad::adaptive_panels([&](double t) { return b.time_marginal(t); },
                                              b.t_support_lo(), b.t_support_hi(),
                                              std::vector<double>(tk.begin(), tk.end()), 1e-12);
    CHECK(std::abs(mass - 1.0) < 1e-10);
}

TEST_CASE("draws stay inside the smeared support and hit both coordinates independently") {
    Rng r(43);
    const SmoothedBox b(1999.0, 2000.0, 4.0, 5.0, 0.01, 0.02);
    double sum_t = 0.0, sum_a = 0.0, sum_ta = 0.0;
    const int n = 100000;
    for (int i = 0; i < n; ++i) {
        const TimeAge p = b.sample(r);
        CHECK(p.t >= b.t_support_lo());
        CHECK(p.t <= b.t_support_hi());
        CHECK(p.a >= b.a_support_lo());
        CHECK(p.a <= b.a_support_hi());
        sum_t += p.t;
        sum_a += p.a;
        sum_ta += p.t * p.a;
    }
    const double mean_t = sum_t / n;
    const double mean_a = sum_a / n;
    // Symmetric profiles center the means; s.d. of each coordinate is ~0.29,
    // so a 4-sigma band on the mean is ~0.0037.
    CHECK(std::abs(mean_t - 1999.5) < 0.004);
    CHECK(std::abs(mean_a - 4.5) < 0.004);
    // Independence: covariance within 4 sigma of zero (sigma ~ 0.29^2/sqrt(n)).
    CHECK(std::abs(sum_ta / n - mean_t * mean_a) < 0.0011);
}

TEST_CASE("sampled coordinates match the trapezoid law") {
    Rng r(44);
    const int n = 100000;
    SUBCASE("smoothed edges") {
        const SmoothedBox b(0.0, 1.0, 2.0, 5.0, 0.2, 0.4);
        std::vector<double> ts, as;
        for (const TimeAge& p : b.sample(r, n)) {
            ts.push_back(p.t);
            as.push_back(p.a);
        }
        const double crit = test_support::ks_critical(0.01, n);
        CHECK(test_support::ks_statistic(ts, [](double x) { return trapezoid_cdf(x, 0.0, 1.0, 0.2); }) < crit);
        CHECK(test_support::ks_statistic(as, [](double x) { return trapezoid_cdf(x, 2.0, 5.0, 0.4); }) < crit);
    }
    SUBCASE("zero edge is uniform") {
        const SmoothedBox b = unit_box(0.0);
        std::vector<double> ts;
        for (const TimeAge& p : b.sample(r, n)) ts.push_back(p.t);
        CHECK(test_support::ks_statistic(ts, [](double x) { return std::min(std::max(x, 0.0), 1.0); }) <
              test_support::ks_critical(0.01, n));
    }
}

TEST_CASE("time marginal sampling matches the t-coordinate law") {
    Rng r(45);
    const SmoothedBox b(1999.0, 2000.0, 4.0, 5.0, 0.3, 0.01);
    const int n = 100000;
    std::vector<double> ts(n);
    for (double& t : ts) t = b.sample_time(r);
    CHECK(test_support::ks_statistic(ts, [](double x) { return trapezoid_cdf(x, 1999.0, 2000.0, 0.3); }) <
          test_support::ks_critical(0.01, n));
}

TEST_CASE("sampling is deterministic under a fixed stream") {
    const SmoothedBox b = unit_box();
    Rng a(77);
    Rng c(77);
    for (int i = 0; i < 100; ++i) {
        const TimeAge pa = b.sample(a);
        const TimeAge pc = b.sample(c);
        CHECK(pa.t == pc.t);
        CHECK(pa.a == pc.a);
    }
}
