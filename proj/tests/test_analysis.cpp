#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <vector>

#include "serofit/analysis.hpp"
#include "serofit/likelihood.hpp"
#include "serofit/rng.hpp"

using namespace serofit;

namespace {

Chain chain_from(const std::vector<std::vector<double>>& draws) {
    Chain chain;
    chain.theta = draws;
    chain.log_like.assign(draws.size(), 0.0);
    chain.accepted.assign(draws.size(), true);
    chain.scale_trace.assign(draws.size(), 1.0);
    return chain;
}

std::vector<double> random_sample(Rng& rng, std::size_t n, double lo, double hi) {
    std::vector<double> out(n);
    for (auto& v : out) v = lo + (hi - lo) * rng.uniform01();
    return out;
}

}  // namespace

TEST_CASE("distance between identical samples is zero") {
    std::vector<double> a{1.0, 2.0, 3.0};
    CHECK(wasserstein_1d(a, a) == 0.0);
    std::vector<double> shuffled{3.0, 1.0, 2.0};
    CHECK(wasserstein_1d(a, shuffled) == 0.0);
}

TEST_CASE("distance between point masses is their separation") {
    std::vector<double> zero{0.0};
    for (double c : {1.5, -2.25, 1e-8}) {
        std::vector<double> other{c};
        CHECK(wasserstein_1d(zero, other) == doctest::Approx(std::fabs(c)).epsilon(1e-15));
    }
}

TEST_CASE("distance matches the sorted matching on equal sizes") {
    std::vector<double> a{0.0, 2.0};
    std::vector<double> b{1.0, 3.0};
    CHECK(wasserstein_1d(a, b) == doctest::Approx(1.0).epsilon(1e-15));

    Rng rng(21);
    for (int rep = 0; rep < 30; ++rep) {
        auto x = random_sample(rng, 64, -3.0, 5.0);
        auto y = random_sample(rng, 64, -1.0, 7.0);
        auto xs = x, ys = y;
        std::sort(xs.begin(), xs.end());
        std::sort(ys.begin(), ys.end());
        double matching = 0.0;
        for (std::size_t i = 0; i < xs.size(); ++i) matching += std::fabs(xs[i] - ys[i]);
        matching /= double(xs.size());
        CHECK(wasserstein_1d(x, y) == doctest::Approx(matching).epsilon(1e-12));
    }
}

TEST_CASE("distance handles unequal sample sizes exactly") {
    // {0,1} vs {0,1,2}: F differs by 1/6 on [0,1) and by 1/3 on [1,2).
    std::vector<double> a{0.0, 1.0};
    std::vector<double> b{0.0, 1.0, 2.0};
    CHECK(wasserstein_1d(a, b) == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(wasserstein_1d(b, a) == doctest::Approx(0.5).epsilon(1e-15));
}

TEST_CASE("distance obeys metric axioms on random samples") {
    Rng rng(33);
    for (int rep = 0; rep < 25; ++rep) {
        auto a = random_sample(rng, 40, -2.0, 2.0);
        auto b = random_sample(rng, 50, -1.0, 3.0);
        auto c = random_sample(rng, 30, 0.0, 4.0);
        const double ab = wasserstein_1d(a, b);
        const double bc = wasserstein_1d(b, c);
        const double ac = wasserstein_1d(a, c);
        CHECK(ab >= 0.0);
        CHECK(wasserstein_1d(b, a) == doctest::Approx(ab).epsilon(1e-14));
        CHECK(ac <= ab + bc + 1e-12);
    }
}

TEST_CASE("translation shifts the distance by the offset") {
    Rng rng(34);
    for (double shift : {0.75, -1.5, 3.0}) {
        auto a = random_sample(rng, 100, 0.0, 1.0);
        auto moved = a;
        for (auto& v : moved) v += shift;
        CHECK(wasserstein_1d(a, moved) == doctest::Approx(std::fabs(shift)).epsilon(1e-12));
    }
}

TEST_CASE("distance rejects empty samples") {
    std::vector<double> a{1.0};
    std::vector<double> none;
    CHECK_THROWS_AS((void)wasserstein_1d(a, none), EmptySample);
    CHECK_THROWS_AS((void)wasserstein_1d(none, a), EmptySample);
}

TEST_CASE("autocorrelation of white noise stays inside the noise band") {
    Rng rng(55);
    const std::size_t n = 20000;
    std::vector<double> x(n);
    for (auto& v : x) v = rng.normal();
    const auto r = acf(x, 10);
    REQUIRE(r.size() == 11);
    CHECK(r[0] == 1.0);
    for (std::size_t k = 1; k < r.size(); ++k) CHECK(std::fabs(r[k]) < 4.0 / std::sqrt(double(n)));
}

TEST_CASE("autocorrelation recovers the AR(1) coefficient") {
    Rng rng(56);
    const std::size_t n = 100000;
    std::vector<double> x(n);
    double state = 0.0;
    for (auto& v : x) {
        state = 0.9 * state + rng.normal();
        v = state;
    }
    const auto r = acf(x, 3);
    CHECK(r[1] == doctest::Approx(0.9).epsilon(0.025));
    CHECK(r[2] == doctest::Approx(0.81).epsilon(0.05));
}

TEST_CASE("autocorrelation error paths") {
    std::vector<double> constant(100, 3.5);
    CHECK_THROWS_AS((void)acf(constant, 5), DegenerateVariance);
    std::vector<double> shorty{1.0, 2.0, 3.0};
    CHECK_THROWS_AS((void)acf(shorty, 3), LagTooLarge);
    CHECK_THROWS_AS((void)acf(shorty, -1), InvariantViolation);
    CHECK_NOTHROW((void)acf(shorty, 2));
}

TEST_CASE("summaries match a brute-force recount") {
    Rng rng(77);
    std::vector<std::vector<double>> draws;
    for (int i = 0; i < 100; ++i) draws.push_back({rng.uniform01() * 4.0, rng.normal()});
    const auto chain = chain_from(draws);
    const long burn = 20;
    const auto summary = summarize(chain, burn);
    REQUIRE(summary.size() == 2);

    for (std::size_t d = 0; d < 2; ++d) {
        std::vector<double> kept;
        for (std::size_t i = burn; i < draws.size(); ++i) kept.push_back(draws[i][d]);
        double mean = 0.0;
        for (double v : kept) mean += v;
        mean /= double(kept.size());
        double ss = 0.0;
        for (double v : kept) ss += (v - mean) * (v - mean);
        const double sd = std::sqrt(ss / double(kept.size() - 1));
        CHECK(summary[d].mean == doctest::Approx(mean).epsilon(1e-14));
        CHECK(summary[d].sd == doctest::Approx(sd).epsilon(1e-14));
        CHECK(summary[d].q025 == doctest::Approx(quantile(kept, 0.025)).epsilon(1e-14));
        CHECK(summary[d].q50 == doctest::Approx(quantile(kept, 0.50)).epsilon(1e-14));
        CHECK(summary[d].q975 == doctest::Approx(quantile(kept, 0.975)).epsilon(1e-14));
        CHECK(summary[d].q05 <= summary[d].q50);
        CHECK(summary[d].q50 <= summary[d].q95);
    }
}

TEST_CASE("summaries of a constant chain have zero spread") {
    std::vector<std::vector<double>> draws(50, std::vector<double>{2.5});
    const auto summary = summarize(chain_from(draws), 10);
    CHECK(summary[0].sd == 0.0);
    CHECK(summary[0].q025 == 2.5);
    CHECK(summary[0].q975 == 2.5);
    CHECK_THROWS_AS((void)summarize(chain_from(draws), 50), InvariantViolation);
}

TEST_CASE("quantile interpolation follows the documented rule") {
    std::vector<double> v{10.0, 20.0, 30.0, 40.0};
    CHECK(quantile(v, 0.0) == 10.0);
    CHECK(quantile(v, 1.0) == 40.0);
    CHECK(quantile(v, 0.5) == doctest::Approx(25.0).epsilon(1e-15));
    CHECK(quantile(v, 1.0 / 3.0) == doctest::Approx(20.0).epsilon(1e-12));
    CHECK_THROWS_AS((void)quantile({}, 0.5), EmptySample);
    CHECK_THROWS_AS((void)quantile(v, 1.5), InvariantViolation);
}

TEST_CASE("convergence orders are pairwise log ratios") {
    std::vector<double> halving{0.4, 0.2, 0.1};
    const auto orders = convergence_order(halving);
    REQUIRE(orders.size() == 2);
    CHECK(orders[0] == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(orders[1] == doctest::Approx(1.0).epsilon(1e-15));

    std::vector<double> table{0.394, 0.150};
    CHECK(convergence_order(table)[0] == doctest::Approx(1.393).epsilon(1e-3));

    std::vector<double> flat{0.4, 0.4};
    CHECK(convergence_order(flat)[0] == 0.0);

    std::vector<double> lone{0.4};
    CHECK_THROWS_AS((void)convergence_order(lone), InvariantViolation);
    std::vector<double> bad{0.4, 0.0};
    CHECK_THROWS_AS((void)convergence_order(bad), NonPositiveError);
    std::vector<double> negative{0.4, -0.1};
    CHECK_THROWS_AS((void)convergence_order(negative), NonPositiveError);
}

TEST_CASE("prediction bands collapse for a single retained draw") {
    const double pi = std::acos(-1.0);
    std::vector<std::vector<double>> draws{{pi}};
    const auto chain = chain_from(draws);
    std::vector<SmoothedBox> cells{SmoothedBox(0.0, 1.0, 0.0, 0.05, 0.01, 0.0005)};
    const auto to_foi = [](std::span<const double> th) {
        return ForceOfInfection{ToyFoi{th[0], 20.0, 1.1}};
    };
    const auto bands = predict_prevalence(chain, 0, to_foi, cells);
    REQUIRE(bands.size() == 1);
    const double p = p_reference(to_foi(draws[0]), cells[0]);
    CHECK(bands[0].susceptible_q05 == p);
    CHECK(bands[0].susceptible_q50 == p);
    CHECK(bands[0].susceptible_q95 == p);
    CHECK(bands[0].prevalence_q50 == doctest::Approx(1.0 - p).epsilon(1e-15));
}

TEST_CASE("a vanishing hazard draw predicts zero prevalence") {
    std::vector<std::vector<double>> draws{{1.0}};
    const auto chain = chain_from(draws);
    std::vector<SmoothedBox> cells{SmoothedBox(0.0, 1.0, 0.0, 0.05, 0.01, 0.0005)};
    const auto to_foi = [](std::span<const double> th) {
        return ForceOfInfection{ToyFoi{th[0], 0.0, 1.1}};
    };
    const auto bands = predict_prevalence(chain, 0, to_foi, cells);
    CHECK(std::fabs(bands[0].prevalence_q50) <= 1e-12);
    CHECK(std::fabs(bands[0].prevalence_q95) <= 1e-12);
}

TEST_CASE("prediction bands match a brute-force recount with duplicate draws") {
    Rng rng(88);
    std::vector<std::vector<double>> draws;
    double current = 2.0;
    for (int i = 0; i < 50; ++i) {
        if (rng.uniform01() < 0.6) current = 1.0 + 3.0 * rng.uniform01();
        draws.push_back({current});
    }
    const auto chain = chain_from(draws);
    std::vector<SmoothedBox> cells{SmoothedBox(0.0, 1.0, 0.0, 0.05, 0.01, 0.0005),
                                   SmoothedBox(2.0, 3.0, 0.0, 0.05, 0.01, 0.0005)};
    const auto to_foi = [](std::span<const double> th) {
        return ForceOfInfection{ToyFoi{th[0], 20.0, 1.1}};
    };
    const long burn = 10;
    const auto bands = predict_prevalence(chain, burn, to_foi, cells);

    for (std::size_t c = 0; c < cells.size(); ++c) {
        std::vector<double> ps;
        for (std::size_t i = burn; i < draws.size(); ++i)
            ps.push_back(p_reference(to_foi(draws[i]), cells[c]));
        CHECK(bands[c].susceptible_q05 == doctest::Approx(quantile(ps, 0.05)).epsilon(1e-13));
        CHECK(bands[c].susceptible_q50 == doctest::Approx(quantile(ps, 0.50)).epsilon(1e-13));
        CHECK(bands[c].susceptible_q95 == doctest::Approx(quantile(ps, 0.95)).epsilon(1e-13));
        CHECK(bands[c].prevalence_q05 == doctest::Approx(1.0 - quantile(ps, 0.95)).epsilon(1e-13));
    }
    CHECK_THROWS_AS((void)predict_prevalence(chain, 50, to_foi, cells), InvariantViolation);
}
