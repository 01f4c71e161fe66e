#include "serofit/foi.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace serofit {

namespace {

// Standard-library twin of detail::sinc, kept separate so the reference path
// never depends on the fast kernels it is used to check.
double sinc_ref(double x) {
    if (std::abs(x) < 1e-4) {
        const double z = x * x;
        return 1.0 - z / 6.0 * (1.0 - z / 20.0);
    }
    return std::sin(x) / x;
}

// Right-closed band lookup; callers have already range-checked a.
std::size_t band_index(const std::vector<double>& edges, double a) {
    std::size_t m = 1;
    while (a > edges[m]) ++m;
    return m - 1;
}

double toy_hazard(const ToyFoi& foi, double t, double a) {
    const double half = 0.5 * foi.gamma * a;
    const double mid = std::sin(foi.gamma * (t - 0.5 * a));
    return foi.amplitude * a * (foi.offset + mid * sinc_ref(half));
}

[[noreturn]] void throw_age(double a, const std::vector<double>& edges) {
    throw AgeOutOfDomain("age " + std::to_string(a) + " outside the band range [" +
                         std::to_string(edges.front()) + ", " + std::to_string(edges.back()) + "]");
}

} // namespace

namespace detail {

double band_hazard_reference(const AgeModulatedFoi& foi, double t, double a) {
    // Age s runs 0..a along the characteristic, at calendar time t - a + s.
    // Each band contributes its sine integral in midpoint-times-sinc form.
    const double phi = foi.gamma1 * (t - a) + foi.gamma2;
    double acc = 0.0;
    for (std::size_t i = 0; i < foi.alpha.size(); ++i) {
        const double s0 = foi.breakpoints[i];
        if (s0 >= a) break;
        const double s1 = std::min(foi.breakpoints[i + 1], a);
        const double len = s1 - s0;
        const double mid = std::sin(phi + foi.gamma1 * 0.5 * (s0 + s1));
        acc += foi.alpha[i] * len * (1.0 + foi.gamma3 + mid * sinc_ref(0.5 * foi.gamma1 * len));
    }
    return acc;
}

} // namespace detail

void validate(const ForceOfInfection& foi) {
    if (const auto* toy = std::get_if<ToyFoi>(&foi)) {
        if (!(toy->amplitude >= 0.0)) throw InvariantViolation("toy amplitude must be nonnegative");
        if (!(toy->offset >= 1.0)) throw InvariantViolation("toy offset below 1 allows a negative rate");
        if (!(toy->gamma >= 0.0)) throw InvariantViolation("toy frequency must be nonnegative");
        return;
    }
    const auto& band = std::get<AgeModulatedFoi>(foi);
    if (band.breakpoints.size() < 2) throw InvariantViolation("band model needs at least one band");
    if (band.alpha.size() + 1 != band.breakpoints.size()) {
        throw InvariantViolation("band model needs one level per band");
    }
    if (band.breakpoints.front() != 0.0) throw InvariantViolation("first band edge must be age 0");
    for (std::size_t i = 0; i + 1 < band.breakpoints.size(); ++i) {
        if (!(band.breakpoints[i] < band.breakpoints[i + 1])) {
            throw InvariantViolation("band edges must be strictly increasing");
        }
    }
    for (double al : band.alpha) {
        if (!(al >= 0.0)) throw InvariantViolation("band levels must be nonnegative");
    }
    if (!(band.gamma1 >= 0.0)) throw InvariantViolation("gamma1 must be nonnegative");
    if (!std::isfinite(band.gamma2)) throw InvariantViolation("gamma2 must be finite");
    if (!(band.gamma3 >= 0.0)) throw InvariantViolation("gamma3 below 0 allows a negative rate");
}

double max_age(const ForceOfInfection& foi) {
    if (std::holds_alternative<ToyFoi>(foi)) return std::numeric_limits<double>::infinity();
    return std::get<AgeModulatedFoi>(foi).breakpoints.back();
}

double foi_eval(const ForceOfInfection& foi, double t, double a) {
    if (const auto* toy = std::get_if<ToyFoi>(&foi)) {
        (void)a;
        return toy->amplitude * (std::sin(toy->gamma * t) + toy->offset);
    }
    const auto& band = std::get<AgeModulatedFoi>(foi);
    if (a < band.breakpoints.front() || a > band.breakpoints.back()) throw_age(a, band.breakpoints);
    const std::size_t i = band_index(band.breakpoints, a);
    return band.alpha[i] * (std::sin(band.gamma1 * t + band.gamma2) + 1.0 + band.gamma3);
}

double cumulative_hazard(const ForceOfInfection& foi, double t, double a) {
    if (a <= 0.0) return 0.0;
    if (const auto* toy = std::get_if<ToyFoi>(&foi)) return toy_hazard(*toy, t, a);
    const auto& band = std::get<AgeModulatedFoi>(foi);
    if (a > band.breakpoints.back()) throw_age(a, band.breakpoints);
    return detail::band_hazard_reference(band, t, a);
}

double log_q(const ForceOfInfection& foi, double t, double a) {
    return -cumulative_hazard(foi, t, a);
}

double q_exact(const ForceOfInfection& foi, double t, double a) {
    return std::exp(-cumulative_hazard(foi, t, a));
}

} // namespace serofit
