#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <string>
#include <variant>
#include <vector>

#include "serofit/errors.hpp"
#include "serofit/fastmath.hpp"

// Force of infection models and their survival machinery.
//
// Both models are separable sinusoid-in-time hazards. Survival along a birth
// cohort's characteristic has a closed form: the time integral of a sine over
// an age segment collapses to a midpoint sine times a sinc factor, which stays
// well conditioned as the frequency approaches zero, so no small-frequency
// branch is needed on the reference path.
//
// cumulative_hazard is the trusted reference (standard library math, segment
// loop). HazardPlan precomputes per-parameter prefix sums so the estimator
// loops evaluate the same hazard with two argument reductions and three
// polynomial kernels per call; the two paths agree to ~1e-13 and that
// agreement is enforced by tests.
//
// Ages at or below zero mean "not born yet at the observation time": the
// hazard is zero and survival is certain. Rate evaluation itself stays
// strict, since a negative age is meaningless for a rate lookup.

namespace serofit {

struct ToyFoi {
    double gamma = 0.0;
    double amplitude = 20.0;
    double offset = 1.1;
};

struct AgeModulatedFoi {
    std::vector<double> breakpoints; // k+1 ascending band edges, first edge 0
    std::vector<double> alpha;       // k per-band rate levels
    double gamma1 = 0.0;
    double gamma2 = 0.0;
    double gamma3 = 0.0;
};

using ForceOfInfection = std::variant<ToyFoi, AgeModulatedFoi>;

// Throws InvariantViolation unless the model guarantees a nonnegative rate
// over its whole domain.
void validate(const ForceOfInfection& foi);

// Upper end of the supported age range (infinity for ToyFoi).
double max_age(const ForceOfInfection& foi);

// Instantaneous rate at calendar time t and age a. Bands are right-closed:
// ages in (a_{i-1}, a_i] take level alpha_i, and age 0 takes alpha_1.
// Throws AgeOutOfDomain when a falls outside the band range.
double foi_eval(const ForceOfInfection& foi, double t, double a);

// Integral of the rate along the characteristic through (t, a), from birth
// at time t-a up to age a. Zero for a <= 0. Throws AgeOutOfDomain when a
// exceeds the band range.
double cumulative_hazard(const ForceOfInfection& foi, double t, double a);

// Probability of still being susceptible at (t, a) and its logarithm.
double log_q(const ForceOfInfection& foi, double t, double a);
double q_exact(const ForceOfInfection& foi, double t, double a);

namespace detail {

inline double sinc(double x) {
    if (std::abs(x) < 1e-4) {
        const double z = x * x;
        return 1.0 - z / 6.0 * (1.0 - z / 20.0);
    }
    return fastmath::sin(x) / x;
}

// Frequencies this small make the closed band form ill conditioned (the
// cosine differences cancel to O(gamma1)); the segment loop takes over.
inline constexpr double kBandPlanMinGamma1 = 1e-3;

double band_hazard_reference(const AgeModulatedFoi& foi, double t, double a);

} // namespace detail

// Per-parameter survival evaluator for the estimator hot loops.
//
// For the band model, the hazard along a characteristic is a prefix sum over
// full bands plus one partial band. With phase phi = gamma1*(t-a) + gamma2
// constant along the characteristic, the trig part of every full band is a
// fixed linear combination of cos(phi) and sin(phi), so the prefix sums
// collapse into per-band coefficients u, v, w computed once per parameter
// vector.
class HazardPlan {
public:
    explicit HazardPlan(const ForceOfInfection& foi) {
        if (const auto* toy = std::get_if<ToyFoi>(&foi)) {
            plan_ = ToyPlan{toy->gamma, toy->amplitude, toy->offset};
            return;
        }
        const auto& band = std::get<AgeModulatedFoi>(foi);
        BandPlan p;
        p.model = band;
        p.one_plus_gamma3 = 1.0 + band.gamma3;
        p.segment_loop = band.gamma1 < detail::kBandPlanMinGamma1;
        if (!p.segment_loop) {
            p.inv_gamma1 = 1.0 / band.gamma1;
            const std::size_t k = band.alpha.size();
            p.u.resize(k);
            p.v.resize(k);
            p.w.resize(k);
            double acc_u = 0.0, acc_v = 0.0, acc_w = 0.0;
            double c_prev = std::cos(band.gamma1 * band.breakpoints[0]);
            double s_prev = std::sin(band.gamma1 * band.breakpoints[0]);
            for (std::size_t m = 0; m < k; ++m) {
                const double al = band.alpha[m];
                p.u[m] = acc_u + al * c_prev;
                p.v[m] = acc_v + al * s_prev;
                p.w[m] = acc_w - al * band.breakpoints[m];
                const double c_next = std::cos(band.gamma1 * band.breakpoints[m + 1]);
                const double s_next = std::sin(band.gamma1 * band.breakpoints[m + 1]);
                acc_u += al * (c_prev - c_next);
                acc_v += al * (s_prev - s_next);
                acc_w += al * (band.breakpoints[m + 1] - band.breakpoints[m]);
                c_prev = c_next;
                s_prev = s_next;
            }
        }
        plan_ = std::move(p);
    }

    double hazard(double t, double a) const {
        if (a <= 0.0) return 0.0;
        if (const auto* toy = std::get_if<ToyPlan>(&plan_)) {
            const double half = 0.5 * toy->gamma * a;
            const double mid = fastmath::sin(toy->gamma * (t - 0.5 * a));
            return toy->amplitude * a * (toy->offset + mid * detail::sinc(half));
        }
        const auto& p = std::get<BandPlan>(plan_);
        const std::vector<double>& edges = p.model.breakpoints;
        if (a > edges.back()) {
            throw AgeOutOfDomain("age " + std::to_string(a) + " beyond the last band edge " +
                                 std::to_string(edges.back()));
        }
        if (p.segment_loop) return detail::band_hazard_reference(p.model, t, a);
        std::size_t m = 1;
        while (a > edges[m]) ++m;
        const std::size_t i = m - 1;
        const double phi = p.model.gamma1 * (t - a) + p.model.gamma2;
        const double psi = p.model.gamma1 * t + p.model.gamma2;
        const auto [sin_phi, cos_phi] = fastmath::sincos(phi);
        const double cos_psi = fastmath::cos(psi);
        return p.one_plus_gamma3 * (p.w[i] + p.model.alpha[i] * a) +
               (p.u[i] * cos_phi - p.v[i] * sin_phi - p.model.alpha[i] * cos_psi) * p.inv_gamma1;
    }

    double log_q(double t, double a) const { return -hazard(t, a); }

    double max_age() const {
        if (std::holds_alternative<ToyPlan>(plan_)) return std::numeric_limits<double>::infinity();
        return std::get<BandPlan>(plan_).model.breakpoints.back();
    }

private:
    struct ToyPlan {
        double gamma;
        double amplitude;
        double offset;
    };
    struct BandPlan {
        AgeModulatedFoi model;
        std::vector<double> u, v, w; // per-band prefix coefficients
        double one_plus_gamma3 = 1.0;
        double inv_gamma1 = 0.0;
        bool segment_loop = false;
    };
    std::variant<ToyPlan, BandPlan> plan_;
};

} // namespace serofit
