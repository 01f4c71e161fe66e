#pragma once

#include <span>

#include "serofit/foi.hpp"
#include "serofit/rng.hpp"
#include "serofit/sampling.hpp"

namespace serofit {

// Birth-cohort grid: cohort i is born at x_i = i * epsilon, so index 0 always
// sits at time zero and consecutive births are exactly epsilon apart.
struct CohortGrid {
    double epsilon = 0.0;
    long i_min = 0;
    long i_max = -1;

    double birth_time(long i) const { return epsilon * static_cast<double>(i); }
    long count() const { return i_max >= i_min ? i_max - i_min + 1 : 0; }
};

// Builds the smallest grid whose birth times span every characteristic that
// can intersect any of the boxes, with one spare cohort of slack on each side.
CohortGrid make_grid(double epsilon, std::span<const SmoothedBox> boxes);

// Mass carried by the cohort born at birth_time, observed at time t >= birth_time:
// epsilon times the survival along its characteristic. Exactly epsilon at birth.
// Throws TimeBeforeBirth for t < birth_time.
double cohort_mass(const ForceOfInfection& foi, double birth_time, double epsilon, double t);

// Deterministic evaluation of the aggregated probability carried by the cohort
// measure: for each cohort whose characteristic meets the box support, integrate
// box.density(t, t - x_i) * mass over the box's time window, splitting panels at
// every density kink and at every time the cohort's age crosses a kink, age zero,
// or a rate breakpoint. Throws GridTooNarrow if the grid misses a needed cohort.
double p_cohort_det(const ForceOfInfection& foi, const CohortGrid& grid, const SmoothedBox& box);

// Monte Carlo counterpart: draws times from the box's time marginal and averages
// the cohort-sum weighted by 1 / time_marginal, which keeps the estimator
// unbiased for p_cohort_det for every box shape.
double p_cohort_mc(const ForceOfInfection& foi, const CohortGrid& grid, const SmoothedBox& box,
                   long draws, Rng& rng);

}  // namespace serofit
