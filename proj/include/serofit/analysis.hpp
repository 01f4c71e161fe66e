#pragma once

#include <functional>
#include <span>
#include <vector>

#include "serofit/errors.hpp"
#include "serofit/foi.hpp"
#include "serofit/mcmc.hpp"
#include "serofit/sampling.hpp"

namespace serofit {

/// Wasserstein-1 distance between the empirical measures of two samples,
/// computed as the exact integral of |F_a - F_b| over the merged support.
/// Throws EmptySample if either sample is empty.
double wasserstein_1d(std::span<const double> sample_a, std::span<const double> sample_b);

/// Autocorrelation function r_0..r_max_lag with the biased normalization
/// (covariances divided by n and by the lag-zero covariance). Throws
/// LagTooLarge unless the series is longer than max_lag, DegenerateVariance
/// for a constant series.
std::vector<double> acf(std::span<const double> values, long max_lag);

struct ComponentSummary {
    double mean = 0.0;
    double sd = 0.0;
    double q025 = 0.0;
    double q05 = 0.0;
    double q50 = 0.0;
    double q95 = 0.0;
    double q975 = 0.0;
};

/// Per-component summaries of the post-burn-in draws. Quantiles use linear
/// interpolation of order statistics at rank (n-1)q.
std::vector<ComponentSummary> summarize(const Chain& chain, long burn_in);

/// Quantile of a single sample with the same interpolation rule.
double quantile(std::vector<double> values, double q);

/// Pairwise log2 ratios of successive error magnitudes on a halving ladder;
/// element i is log2(errors[i] / errors[i+1]). Throws NonPositiveError when
/// any magnitude is not strictly positive, InvariantViolation for fewer than
/// two values.
std::vector<double> convergence_order(std::span<const double> errors);

/// One row of the cohort-resolution study: distances between the reference
/// posterior and the posterior at the given resolution.
struct ConvergenceRow {
    long cohorts_per_box = 0;
    double w1 = 0.0;
    double order = 0.0;
    double mean_diff = 0.0;
    double sd_diff = 0.0;
};

struct ConvergenceReport {
    std::vector<ConvergenceRow> rows;
};

struct PrevalenceBand {
    double susceptible_q05 = 0.0;
    double susceptible_q50 = 0.0;
    double susceptible_q95 = 0.0;
    double prevalence_q05 = 0.0;
    double prevalence_q50 = 0.0;
    double prevalence_q95 = 0.0;
};

/// Posterior bands for the susceptible fraction and the seroprevalence of
/// each cell: for every post-burn-in draw the cell probability is evaluated
/// through `to_foi` and p_reference, and the draws' quantiles are reported.
/// Consecutive duplicate draws (rejected proposals) are collapsed into
/// weights so each distinct parameter value is solved once.
std::vector<PrevalenceBand> predict_prevalence(
    const Chain& chain, long burn_in,
    const std::function<ForceOfInfection(std::span<const double>)>& to_foi,
    std::span<const SmoothedBox> cells);

}  // namespace serofit
