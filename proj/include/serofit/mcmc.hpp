#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "serofit/rng.hpp"

namespace serofit {

// Target for the samplers: an unbiased log-likelihood estimator (fresh draws
// on every call) plus the log prior density. angle_index marks the coordinate
// that lives on [0, 2*pi) and is wrapped after each proposal.
struct TargetModel {
    std::function<double(std::span<const double>, Rng&)> log_likelihood;
    std::function<double(std::span<const double>)> log_prior;
    int angle_index = -1;
};

struct Chain {
    std::vector<std::vector<double>> theta;  // state after each iteration
    std::vector<double> log_like;            // estimator carried by that state
    std::vector<std::uint8_t> accepted;
    std::vector<double> scale_trace;         // proposal scale used at each iteration
    std::uint64_t seed = 0;

    long iterations() const { return static_cast<long>(theta.size()); }
    double acceptance_rate(long burn_in = 0) const;
};

// Pseudo-marginal random-walk Metropolis with a fixed isotropic normal
// proposal. The retained state keeps the estimator it was accepted with;
// only proposals draw fresh estimates.
Chain pm_rwm(const TargetModel& model, std::vector<double> theta0, long iterations, double scale,
             Rng& rng);

struct AptResult {
    std::vector<Chain> levels;                    // index 0 is the cold chain
    std::vector<std::vector<double>> beta_trace;  // inverse temperatures after each iteration
    std::vector<long> swap_pair;                  // lower level of the proposed swap
    std::vector<double> swap_eta;                 // its acceptance probability
    std::vector<std::uint8_t> swap_accepted;
    long burn_in = 0;

    double swap_acceptance_rate() const;  // past burn_in
};

// Adaptive parallel tempering: per-level random-walk moves against the
// likelihood tempered by beta (the prior is never tempered), one attempted
// swap per iteration, and diminishing-step adaptation of both the proposal
// scales (towards 10% acceptance) and the temperature gaps (towards 23.4%
// swap acceptance). Adaptation runs for the whole chain; burn_in is carried
// in the result for analysis to discard.
AptResult apt(const TargetModel& model, std::vector<double> theta0, long levels, long iterations,
              long burn_in, double initial_scale, std::uint64_t seed);

}  // namespace serofit
