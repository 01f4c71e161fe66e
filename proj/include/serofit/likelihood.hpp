#pragma once

#include <span>
#include <variant>
#include <vector>

#include "serofit/foi.hpp"
#include "serofit/rng.hpp"
#include "serofit/sampling.hpp"

namespace serofit {

// One survey cell: tested individuals and how many were still susceptible
// (the "success" convention ties directly to the survival probability).
struct Subsample {
    SmoothedBox box;
    long tested = 0;
    long susceptible = 0;
};

struct SeroDataset {
    std::vector<Subsample> subsamples;
};

// Throws InvariantViolation for empty cells, count inversions, or duplicate boxes.
void validate(const SeroDataset& dataset);

struct Prior {
    enum class Kind { exponential, uniform, uniform_angle };
    Kind kind = Kind::uniform;
    double a = 0.0;  // rate for exponential, lower bound for uniform
    double b = 1.0;  // upper bound for uniform

    double log_density(double x) const;
    double sample(Rng& rng) const;
};

using PriorSpec = std::vector<Prior>;

double log_prior(std::span<const double> theta, const PriorSpec& spec);
std::vector<double> sample_prior(const PriorSpec& spec, Rng& rng);

// Index of the angular coordinate (wrapped modulo 2*pi by samplers), -1 if none.
int angle_index(const PriorSpec& spec);

// log(1 - exp(x)) for x <= 0 without cancellation; -inf for x >= 0.
double log1m_exp(double x);

// Kink-aware 2-D quadrature of box density times survival, abs tolerance 1e-10.
double p_reference(const ForceOfInfection& foi, const SmoothedBox& box);

// Log of the M-draw sample mean of survival over box draws; always finite,
// and its exponential is unbiased for p_reference.
double log_p_hat(const ForceOfInfection& foi, const SmoothedBox& box, long draws, Rng& rng);

// Which per-individual probability estimator the likelihood uses.
struct ExactSolver {};
struct CohortSolver {
    double epsilon = 0.25;
};
using LikelihoodSolver = std::variant<ExactSolver, CohortSolver>;

// Unbiased log-likelihood estimator: every individual gets an independent
// M-draw probability estimate, susceptibles contribute log p-hat and the
// rest log(1 - p-hat). Returns -inf when a factor vanishes (certain rejection).
double log_likelihood_hat(const ForceOfInfection& foi, const SeroDataset& dataset,
                          const LikelihoodSolver& solver, long draws, Rng& rng);

// Deterministic counterpart built from p_reference, for reference samplers.
double log_likelihood_ref(const ForceOfInfection& foi, const SeroDataset& dataset);

}  // namespace serofit
