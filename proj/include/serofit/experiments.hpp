#pragma once

#include <string>
#include <vector>

#include "serofit/analysis.hpp"
#include "serofit/config.hpp"
#include "serofit/likelihood.hpp"
#include "serofit/mcmc.hpp"

namespace serofit {

/// Parameter vector layouts: toy = [gamma]; varicella = [alpha_1..alpha_B,
/// gamma1, gamma2, gamma3] with B age bands. The varicella seasonal phase is
/// anchored at the model epoch so the sampled phase stays identifiable.
ForceOfInfection foi_from_theta(const ModelConfig& model, std::span<const double> theta);

PriorSpec priors_for(const ModelConfig& model);

std::vector<std::string> parameter_names(const ModelConfig& model);

/// Unit-width observation windows [j-1, j] crossed with one narrow age band.
std::vector<SmoothedBox> toy_boxes(const DesignConfig& design);

/// One year x age cell [year, year+1] x [age, age+1] with smoothing edges.
SmoothedBox grid_cell(long year, long age, double edge_time, double edge_age);

struct CellIndex {
    long year = 0;
    long age = 0;
};

/// Row-major coordinates for the varicella design, years outer, ages inner.
std::vector<CellIndex> design_cells(const DesignConfig& design);

struct SyntheticIndividual {
    long box_index = 0;
    double time = 0.0;
    double age = 0.0;
    bool susceptible = false;
};

struct SyntheticData {
    SeroDataset dataset;
    std::vector<SyntheticIndividual> individuals;
};

/// Draw N individuals per box from its sampling window, mark each susceptible
/// with the exact survival probability at its (time, age), and aggregate.
SyntheticData generate_synthetic(std::span<const SmoothedBox> boxes, const ForceOfInfection& foi,
                                 long n_per_box, Rng& rng);

enum class Convention { seropositive_is_infected, seropositive_is_susceptible };

struct SeroCSVRecord {
    long year = 0;
    long age = 0;
    long n_tested = 0;
    long n_seropositive = 0;
};

/// Read `year,age,n_tested,n_seropositive` rows into a dataset of grid cells.
/// Under the default convention the susceptible count is tested minus
/// seropositive. Throws ParseError with the offending line, InvariantViolation
/// for an empty or inconsistent dataset.
SeroDataset load_serodata(const std::string& path, Convention convention,
                          double edge_time = 0.05, double edge_age = 0.05);

std::vector<SeroCSVRecord> read_sero_records(const std::string& path);

void write_sero_records(const std::string& path, std::span<const SeroCSVRecord> records);

/// Reference-versus-cohort posterior distances on the toy design, medians
/// over the configured number of runs; row k covers 2^k cohorts per box.
ConvergenceReport run_toy_convergence(const ExperimentConfig& config);

struct FitResult {
    bool used_apt = false;
    std::vector<Chain> chains;  // pm_rwm: one entry; apt: one per level, cold first
    AptResult tempering;        // populated when used_apt
    long burn_in = 0;
    std::vector<std::string> names;
    PriorSpec priors;
};

/// Run the configured sampler against a dataset. The replicate index selects
/// the random stream, so replicate r of the same config is itself a fixed,
/// reproducible experiment.
FitResult run_fit(const ExperimentConfig& config, const SeroDataset& dataset,
                  std::uint64_t replicate = 1);

struct HoldoutResult {
    FitResult fit;
    long holdout_year = 0;
    std::vector<CellIndex> cells;
    std::vector<double> observed_prevalence;
    std::vector<PrevalenceBand> bands;
    std::vector<bool> covered;
};

/// Fit on every year except the holdout, then band the held-out year's cells.
HoldoutResult run_holdout(const ExperimentConfig& config, const SeroDataset& dataset,
                          long holdout_year, std::uint64_t replicate = 1);

// CSV emitters; all floating-point fields use 17 significant digits.
void write_chain_csv(const std::string& path, const Chain& chain,
                     std::span<const std::string> names);
void write_summary_csv(const std::string& path, const Chain& chain,
                       std::span<const std::string> names, long burn_in);
void write_acf_csv(const std::string& path, const Chain& chain,
                   std::span<const std::string> names, long burn_in, long max_lag);
void write_convergence_csv(const std::string& path, const ConvergenceReport& report);
void write_temperature_csv(const std::string& path, const AptResult& tempering);
void write_prediction_csv(const std::string& path, const HoldoutResult& holdout);
void write_individuals_csv(const std::string& path, std::span<const SyntheticIndividual> individuals,
                           std::span<const CellIndex> cells);

/// Write every artifact of a fit under `directory` (chain_<level>.csv,
/// summary.csv, acf.csv, temperatures.csv when tempered).
void write_fit_outputs(const std::string& directory, const FitResult& fit);

}  // namespace serofit
