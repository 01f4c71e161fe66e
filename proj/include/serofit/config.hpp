#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "serofit/errors.hpp"
#include "serofit/likelihood.hpp"

namespace serofit {

/// Parsed experiment description. The text format is a strict INI dialect:
/// [section] headers, `key = value` pairs, `#` or `;` comments; unknown
/// sections or keys and duplicate keys are rejected with the offending line.
struct ModelConfig {
    enum class Kind { toy, varicella };
    Kind kind = Kind::toy;

    // toy: one free parameter modulating a sinusoid in time
    double amplitude = 20.0;
    double offset = 1.1;
    Prior prior_gamma{Prior::Kind::uniform, 0.0, 5.0};

    // varicella: age bands with a shared seasonal modulation
    std::vector<double> breakpoints{0.0, 3.0, 7.0, 15.0, 21.0};
    double epoch = 2000.0;
    Prior prior_alpha{Prior::Kind::exponential, 10.0, 0.0};
    Prior prior_gamma1{Prior::Kind::exponential, 0.8, 0.0};
    Prior prior_gamma2{Prior::Kind::uniform_angle, 0.0, 0.0};
    Prior prior_gamma3{Prior::Kind::exponential, 1.0, 0.0};
};

struct DesignConfig {
    // toy: unit-width time boxes [j-1, j] crossed with one narrow age band
    long boxes = 6;
    double age_width = 0.05;
    double edge_time = 0.01;
    double edge_age = 0.0005;

    // varicella: integer year x age cells
    long year_lo = 2000;
    long year_hi = 2004;
    long age_lo = 1;
    long age_hi = 19;

    long n_per_cell = 10;
};

struct TruthConfig {
    bool present = false;
    std::vector<double> theta;  // layout matches the model's parameter vector
};

struct SamplerConfig {
    enum class Algorithm { pm_rwm, apt };
    Algorithm algorithm = Algorithm::pm_rwm;
    long iterations = 100000;
    long burn_in = 10000;
    long draws = 500;
    double sigma0 = 0.5;
    long levels = 1;  // apt only
    std::uint64_t seed = 1;
};

struct SolverConfig {
    enum class Kind { exact, cohort };
    Kind kind = Kind::exact;
    double epsilon = 0.0;  // cohort only; cohorts_per_box maps to 1/epsilon
};

struct ConvergenceConfig {
    long k_max = 4;
    long runs = 5;
};

struct OutputConfig {
    std::string directory = "out";
};

struct ExperimentConfig {
    ModelConfig model;
    DesignConfig design;
    TruthConfig truth;
    SamplerConfig sampler;
    SolverConfig solver;
    ConvergenceConfig convergence;
    OutputConfig output;
};

/// Parse a prior token: "uniform(a,b)", "exponential(rate)" or
/// "uniform_angle". Throws InvariantViolation on malformed tokens.
Prior parse_prior(std::string_view token);

std::string format_prior(const Prior& prior);

/// Parse and validate a config file. Throws ParseError with the file path and
/// line number on syntax errors, unknown or duplicate keys, and any value
/// failing validation.
ExperimentConfig load_config(const std::string& path);

/// Same parser over in-memory text; `label` stands in for the path in errors.
ExperimentConfig parse_config_text(std::string_view text, const std::string& label);

/// Canonical text form; parsing it back yields an equivalent config.
std::string serialize_config(const ExperimentConfig& config);

}  // namespace serofit
