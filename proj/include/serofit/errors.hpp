#pragma once

#include <stdexcept>
#include <string>

namespace serofit {

/// Age outside the domain of a force-of-infection function.
struct AgeOutOfDomain : std::domain_error {
    using std::domain_error::domain_error;
};

/// Invalid geometric parameters for a trapezoid or box.
struct InvalidGeometry : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

/// Cohort mass requested at a time earlier than the cohort's birth.
struct TimeBeforeBirth : std::domain_error {
    using std::domain_error::domain_error;
};

/// Cohort grid does not cover the support of an observation box.
struct GridTooNarrow : std::domain_error {
    using std::domain_error::domain_error;
};

/// Adaptive quadrature failed to reach the requested tolerance.
struct QuadratureNonConvergence : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Empty sample passed where at least one value is required.
struct EmptySample : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

/// Autocorrelation lag at or beyond the series length.
struct LagTooLarge : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

/// Zero sample variance where a normalization by variance is needed.
struct DegenerateVariance : std::domain_error {
    using std::domain_error::domain_error;
};

/// Non-positive value where a strictly positive one is required
/// (e.g. error magnitudes entering a log ratio).
struct NonPositiveError : std::domain_error {
    using std::domain_error::domain_error;
};

/// Violation of a documented data or configuration invariant.
struct InvariantViolation : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Malformed text input (CSV or config); carries the source line.
struct ParseError : std::runtime_error {
    ParseError(const std::string& path, long line, const std::string& what)
        : std::runtime_error(path + ":" + std::to_string(line) + ": " + what),
          line_number(line) {}
    long line_number;
};

} // namespace serofit
