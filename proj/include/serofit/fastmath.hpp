#pragma once

#include <bit>
#include <cmath>
#include <cstdint>

// Self-contained sin/cos/exp for the estimator hot loops.
//
// Likelihood estimation spends nearly all of its time evaluating hazard
// exponents, which cost two trig calls and one exp each. These kernels use
// Cody-Waite argument reduction against compile-time split constants plus
// Taylor polynomials carried far enough that truncation sits below double
// rounding error (checked against the standard library in tests). Keeping
// them in-repo also makes seeded runs independent of the host libm.
//
// Valid ranges: |x| <= 1e6 for sin/cos (plenty for phases gamma*t with
// calendar-year t), full double range for exp. Accuracy ~1 ulp.

namespace serofit::fastmath {

namespace detail {

// Zero the low 27 mantissa bits so that products with integers below 2^26
// are exact.
constexpr double chop27(double x) {
    return std::bit_cast<double>(std::bit_cast<std::uint64_t>(x) & ~((1ull << 27) - 1));
}

inline constexpr long double kPiOver2L = 1.57079632679489661923132169163975144L;
inline constexpr long double kLn2L = 0.693147180559945309417232121458176568L;

inline constexpr double kP1 = chop27(static_cast<double>(kPiOver2L));
inline constexpr double kP2 = chop27(static_cast<double>(kPiOver2L - kP1));
inline constexpr double kP3 = static_cast<double>(kPiOver2L - kP1 - kP2);
inline constexpr double kL1 = chop27(static_cast<double>(kLn2L));
inline constexpr double kL2 = static_cast<double>(kLn2L - kL1);
inline constexpr double kTwoOverPi = static_cast<double>(1.0L / kPiOver2L);
inline constexpr double kInvLn2 = static_cast<double>(1.0L / kLn2L);

// Adding then subtracting 1.5*2^52 rounds to the nearest integer for
// |value| < 2^51 under round-to-nearest-even.
inline constexpr double kRoundMagic = 6755399441055744.0;

// sin(r)/cos(r)/exp(r) on the reduced ranges |r| <= pi/4 resp. |r| <= ln2/2.

inline double kernel_sin(double r) {
    const double z = r * r;
    double p = -1.0 / 1307674368000.0;
    p = 1.0 / 6227020800.0 + z * p;
    p = -1.0 / 39916800.0 + z * p;
    p = 1.0 / 362880.0 + z * p;
    p = -1.0 / 5040.0 + z * p;
    p = 1.0 / 120.0 + z * p;
    p = -1.0 / 6.0 + z * p;
    return r + r * z * p;
}

inline double kernel_cos(double r) {
    const double z = r * r;
    double p = 1.0 / 20922789888000.0;
    p = -1.0 / 87178291200.0 + z * p;
    p = 1.0 / 479001600.0 + z * p;
    p = -1.0 / 3628800.0 + z * p;
    p = 1.0 / 40320.0 + z * p;
    p = -1.0 / 720.0 + z * p;
    p = 1.0 / 24.0 + z * p;
    return 1.0 - z * (0.5 - z * p);
}

inline double kernel_exp(double r) {
    double p = 1.0 / 6227020800.0;
    p = 1.0 / 479001600.0 + r * p;
    p = 1.0 / 39916800.0 + r * p;
    p = 1.0 / 3628800.0 + r * p;
    p = 1.0 / 362880.0 + r * p;
    p = 1.0 / 40320.0 + r * p;
    p = 1.0 / 5040.0 + r * p;
    p = 1.0 / 720.0 + r * p;
    p = 1.0 / 120.0 + r * p;
    p = 1.0 / 24.0 + r * p;
    p = 1.0 / 6.0 + r * p;
    p = 0.5 + r * p;
    return 1.0 + r * (1.0 + r * p);
}

struct Reduced {
    double r;
    std::int64_t k;
};

inline Reduced reduce_pi_over_2(double x) {
    const double t = x * kTwoOverPi + kRoundMagic;
    const double kd = t - kRoundMagic;
    const double r = ((x - kd * kP1) - kd * kP2) - kd * kP3;
    return {r, static_cast<std::int64_t>(kd)};
}

inline double pow2(int k) {
    return std::bit_cast<double>(static_cast<std::uint64_t>(1023 + k) << 52);
}

} // namespace detail

struct SinCos {
    double sin;
    double cos;
};

inline SinCos sincos(double x) {
    const auto [r, k] = detail::reduce_pi_over_2(x);
    const double s = detail::kernel_sin(r);
    const double c = detail::kernel_cos(r);
    switch (k & 3) {
        case 0: return {s, c};
        case 1: return {c, -s};
        case 2: return {-s, -c};
        default: return {-c, s};
    }
}

inline double sin(double x) {
    const auto [r, k] = detail::reduce_pi_over_2(x);
    switch (k & 3) {
        case 0: return detail::kernel_sin(r);
        case 1: return detail::kernel_cos(r);
        case 2: return -detail::kernel_sin(r);
        default: return -detail::kernel_cos(r);
    }
}

inline double cos(double x) {
    const auto [r, k] = detail::reduce_pi_over_2(x);
    switch (k & 3) {
        case 0: return detail::kernel_cos(r);
        case 1: return -detail::kernel_sin(r);
        case 2: return -detail::kernel_cos(r);
        default: return detail::kernel_sin(r);
    }
}

inline double exp(double x) {
    if (x < -745.0) return 0.0;
    if (!(x < 709.0)) return std::exp(x); // overflow range and NaN forwarded
    const double t = x * detail::kInvLn2 + detail::kRoundMagic;
    const double kd = t - detail::kRoundMagic;
    const int k = static_cast<int>(kd);
    const double r = (x - kd * detail::kL1) - kd * detail::kL2;
    const double p = detail::kernel_exp(r);
    if (k >= -1021) return p * detail::pow2(k);
    return (p * detail::pow2(-1021)) * detail::pow2(k + 1021);
}

} // namespace serofit::fastmath
