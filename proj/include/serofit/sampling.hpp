#pragma once

#include <array>
#include <cmath>
#include <string>
#include <vector>

#include "serofit/errors.hpp"
#include "serofit/rng.hpp"

// Observation windows: uniform boxes in (time, age) with linear edge ramps.
//
// Each coordinate carries a trapezoid weight profile with unit area
// (plateau plus two half-width ramps integrates to exactly hi - lo), so the
// normalized joint density is the weight product divided by the rectangle
// area. Coordinates are independent and sampled by inverting the trapezoid
// CDF in closed form; a box draw always consumes the time coordinate first,
// which keeps seeded runs reproducible.

namespace serofit {

struct TimeAge {
    double t;
    double a;
};

namespace detail {

// Weight profile: 0 outside [lo-edge, hi+edge], 1 on [lo+edge, hi-edge],
// linear in between. A zero edge degenerates to the closed-box indicator.
inline double trapezoid_weight(double x, double lo, double hi, double edge) {
    if (edge == 0.0) return (x >= lo && x <= hi) ? 1.0 : 0.0;
    if (x <= lo - edge || x >= hi + edge) return 0.0;
    if (x >= lo + edge && x <= hi - edge) return 1.0;
    if (x < lo + edge) return (x - (lo - edge)) / (2.0 * edge);
    return ((hi + edge) - x) / (2.0 * edge);
}

// Inverse of the area-scaled CDF: y in [0, hi-lo) accumulated left to right.
inline double trapezoid_inverse(double y, double lo, double hi, double edge) {
    const double span = hi - lo;
    if (y < edge) return lo - edge + 2.0 * std::sqrt(edge * y);
    if (y <= span - edge) return lo + y;
    return hi + edge - 2.0 * std::sqrt(edge * (span - y));
}

inline void check_trapezoid(double lo, double hi, double edge) {
    if (!(lo < hi)) throw InvalidGeometry("interval [" + std::to_string(lo) + ", " +
                                          std::to_string(hi) + "] is empty");
    if (!(edge >= 0.0) || !(edge < 0.5 * (hi - lo))) {
        throw InvalidGeometry("edge half-width " + std::to_string(edge) +
                              " must lie in [0, half the interval length)");
    }
}

} // namespace detail

inline double trapezoid_eval(double x, double lo, double hi, double edge) {
    detail::check_trapezoid(lo, hi, edge);
    return detail::trapezoid_weight(x, lo, hi, edge);
}

class SmoothedBox {
public:
    SmoothedBox(double t_lo, double t_hi, double a_lo, double a_hi, double edge_t, double edge_a)
        : t_lo_(t_lo), t_hi_(t_hi), a_lo_(a_lo), a_hi_(a_hi), edge_t_(edge_t), edge_a_(edge_a),
          norm_(1.0 / ((t_hi - t_lo) * (a_hi - a_lo))) {
        detail::check_trapezoid(t_lo, t_hi, edge_t);
        detail::check_trapezoid(a_lo, a_hi, edge_a);
    }

    double t_lo() const { return t_lo_; }
    double t_hi() const { return t_hi_; }
    double a_lo() const { return a_lo_; }
    double a_hi() const { return a_hi_; }
    double edge_t() const { return edge_t_; }
    double edge_a() const { return edge_a_; }
    double norm() const { return norm_; }

    double t_support_lo() const { return t_lo_ - edge_t_; }
    double t_support_hi() const { return t_hi_ + edge_t_; }
    double a_support_lo() const { return a_lo_ - edge_a_; }
    double a_support_hi() const { return a_hi_ + edge_a_; }

    double density(double t, double a) const {
        return norm_ * detail::trapezoid_weight(t, t_lo_, t_hi_, edge_t_) *
               detail::trapezoid_weight(a, a_lo_, a_hi_, edge_a_);
    }

    // Exact t-marginal (the age trapezoid integrates out to a_hi - a_lo).
    double time_marginal(double t) const {
        return detail::trapezoid_weight(t, t_lo_, t_hi_, edge_t_) / (t_hi_ - t_lo_);
    }

    TimeAge sample(Rng& rng) const {
        const double t = detail::trapezoid_inverse(rng.uniform01() * (t_hi_ - t_lo_), t_lo_, t_hi_, edge_t_);
        const double a = detail::trapezoid_inverse(rng.uniform01() * (a_hi_ - a_lo_), a_lo_, a_hi_, edge_a_);
        return {t, a};
    }

    std::vector<TimeAge> sample(Rng& rng, std::size_t n) const {
        std::vector<TimeAge> out;
        out.reserve(n);
        for (std::size_t i = 0; i < n; ++i) out.push_back(sample(rng));
        return out;
    }

    double sample_time(Rng& rng) const {
        return detail::trapezoid_inverse(rng.uniform01() * (t_hi_ - t_lo_), t_lo_, t_hi_, edge_t_);
    }

    // Crease locations of the weight profiles, for quadrature panels.
    std::array<double, 4> t_kinks() const {
        return {t_lo_ - edge_t_, t_lo_ + edge_t_, t_hi_ - edge_t_, t_hi_ + edge_t_};
    }
    std::array<double, 4> a_kinks() const {
        return {a_lo_ - edge_a_, a_lo_ + edge_a_, a_hi_ - edge_a_, a_hi_ + edge_a_};
    }

private:
    double t_lo_, t_hi_, a_lo_, a_hi_;
    double edge_t_, edge_a_;
    double norm_;
};

} // namespace serofit
