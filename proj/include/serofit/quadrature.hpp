#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "serofit/errors.hpp"

// Gauss-Legendre quadrature with adaptive refinement.
//
// Nodes and weights are generated at startup by Newton iteration on the
// Legendre recurrence, so rules of any order are available without baked-in
// tables. Error estimates compare a 15-point rule against a 7-point rule on
// the same interval; intervals that miss the tolerance are bisected with the
// budget split between the halves.
//
// Integrands produced by survey sampling windows are piecewise smooth with
// known crease locations, so callers pass those as explicit panel
// boundaries and only smooth pieces ever reach the adaptive core.

namespace serofit::quad {

struct GaussRule {
    std::vector<double> x; // nodes on [-1, 1]
    std::vector<double> w;
};

namespace detail {

inline GaussRule make_rule(int n) {
    GaussRule r;
    r.x.resize(static_cast<std::size_t>(n));
    r.w.resize(static_cast<std::size_t>(n));
    const double pi = std::acos(-1.0);
    const int m = (n + 1) / 2;
    for (int i = 0; i < m; ++i) {
        double z = std::cos(pi * (i + 0.75) / (n + 0.5));
        double pp = 0.0;
        for (int it = 0; it < 64; ++it) {
            double p0 = 1.0;
            double p1 = 0.0;
            for (int j = 0; j < n; ++j) {
                const double p2 = p1;
                p1 = p0;
                p0 = ((2.0 * j + 1.0) * z * p1 - j * p2) / (j + 1.0);
            }
            pp = n * (z * p0 - p1) / (z * z - 1.0);
            const double dz = p0 / pp;
            z -= dz;
            if (std::abs(dz) < 1e-15) break;
        }
        r.x[static_cast<std::size_t>(i)] = -z;
        r.x[static_cast<std::size_t>(n - 1 - i)] = z;
        const double w = 2.0 / ((1.0 - z * z) * pp * pp);
        r.w[static_cast<std::size_t>(i)] = w;
        r.w[static_cast<std::size_t>(n - 1 - i)] = w;
    }
    return r;
}

} // namespace detail

inline const GaussRule& gauss7() {
    static const GaussRule r = detail::make_rule(7);
    return r;
}

inline const GaussRule& gauss15() {
    static const GaussRule r = detail::make_rule(15);
    return r;
}

template <class F>
double gauss(const F& f, double a, double b, const GaussRule& rule) {
    const double c = 0.5 * (a + b);
    const double h = 0.5 * (b - a);
    double acc = 0.0;
    for (std::size_t i = 0; i < rule.x.size(); ++i) {
        acc += rule.w[i] * f(c + h * rule.x[i]);
    }
    return acc * h;
}

template <class F>
double adaptive(const F& f, double a, double b, double abs_tol, int max_depth = 48) {
    const double fine = gauss(f, a, b, gauss15());
    if (b - a <= 8e-15 * std::max({std::abs(a), std::abs(b), 1.0})) return fine;
    const double coarse = gauss(f, a, b, gauss7());
    if (std::abs(fine - coarse) <= abs_tol) return fine;
    if (max_depth <= 0) throw QuadratureNonConvergence("interval refinement exhausted its depth budget");
    const double m = 0.5 * (a + b);
    return adaptive(f, a, m, 0.5 * abs_tol, max_depth - 1) +
           adaptive(f, m, b, 0.5 * abs_tol, max_depth - 1);
}

// Sorted boundary list lo = p_0 < ... < p_n = hi from the marks that fall
// strictly inside (lo, hi). Near-duplicates collapse to one boundary.
inline std::vector<double> panel_points(double lo, double hi, std::span<const double> marks) {
    std::vector<double> pts;
    pts.push_back(lo);
    std::vector<double> inner(marks.begin(), marks.end());
    std::sort(inner.begin(), inner.end());
    const double tol = 1e-12 * std::max({std::abs(lo), std::abs(hi), 1.0});
    for (double p : inner) {
        if (p <= lo + tol || p >= hi - tol) continue;
        if (p - pts.back() > tol) pts.push_back(p);
    }
    pts.push_back(hi);
    return pts;
}

template <class F>
double adaptive_panels(const F& f, double lo, double hi, std::span<const double> marks, double abs_tol) {
    if (!(hi > lo)) return 0.0;
    const std::vector<double> pts = panel_points(lo, hi, marks);
    double acc = 0.0;
    for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
        const double share = abs_tol * (pts[i + 1] - pts[i]) / (hi - lo);
        acc += adaptive(f, pts[i], pts[i + 1], share);
    }
    return acc;
}

struct Rect {
    double t0, t1;
    double a0, a1;
};

template <class F>
double gauss2(const F& f, const Rect& r, const GaussRule& rule) {
    const double ct = 0.5 * (r.t0 + r.t1);
    const double ht = 0.5 * (r.t1 - r.t0);
    const double ca = 0.5 * (r.a0 + r.a1);
    const double ha = 0.5 * (r.a1 - r.a0);
    double acc = 0.0;
    for (std::size_t i = 0; i < rule.x.size(); ++i) {
        const double t = ct + ht * rule.x[i];
        double row = 0.0;
        for (std::size_t j = 0; j < rule.x.size(); ++j) {
            row += rule.w[j] * f(t, ca + ha * rule.x[j]);
        }
        acc += rule.w[i] * row;
    }
    return acc * ht * ha;
}

template <class F>
double adaptive_2d(const F& f, const Rect& r, double abs_tol, int max_depth = 24) {
    const double fine = gauss2(f, r, gauss15());
    const double scale = std::max({std::abs(r.t0), std::abs(r.t1), std::abs(r.a0), std::abs(r.a1), 1.0});
    if (r.t1 - r.t0 <= 8e-15 * scale || r.a1 - r.a0 <= 8e-15 * scale) return fine;
    const double coarse = gauss2(f, r, gauss7());
    if (std::abs(fine - coarse) <= abs_tol) return fine;
    if (max_depth <= 0) throw QuadratureNonConvergence("rectangle refinement exhausted its depth budget");
    const double tm = 0.5 * (r.t0 + r.t1);
    const double am = 0.5 * (r.a0 + r.a1);
    const double share = 0.25 * abs_tol;
    return adaptive_2d(f, {r.t0, tm, r.a0, am}, share, max_depth - 1) +
           adaptive_2d(f, {tm, r.t1, r.a0, am}, share, max_depth - 1) +
           adaptive_2d(f, {r.t0, tm, am, r.a1}, share, max_depth - 1) +
           adaptive_2d(f, {tm, r.t1, am, r.a1}, share, max_depth - 1);
}

// 2-D integral over [t_lo, t_hi] x [a_lo, a_hi] with creases along the
// given coordinate lines. Each smooth cell gets an area-proportional share
// of the tolerance.
template <class F>
double adaptive_2d_panels(const F& f, double t_lo, double t_hi, double a_lo, double a_hi,
                          std::span<const double> t_marks, std::span<const double> a_marks,
                          double abs_tol) {
    if (!(t_hi > t_lo) || !(a_hi > a_lo)) return 0.0;
    const std::vector<double> tp = panel_points(t_lo, t_hi, t_marks);
    const std::vector<double> ap = panel_points(a_lo, a_hi, a_marks);
    const double total_area = (t_hi - t_lo) * (a_hi - a_lo);
    double acc = 0.0;
    for (std::size_t i = 0; i + 1 < tp.size(); ++i) {
        for (std::size_t j = 0; j + 1 < ap.size(); ++j) {
            const Rect cell{tp[i], tp[i + 1], ap[j], ap[j + 1]};
            const double share = abs_tol * (cell.t1 - cell.t0) * (cell.a1 - cell.a0) / total_area;
            acc += adaptive_2d(f, cell, share);
        }
    }
    return acc;
}

} // namespace serofit::quad
