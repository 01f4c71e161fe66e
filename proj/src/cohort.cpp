#include "serofit/cohort.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "serofit/errors.hpp"
#include "serofit/fastmath.hpp"
#include "serofit/quadrature.hpp"

namespace serofit {

namespace {

// Smallest cohort index whose birth time lies strictly above b.
long index_above(double b, double epsilon) {
    return static_cast<long>(std::floor(b / epsilon)) + 1;
}

// Largest cohort index whose birth time lies strictly below b.
long index_below(double b, double epsilon) {
    return static_cast<long>(std::ceil(b / epsilon)) - 1;
}

// Cohorts whose post-birth characteristic passes through the open box support.
// Ages below zero never count towards participation: a cohort born after the
// last time at which the box can see age zero has no observable overlap.
struct IndexWindow {
    long lo;
    long hi;
    bool empty() const { return lo > hi; }
};

IndexWindow participating(const SmoothedBox& box, double epsilon) {
    const double a_floor = std::max(box.a_support_lo(), 0.0);
    return {index_above(box.t_support_lo() - box.a_support_hi(), epsilon),
            index_below(box.t_support_hi() - a_floor, epsilon)};
}

}  // namespace

CohortGrid make_grid(double epsilon, std::span<const SmoothedBox> boxes) {
    if (!(epsilon > 0.0) || !std::isfinite(epsilon))
        throw InvariantViolation("cohort width must be positive and finite");
    if (boxes.empty()) throw InvariantViolation("cohort grid needs at least one box");
    double t_lo_min = boxes[0].t_support_lo();
    double t_hi_max = boxes[0].t_support_hi();
    double a_hi_max = boxes[0].a_support_hi();
    for (const SmoothedBox& box : boxes) {
        t_lo_min = std::min(t_lo_min, box.t_support_lo());
        t_hi_max = std::max(t_hi_max, box.t_support_hi());
        a_hi_max = std::max(a_hi_max, box.a_support_hi());
    }
    CohortGrid grid;
    grid.epsilon = epsilon;
    grid.i_min = static_cast<long>(std::ceil((t_lo_min - a_hi_max - epsilon) / epsilon));
    grid.i_max = static_cast<long>(std::floor((t_hi_max + epsilon) / epsilon));
    if (grid.i_min > grid.i_max) throw InvariantViolation("cohort window is empty");
    return grid;
}

double cohort_mass(const ForceOfInfection& foi, double birth_time, double epsilon, double t) {
    if (t < birth_time) throw TimeBeforeBirth("cohort mass queried before birth");
    return epsilon * std::exp(-cumulative_hazard(foi, t, t - birth_time));
}

double p_cohort_det(const ForceOfInfection& foi, const CohortGrid& grid, const SmoothedBox& box) {
    const double eps = grid.epsilon;
    const IndexWindow need = participating(box, eps);
    if (need.empty()) return 0.0;
    if (need.lo < grid.i_min || need.hi > grid.i_max)
        throw GridTooNarrow("cohort grid does not cover the box");

    const HazardPlan plan(foi);
    const double t_lo = box.t_support_lo();
    const double t_hi = box.t_support_hi();
    const auto tk = box.t_kinks();
    const auto ak = box.a_kinks();
    std::vector<double> age_marks(ak.begin(), ak.end());
    if (const auto* band = std::get_if<AgeModulatedFoi>(&foi))
        age_marks.insert(age_marks.end(), band->breakpoints.begin(), band->breakpoints.end());
    else
        age_marks.push_back(0.0);

    std::vector<double> marks;
    marks.reserve(tk.size() + age_marks.size());
    double total = 0.0;
    for (long i = need.lo; i <= need.hi; ++i) {
        const double x = grid.birth_time(i);
        const double lo = std::max(t_lo, x + box.a_support_lo());
        const double hi = std::min(t_hi, x + box.a_support_hi());
        if (!(hi > lo)) continue;
        marks.assign(tk.begin(), tk.end());
        for (double a : age_marks) marks.push_back(x + a);
        total += quad::adaptive_panels(
            [&](double t) {
                const double w = box.density(t, t - x);
                if (w == 0.0) return 0.0;
                return w * eps * fastmath::exp(-plan.hazard(t, t - x));
            },
            lo, hi, marks, 1e-12);
    }
    return total;
}

double p_cohort_mc(const ForceOfInfection& foi, const CohortGrid& grid, const SmoothedBox& box,
                   long draws, Rng& rng) {
    if (draws < 1) throw InvariantViolation("cohort Monte Carlo needs at least one draw");
    const double eps = grid.epsilon;
    IndexWindow part = participating(box, eps);
    part.lo = std::max(part.lo, grid.i_min);
    part.hi = std::min(part.hi, grid.i_max);

    const HazardPlan plan(foi);
    // The time-trapezoid weight cancels between box.density and time_marginal,
    // so each draw reduces to the age weight alone: no division, no 0/0 at the
    // support boundary.
    const double scale = box.norm() * (box.t_hi() - box.t_lo());
    const double a_lo = box.a_lo();
    const double a_hi = box.a_hi();
    const double edge_a = box.edge_a();
    double acc = 0.0;
    for (long m = 0; m < draws; ++m) {
        const double t = box.sample_time(rng);
        const long ilo = std::max(part.lo, index_above(t - box.a_support_hi(), eps));
        const long ihi = std::min(part.hi, index_below(t - box.a_support_lo(), eps));
        double inner = 0.0;
        for (long i = ilo; i <= ihi; ++i) {
            const double x = eps * static_cast<double>(i);
            const double w = trapezoid_eval(t - x, a_lo, a_hi, edge_a);
            if (w == 0.0) continue;
            inner += w * eps * fastmath::exp(-plan.hazard(t, t - x));
        }
        acc += inner;
    }
    return scale * acc / static_cast<double>(draws);
}

}  // namespace serofit
