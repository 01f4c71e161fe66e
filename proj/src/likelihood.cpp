#include "serofit/likelihood.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "serofit/cohort.hpp"
#include "serofit/errors.hpp"
#include "serofit/fastmath.hpp"
#include "serofit/quadrature.hpp"

namespace serofit {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr double kTwoPi = 2.0 * std::numbers::pi;

bool same_box(const SmoothedBox& a, const SmoothedBox& b) {
    return a.t_lo() == b.t_lo() && a.t_hi() == b.t_hi() && a.a_lo() == b.a_lo() &&
           a.a_hi() == b.a_hi() && a.edge_t() == b.edge_t() && a.edge_a() == b.edge_a();
}

}  // namespace

void validate(const SeroDataset& dataset) {
    for (const Subsample& s : dataset.subsamples) {
        if (s.tested < 1) throw InvariantViolation("subsample needs at least one individual");
        if (s.susceptible < 0 || s.susceptible > s.tested)
            throw InvariantViolation("susceptible count out of range");
    }
    for (std::size_t i = 0; i < dataset.subsamples.size(); ++i)
        for (std::size_t j = i + 1; j < dataset.subsamples.size(); ++j)
            if (same_box(dataset.subsamples[i].box, dataset.subsamples[j].box))
                throw InvariantViolation("duplicate subsample box");
}

double Prior::log_density(double x) const {
    switch (kind) {
        case Kind::exponential:
            return x > 0.0 ? std::log(a) - a * x : kNegInf;
        case Kind::uniform:
            return (x >= a && x <= b) ? -std::log(b - a) : kNegInf;
        case Kind::uniform_angle:
            return (x >= 0.0 && x < kTwoPi) ? -std::log(kTwoPi) : kNegInf;
    }
    return kNegInf;
}

double Prior::sample(Rng& rng) const {
    switch (kind) {
        case Kind::exponential:
            return rng.exponential(a);
        case Kind::uniform:
            return rng.uniform(a, b);
        case Kind::uniform_angle:
            return rng.uniform(0.0, kTwoPi);
    }
    return 0.0;
}

double log_prior(std::span<const double> theta, const PriorSpec& spec) {
    if (theta.size() != spec.size()) throw InvariantViolation("parameter dimension mismatch");
    double acc = 0.0;
    for (std::size_t i = 0; i < spec.size(); ++i) {
        const double term = spec[i].log_density(theta[i]);
        if (term == kNegInf) return kNegInf;
        acc += term;
    }
    return acc;
}

std::vector<double> sample_prior(const PriorSpec& spec, Rng& rng) {
    std::vector<double> theta;
    theta.reserve(spec.size());
    for (const Prior& p : spec) theta.push_back(p.sample(rng));
    return theta;
}

int angle_index(const PriorSpec& spec) {
    for (std::size_t i = 0; i < spec.size(); ++i)
        if (spec[i].kind == Prior::Kind::uniform_angle) return static_cast<int>(i);
    return -1;
}

double log1m_exp(double x) {
    if (x >= 0.0) return kNegInf;
    if (x > -std::numbers::ln2) return std::log(-std::expm1(x));
    return std::log1p(-std::exp(x));
}

double p_reference(const ForceOfInfection& foi, const SmoothedBox& box) {
    const auto tk = box.t_kinks();
    const auto ak = box.a_kinks();
    std::vector<double> a_marks(ak.begin(), ak.end());
    a_marks.push_back(0.0);
    if (const auto* band = std::get_if<AgeModulatedFoi>(&foi))
        a_marks.insert(a_marks.end(), band->breakpoints.begin(), band->breakpoints.end());
    return quad::adaptive_2d_panels(
        [&](double t, double a) { return box.density(t, a) * q_exact(foi, t, a); },
        box.t_support_lo(), box.t_support_hi(), box.a_support_lo(), box.a_support_hi(),
        std::vector<double>(tk.begin(), tk.end()), a_marks, 1e-10);
}

double log_p_hat(const ForceOfInfection& foi, const SmoothedBox& box, long draws, Rng& rng) {
    if (draws < 1) throw InvariantViolation("estimator needs at least one draw");
    const HazardPlan plan(foi);
    std::vector<double> exponents;
    exponents.reserve(static_cast<std::size_t>(draws));
    double top = kNegInf;
    for (long m = 0; m < draws; ++m) {
        const TimeAge s = box.sample(rng);
        const double e = -plan.hazard(s.t, s.a);
        exponents.push_back(e);
        top = std::max(top, e);
    }
    double sum = 0.0;
    for (double e : exponents) sum += fastmath::exp(e - top);
    return top + std::log(sum) - std::log(static_cast<double>(draws));
}

double log_likelihood_hat(const ForceOfInfection& foi, const SeroDataset& dataset,
                          const LikelihoodSolver& solver, long draws, Rng& rng) {
    if (dataset.subsamples.empty()) return 0.0;
    const CohortSolver* cohort = std::get_if<CohortSolver>(&solver);
    CohortGrid grid;
    if (cohort) {
        std::vector<SmoothedBox> boxes;
        boxes.reserve(dataset.subsamples.size());
        for (const Subsample& s : dataset.subsamples) boxes.push_back(s.box);
        grid = make_grid(cohort->epsilon, boxes);
    }
    double acc = 0.0;
    for (const Subsample& s : dataset.subsamples) {
        for (long i = 0; i < s.tested; ++i) {
            double lp;
            if (cohort) {
                const double p = p_cohort_mc(foi, grid, s.box, draws, rng);
                lp = p > 0.0 ? std::log(p) : kNegInf;
            } else {
                lp = log_p_hat(foi, s.box, draws, rng);
            }
            acc += i < s.susceptible ? lp : log1m_exp(lp);
        }
    }
    return acc;
}

double log_likelihood_ref(const ForceOfInfection& foi, const SeroDataset& dataset) {
    double acc = 0.0;
    for (const Subsample& s : dataset.subsamples) {
        const double p = p_reference(foi, s.box);
        acc += static_cast<double>(s.susceptible) * std::log(p) +
               static_cast<double>(s.tested - s.susceptible) * log1m_exp(std::log(p));
    }
    return acc;
}

}  // namespace serofit
