#include "serofit/mcmc.hpp"

#include <cmath>
#include <limits>
#include <numbers>

#include "serofit/errors.hpp"

namespace serofit {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr double kTwoPi = 2.0 * std::numbers::pi;

void wrap_angle(std::vector<double>& theta, int index) {
    if (index < 0) return;
    double v = std::fmod(theta[static_cast<std::size_t>(index)], kTwoPi);
    if (v < 0.0) v += kTwoPi;
    if (v >= kTwoPi) v = 0.0;
    theta[static_cast<std::size_t>(index)] = v;
}

// min{1, exp(log_ratio)} with dead states handled explicitly: a dead proposal
// is never accepted, and a finite proposal always rescues a dead current state.
double acceptance_probability(double proposal_target, double current_target) {
    if (proposal_target == kNegInf) return 0.0;
    if (current_target == kNegInf) return 1.0;
    const double log_ratio = proposal_target - current_target;
    return log_ratio >= 0.0 ? 1.0 : std::exp(log_ratio);
}

}  // namespace

double Chain::acceptance_rate(long burn_in) const {
    long hits = 0;
    long total = 0;
    for (std::size_t n = static_cast<std::size_t>(burn_in); n < accepted.size(); ++n) {
        hits += accepted[n];
        ++total;
    }
    return total > 0 ? static_cast<double>(hits) / static_cast<double>(total) : 0.0;
}

double AptResult::swap_acceptance_rate() const {
    long hits = 0;
    long total = 0;
    for (std::size_t n = static_cast<std::size_t>(burn_in); n < swap_accepted.size(); ++n) {
        hits += swap_accepted[n];
        ++total;
    }
    return total > 0 ? static_cast<double>(hits) / static_cast<double>(total) : 0.0;
}

Chain pm_rwm(const TargetModel& model, std::vector<double> theta0, long iterations, double scale,
             Rng& rng) {
    if (iterations < 1) throw InvariantViolation("sampler needs at least one iteration");
    if (!(scale > 0.0)) throw InvariantViolation("proposal scale must be positive");
    const std::size_t dim = theta0.size();
    double lp = model.log_prior(theta0);
    if (!(lp > kNegInf)) throw InvariantViolation("initial state outside the prior support");
    double ll = model.log_likelihood(theta0, rng);

    Chain chain;
    chain.theta.reserve(static_cast<std::size_t>(iterations));
    chain.log_like.reserve(static_cast<std::size_t>(iterations));
    chain.accepted.reserve(static_cast<std::size_t>(iterations));
    chain.scale_trace.assign(static_cast<std::size_t>(iterations), scale);

    std::vector<double> proposal(dim);
    for (long n = 0; n < iterations; ++n) {
        for (std::size_t d = 0; d < dim; ++d) proposal[d] = theta0[d] + scale * rng.normal();
        wrap_angle(proposal, model.angle_index);
        bool take = false;
        const double lpp = model.log_prior(proposal);
        if (lpp > kNegInf) {
            const double llp = model.log_likelihood(proposal, rng);
            const double alpha = acceptance_probability(llp + lpp, ll + lp);
            take = rng.uniform01() < alpha;
            if (take) {
                theta0 = proposal;
                ll = llp;
                lp = lpp;
            }
        }
        chain.theta.push_back(theta0);
        chain.log_like.push_back(ll);
        chain.accepted.push_back(take ? 1 : 0);
    }
    return chain;
}

AptResult apt(const TargetModel& model, std::vector<double> theta0, long levels, long iterations,
              long burn_in, double initial_scale, std::uint64_t seed) {
    if (levels < 2) throw InvariantViolation("tempering needs at least two levels");
    if (iterations < 1) throw InvariantViolation("sampler needs at least one iteration");
    if (burn_in < 0 || burn_in >= iterations) throw InvariantViolation("burn-in out of range");
    if (!(initial_scale > 0.0)) throw InvariantViolation("proposal scale must be positive");
    const std::size_t L = static_cast<std::size_t>(levels);
    const std::size_t dim = theta0.size();

    const double lp0 = model.log_prior(theta0);
    if (!(lp0 > kNegInf)) throw InvariantViolation("initial state outside the prior support");

    std::vector<Rng> level_rng;
    level_rng.reserve(L);
    for (std::size_t l = 0; l < L; ++l) level_rng.push_back(Rng::derive(seed, {1, l}));
    Rng swap_rng = Rng::derive(seed, {2});

    std::vector<std::vector<double>> state(L, theta0);
    std::vector<double> ll(L), lp(L, lp0), sigma(L, initial_scale);
    for (std::size_t l = 0; l < L; ++l) ll[l] = model.log_likelihood(state[l], level_rng[l]);

    // Inverse temperatures start at 1/beta = 1, 2, 4, ...; adaptation moves the
    // log of each gap in 1/beta, so the ladder stays strictly decreasing.
    std::vector<double> gap(L - 1);
    for (std::size_t l = 0; l + 1 < L; ++l) gap[l] = std::ldexp(1.0, static_cast<int>(l));
    std::vector<double> beta(L, 1.0);
    const auto rebuild_beta = [&] {
        double inv = 1.0;
        for (std::size_t l = 0; l + 1 < L; ++l) {
            inv += gap[l];
            beta[l + 1] = 1.0 / inv;
        }
    };
    rebuild_beta();

    AptResult out;
    out.levels.resize(L);
    out.burn_in = burn_in;
    for (std::size_t l = 0; l < L; ++l) {
        out.levels[l].seed = seed;
        out.levels[l].theta.reserve(static_cast<std::size_t>(iterations));
        out.levels[l].log_like.reserve(static_cast<std::size_t>(iterations));
        out.levels[l].accepted.reserve(static_cast<std::size_t>(iterations));
        out.levels[l].scale_trace.reserve(static_cast<std::size_t>(iterations));
    }
    out.beta_trace.reserve(static_cast<std::size_t>(iterations));
    out.swap_pair.reserve(static_cast<std::size_t>(iterations));
    out.swap_eta.reserve(static_cast<std::size_t>(iterations));
    out.swap_accepted.reserve(static_cast<std::size_t>(iterations));

    std::vector<double> proposal(dim);
    std::vector<std::uint8_t> moved(L);
    for (long n = 1; n <= iterations; ++n) {
        const double step = std::pow(static_cast<double>(n), -0.6);
        for (std::size_t l = 0; l < L; ++l) {
            for (std::size_t d = 0; d < dim; ++d)
                proposal[d] = state[l][d] + sigma[l] * level_rng[l].normal();
            wrap_angle(proposal, model.angle_index);
            double alpha = 0.0;
            bool take = false;
            const double lpp = model.log_prior(proposal);
            if (lpp > kNegInf) {
                const double llp = model.log_likelihood(proposal, level_rng[l]);
                const double prop_target = llp == kNegInf ? kNegInf : beta[l] * llp + lpp;
                const double cur_target = ll[l] == kNegInf ? kNegInf : beta[l] * ll[l] + lp[l];
                alpha = acceptance_probability(prop_target, cur_target);
                take = level_rng[l].uniform01() < alpha;
                if (take) {
                    state[l] = proposal;
                    ll[l] = llp;
                    lp[l] = lpp;
                }
            }
            sigma[l] *= std::exp(step * (alpha - 0.1));
            moved[l] = take ? 1 : 0;
        }

        // One attempted exchange between a uniformly chosen adjacent pair; the
        // stored estimators travel with their states.
        std::size_t pick = static_cast<std::size_t>(swap_rng.uniform01() * static_cast<double>(L - 1));
        if (pick >= L - 1) pick = L - 2;
        double eta;
        if (ll[pick] == kNegInf && ll[pick + 1] == kNegInf) {
            eta = 1.0;
        } else {
            const double log_eta = (beta[pick] - beta[pick + 1]) * (ll[pick + 1] - ll[pick]);
            eta = log_eta >= 0.0 ? 1.0 : std::exp(log_eta);
        }
        const bool exchanged = swap_rng.uniform01() < eta;
        if (exchanged) {
            std::swap(state[pick], state[pick + 1]);
            std::swap(ll[pick], ll[pick + 1]);
            std::swap(lp[pick], lp[pick + 1]);
        }
        gap[pick] *= std::exp(step * (eta - 0.234));
        rebuild_beta();

        for (std::size_t l = 0; l < L; ++l) {
            out.levels[l].theta.push_back(state[l]);
            out.levels[l].log_like.push_back(ll[l]);
            out.levels[l].accepted.push_back(moved[l]);
            out.levels[l].scale_trace.push_back(sigma[l]);
        }
        out.beta_trace.push_back(beta);
        out.swap_pair.push_back(static_cast<long>(pick));
        out.swap_eta.push_back(eta);
        out.swap_accepted.push_back(exchanged ? 1 : 0);
    }
    return out;
}

}  // namespace serofit
