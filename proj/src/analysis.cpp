#include "serofit/analysis.hpp"

#include <algorithm>
#include <cmath>

#include "serofit/likelihood.hpp"

namespace serofit {

namespace {

double interpolated_order_stat(std::span<const double> sorted, double h) {
    const auto lo = static_cast<std::size_t>(h);
    if (lo + 1 >= sorted.size()) return sorted.back();
    const double frac = h - static_cast<double>(lo);
    return sorted[lo] + frac * (sorted[lo + 1] - sorted[lo]);
}

// Order statistic of the sample expanded by integer weights, interpolated at
// fractional rank h.
double weighted_order_stat(const std::vector<std::pair<double, long>>& sorted, double h) {
    const auto pick = [&](long rank) {
        long seen = 0;
        for (const auto& [value, weight] : sorted) {
            seen += weight;
            if (rank < seen) return value;
        }
        return sorted.back().first;
    };
    const auto lo = static_cast<long>(h);
    const double frac = h - static_cast<double>(lo);
    const double a = pick(lo);
    if (frac == 0.0) return a;
    return a + frac * (pick(lo + 1) - a);
}

}  // namespace

double wasserstein_1d(std::span<const double> sample_a, std::span<const double> sample_b) {
    if (sample_a.empty() || sample_b.empty()) throw EmptySample("wasserstein_1d: empty sample");
    std::vector<double> a(sample_a.begin(), sample_a.end());
    std::vector<double> b(sample_b.begin(), sample_b.end());
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    const double na = static_cast<double>(a.size());
    const double nb = static_cast<double>(b.size());

    std::size_t i = 0, j = 0;
    double result = 0.0;
    double prev = std::min(a.front(), b.front());
    while (i < a.size() || j < b.size()) {
        const double x = j >= b.size() || (i < a.size() && a[i] <= b[j]) ? a[i] : b[j];
        result += std::fabs(static_cast<double>(i) / na - static_cast<double>(j) / nb) * (x - prev);
        prev = x;
        while (i < a.size() && a[i] == x) ++i;
        while (j < b.size() && b[j] == x) ++j;
    }
    return result;
}

std::vector<double> acf(std::span<const double> values, long max_lag) {
    const long n = static_cast<long>(values.size());
    if (max_lag < 0) throw InvariantViolation("acf: negative lag");
    if (n <= max_lag) throw LagTooLarge("acf: series length must exceed max_lag");
    double mean = 0.0;
    for (double v : values) mean += v;
    mean /= static_cast<double>(n);
    std::vector<double> cov(static_cast<std::size_t>(max_lag) + 1, 0.0);
    for (long k = 0; k <= max_lag; ++k) {
        double acc = 0.0;
        for (long i = 0; i + k < n; ++i) acc += (values[i] - mean) * (values[i + k] - mean);
        cov[k] = acc / static_cast<double>(n);
    }
    if (cov[0] == 0.0) throw DegenerateVariance("acf: constant series");
    std::vector<double> r(cov.size());
    for (std::size_t k = 0; k < cov.size(); ++k) r[k] = cov[k] / cov[0];
    return r;
}

double quantile(std::vector<double> values, double q) {
    if (values.empty()) throw EmptySample("quantile: empty sample");
    if (!(q >= 0.0 && q <= 1.0)) throw InvariantViolation("quantile: q outside [0,1]");
    std::sort(values.begin(), values.end());
    return interpolated_order_stat(values, q * static_cast<double>(values.size() - 1));
}

std::vector<ComponentSummary> summarize(const Chain& chain, long burn_in) {
    const long n = chain.iterations();
    if (burn_in < 0 || burn_in >= n) throw InvariantViolation("summarize: burn_in must precede the chain end");
    const std::size_t dim = chain.theta.front().size();
    const long kept = n - burn_in;
    std::vector<ComponentSummary> out(dim);
    std::vector<double> column(static_cast<std::size_t>(kept));
    for (std::size_t d = 0; d < dim; ++d) {
        double mean = 0.0;
        for (long i = burn_in; i < n; ++i) {
            column[static_cast<std::size_t>(i - burn_in)] = chain.theta[i][d];
            mean += chain.theta[i][d];
        }
        mean /= static_cast<double>(kept);
        double ss = 0.0;
        for (double v : column) ss += (v - mean) * (v - mean);
        std::sort(column.begin(), column.end());
        auto& s = out[d];
        s.mean = mean;
        s.sd = kept > 1 ? std::sqrt(ss / static_cast<double>(kept - 1)) : 0.0;
        const double top = static_cast<double>(kept - 1);
        s.q025 = interpolated_order_stat(column, 0.025 * top);
        s.q05 = interpolated_order_stat(column, 0.05 * top);
        s.q50 = interpolated_order_stat(column, 0.50 * top);
        s.q95 = interpolated_order_stat(column, 0.95 * top);
        s.q975 = interpolated_order_stat(column, 0.975 * top);
    }
    return out;
}

std::vector<double> convergence_order(std::span<const double> errors) {
    if (errors.size() < 2) throw InvariantViolation("convergence_order: need at least two magnitudes");
    for (double e : errors)
        if (!(e > 0.0)) throw NonPositiveError("convergence_order: magnitudes must be positive");
    std::vector<double> orders(errors.size() - 1);
    for (std::size_t i = 0; i + 1 < errors.size(); ++i)
        orders[i] = std::log2(errors[i] / errors[i + 1]);
    return orders;
}

std::vector<PrevalenceBand> predict_prevalence(
    const Chain& chain, long burn_in,
    const std::function<ForceOfInfection(std::span<const double>)>& to_foi,
    std::span<const SmoothedBox> cells) {
    const long n = chain.iterations();
    if (burn_in < 0 || burn_in >= n) throw InvariantViolation("predict_prevalence: no draws after burn_in");

    // Collapse runs of identical consecutive draws into weights.
    std::vector<std::pair<std::size_t, long>> distinct;  // (draw index, weight)
    for (long i = burn_in; i < n; ++i) {
        if (!distinct.empty() && chain.theta[static_cast<std::size_t>(i)] ==
                                     chain.theta[distinct.back().first])
            ++distinct.back().second;
        else
            distinct.emplace_back(static_cast<std::size_t>(i), 1);
    }

    const long total = n - burn_in;
    const double top = static_cast<double>(total - 1);
    std::vector<PrevalenceBand> bands(cells.size());
    std::vector<std::vector<std::pair<double, long>>> per_cell(cells.size());
    for (auto& v : per_cell) v.reserve(distinct.size());

    for (const auto& [index, weight] : distinct) {
        const auto foi = to_foi(chain.theta[index]);
        for (std::size_t c = 0; c < cells.size(); ++c)
            per_cell[c].emplace_back(p_reference(foi, cells[c]), weight);
    }
    for (std::size_t c = 0; c < cells.size(); ++c) {
        auto& vals = per_cell[c];
        std::sort(vals.begin(), vals.end());
        auto& band = bands[c];
        band.susceptible_q05 = weighted_order_stat(vals, 0.05 * top);
        band.susceptible_q50 = weighted_order_stat(vals, 0.50 * top);
        band.susceptible_q95 = weighted_order_stat(vals, 0.95 * top);
        band.prevalence_q05 = 1.0 - band.susceptible_q95;
        band.prevalence_q50 = 1.0 - band.susceptible_q50;
        band.prevalence_q95 = 1.0 - band.susceptible_q05;
    }
    return bands;
}

}  // namespace serofit
