#include "serofit/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace serofit {

namespace {

std::string fmt(double v) {
    char buffer[64];
    std::snprintf(buffer, sizeof(buffer), "%.17g", v);
    return buffer;
}

std::string trim(std::string_view text) {
    std::size_t lo = 0, hi = text.size();
    while (lo < hi && std::isspace(static_cast<unsigned char>(text[lo]))) ++lo;
    while (hi > lo && std::isspace(static_cast<unsigned char>(text[hi - 1]))) --hi;
    return std::string(text.substr(lo, hi - lo));
}

long parse_count(const std::string& path, long line, const std::string& token) {
    const char* begin = token.c_str();
    char* end = nullptr;
    const long v = std::strtol(begin, &end, 10);
    if (token.empty() || end == begin || *end != '\0')
        throw ParseError(path, line, "expected an integer, got '" + token + "'");
    return v;
}

std::ofstream open_for_write(const std::string& path) {
    std::ofstream out(path);
    if (!out) throw InvariantViolation("cannot open '" + path + "' for writing");
    return out;
}

LikelihoodSolver solver_from(const SolverConfig& solver) {
    if (solver.kind == SolverConfig::Kind::exact) return LikelihoodSolver{ExactSolver{}};
    return LikelihoodSolver{CohortSolver{solver.epsilon}};
}

TargetModel target_for(const ModelConfig& model, const SeroDataset& dataset,
                       const LikelihoodSolver& solver, long draws, const PriorSpec& priors) {
    TargetModel target;
    target.log_likelihood = [&model, &dataset, solver, draws](std::span<const double> theta,
                                                              Rng& rng) {
        return log_likelihood_hat(foi_from_theta(model, theta), dataset, solver, draws, rng);
    };
    target.log_prior = [&priors](std::span<const double> theta) { return log_prior(theta, priors); };
    target.angle_index = angle_index(priors);
    return target;
}

TargetModel reference_target(const ModelConfig& model, const SeroDataset& dataset,
                             const PriorSpec& priors) {
    TargetModel target;
    target.log_likelihood = [&model, &dataset](std::span<const double> theta, Rng&) {
        return log_likelihood_ref(foi_from_theta(model, theta), dataset);
    };
    target.log_prior = [&priors](std::span<const double> theta) { return log_prior(theta, priors); };
    target.angle_index = angle_index(priors);
    return target;
}

std::vector<double> component_after(const Chain& chain, long burn_in, std::size_t dim) {
    std::vector<double> out;
    out.reserve(static_cast<std::size_t>(chain.iterations() - burn_in));
    for (long i = burn_in; i < chain.iterations(); ++i) out.push_back(chain.theta[i][dim]);
    return out;
}

double median_of(std::vector<double> values) { return quantile(std::move(values), 0.5); }

}  // namespace

ForceOfInfection foi_from_theta(const ModelConfig& model, std::span<const double> theta) {
    if (model.kind == ModelConfig::Kind::toy) {
        if (theta.size() != 1) throw InvariantViolation("toy model takes one parameter");
        return ForceOfInfection{ToyFoi{theta[0], model.amplitude, model.offset}};
    }
    const std::size_t bands = model.breakpoints.size() - 1;
    if (theta.size() != bands + 3)
        throw InvariantViolation("varicella model takes one rate per band plus three shape parameters");
    std::vector<double> alphas(theta.begin(), theta.begin() + static_cast<long>(bands));
    const double gamma1 = theta[bands];
    // Fold the epoch into the phase so observation times can stay calendar
    // years while the phase parameter is referenced to the epoch.
    const double gamma2 = theta[bands + 1] - gamma1 * model.epoch;
    const double gamma3 = theta[bands + 2];
    return ForceOfInfection{AgeModulatedFoi{model.breakpoints, alphas, gamma1, gamma2, gamma3}};
}

PriorSpec priors_for(const ModelConfig& model) {
    if (model.kind == ModelConfig::Kind::toy) return {model.prior_gamma};
    PriorSpec priors;
    const std::size_t bands = model.breakpoints.size() - 1;
    for (std::size_t i = 0; i < bands; ++i) priors.push_back(model.prior_alpha);
    priors.push_back(model.prior_gamma1);
    priors.push_back(model.prior_gamma2);
    priors.push_back(model.prior_gamma3);
    return priors;
}

std::vector<std::string> parameter_names(const ModelConfig& model) {
    if (model.kind == ModelConfig::Kind::toy) return {"gamma"};
    std::vector<std::string> names;
    const std::size_t bands = model.breakpoints.size() - 1;
    for (std::size_t i = 0; i < bands; ++i) names.push_back("alpha_" + std::to_string(i + 1));
    names.push_back("gamma1");
    names.push_back("gamma2");
    names.push_back("gamma3");
    return names;
}

std::vector<SmoothedBox> toy_boxes(const DesignConfig& design) {
    std::vector<SmoothedBox> boxes;
    boxes.reserve(static_cast<std::size_t>(design.boxes));
    for (long j = 1; j <= design.boxes; ++j)
        boxes.emplace_back(static_cast<double>(j - 1), static_cast<double>(j), 0.0,
                           design.age_width, design.edge_time, design.edge_age);
    return boxes;
}

SmoothedBox grid_cell(long year, long age, double edge_time, double edge_age) {
    return SmoothedBox(static_cast<double>(year), static_cast<double>(year + 1),
                       static_cast<double>(age), static_cast<double>(age + 1), edge_time, edge_age);
}

std::vector<CellIndex> design_cells(const DesignConfig& design) {
    std::vector<CellIndex> cells;
    for (long year = design.year_lo; year <= design.year_hi; ++year)
        for (long age = design.age_lo; age <= design.age_hi; ++age) cells.push_back({year, age});
    return cells;
}

SyntheticData generate_synthetic(std::span<const SmoothedBox> boxes, const ForceOfInfection& foi,
                                 long n_per_box, Rng& rng) {
    if (n_per_box < 1) throw InvariantViolation("generate_synthetic: n_per_box must be at least 1");
    SyntheticData out;
    out.individuals.reserve(boxes.size() * static_cast<std::size_t>(n_per_box));
    for (std::size_t b = 0; b < boxes.size(); ++b) {
        long susceptible = 0;
        for (long i = 0; i < n_per_box; ++i) {
            const auto [t, a] = boxes[b].sample(rng);
            const bool stays = rng.uniform01() < q_exact(foi, t, a);
            susceptible += stays ? 1 : 0;
            out.individuals.push_back({static_cast<long>(b), t, a, stays});
        }
        out.dataset.subsamples.push_back({boxes[b], n_per_box, susceptible});
    }
    return out;
}

std::vector<SeroCSVRecord> read_sero_records(const std::string& path) {
    std::ifstream file(path);
    if (!file) throw ParseError(path, 0, "cannot open data file");
    std::string line;
    long line_no = 0;
    std::vector<SeroCSVRecord> records;
    bool saw_header = false;
    while (std::getline(file, line)) {
        ++line_no;
        const std::string body = trim(line);
        if (body.empty()) continue;
        std::vector<std::string> fields;
        std::istringstream stream(body);
        std::string item;
        while (std::getline(stream, item, ',')) fields.push_back(trim(item));
        if (!saw_header) {
            if (fields != std::vector<std::string>{"year", "age", "n_tested", "n_seropositive"})
                throw ParseError(path, line_no,
                                 "expected header 'year,age,n_tested,n_seropositive'");
            saw_header = true;
            continue;
        }
        if (fields.size() != 4) throw ParseError(path, line_no, "expected 4 comma-separated fields");
        SeroCSVRecord rec;
        rec.year = parse_count(path, line_no, fields[0]);
        rec.age = parse_count(path, line_no, fields[1]);
        rec.n_tested = parse_count(path, line_no, fields[2]);
        rec.n_seropositive = parse_count(path, line_no, fields[3]);
        if (rec.age < 0) throw ParseError(path, line_no, "age must be non-negative");
        if (rec.n_tested < 1) throw ParseError(path, line_no, "n_tested must be at least 1");
        if (rec.n_seropositive < 0 || rec.n_seropositive > rec.n_tested)
            throw ParseError(path, line_no, "n_seropositive must lie in [0, n_tested]");
        records.push_back(rec);
    }
    if (!saw_header) throw ParseError(path, 0, "missing header line");
    if (records.empty()) throw InvariantViolation(path + ": no data rows");
    return records;
}

SeroDataset load_serodata(const std::string& path, Convention convention, double edge_time,
                          double edge_age) {
    const auto records = read_sero_records(path);
    SeroDataset dataset;
    for (const auto& rec : records) {
        const long susceptible = convention == Convention::seropositive_is_infected
                                     ? rec.n_tested - rec.n_seropositive
                                     : rec.n_seropositive;
        dataset.subsamples.push_back(
            {grid_cell(rec.year, rec.age, edge_time, edge_age), rec.n_tested, susceptible});
    }
    validate(dataset);
    return dataset;
}

void write_sero_records(const std::string& path, std::span<const SeroCSVRecord> records) {
    auto out = open_for_write(path);
    out << "year,age,n_tested,n_seropositive\n";
    for (const auto& rec : records)
        out << rec.year << "," << rec.age << "," << rec.n_tested << "," << rec.n_seropositive
            << "\n";
}

ConvergenceReport run_toy_convergence(const ExperimentConfig& config) {
    if (config.model.kind != ModelConfig::Kind::toy)
        throw InvariantViolation("toy convergence study needs the toy model");
    if (!config.truth.present)
        throw InvariantViolation("toy convergence study needs [truth] gamma");

    const auto boxes = toy_boxes(config.design);
    const auto truth_foi = foi_from_theta(config.model, config.truth.theta);
    Rng data_rng(Rng::derive(config.sampler.seed, {1}));
    const auto synthetic =
        generate_synthetic(boxes, truth_foi, config.design.n_per_cell, data_rng);
    const SeroDataset& data = synthetic.dataset;

    const auto priors = priors_for(config.model);
    const long K = config.convergence.k_max;
    const long R = config.convergence.runs;
    const long burn = config.sampler.burn_in;

    // chain 0 samples the reference posterior by deterministic MH, chain k+1
    // the 2^k cohorts-per-box one by the pseudo-marginal sampler
    std::vector<std::vector<double>> w1(static_cast<std::size_t>(R));
    std::vector<std::vector<double>> mean_diff(static_cast<std::size_t>(R));
    std::vector<std::vector<double>> sd_diff(static_cast<std::size_t>(R));
    for (long r = 1; r <= R; ++r) {
        std::vector<std::vector<double>> marginals;
        std::vector<double> means, sds;
        for (long chain_id = 0; chain_id <= K + 1; ++chain_id) {
            const LikelihoodSolver solver =
                chain_id == 0
                    ? LikelihoodSolver{ExactSolver{}}
                    : LikelihoodSolver{CohortSolver{1.0 / static_cast<double>(1L << (chain_id - 1))}};
            const auto target = chain_id == 0
                                    ? reference_target(config.model, data, priors)
                                    : target_for(config.model, data, solver, config.sampler.draws, priors);
            Rng rng(Rng::derive(config.sampler.seed,
                                {2, static_cast<std::uint64_t>(r), static_cast<std::uint64_t>(chain_id)}));
            auto theta0 = sample_prior(priors, rng);
            const auto chain = pm_rwm(target, theta0, config.sampler.iterations,
                                      config.sampler.sigma0, rng);
            marginals.push_back(component_after(chain, burn, 0));
            const auto summary = summarize(chain, burn);
            means.push_back(summary[0].mean);
            sds.push_back(summary[0].sd);
        }
        auto& w1_r = w1[static_cast<std::size_t>(r - 1)];
        auto& mean_r = mean_diff[static_cast<std::size_t>(r - 1)];
        auto& sd_r = sd_diff[static_cast<std::size_t>(r - 1)];
        for (long k = 0; k <= K; ++k) {
            w1_r.push_back(wasserstein_1d(marginals[0], marginals[static_cast<std::size_t>(k + 1)]));
            mean_r.push_back(std::fabs(means[static_cast<std::size_t>(k + 1)] - means[0]));
            sd_r.push_back(std::fabs(sds[static_cast<std::size_t>(k + 1)] - sds[0]));
        }
    }

    ConvergenceReport report;
    for (long k = 0; k <= K; ++k) {
        std::vector<double> w1_k, mean_k, sd_k;
        for (long r = 0; r < R; ++r) {
            w1_k.push_back(w1[static_cast<std::size_t>(r)][static_cast<std::size_t>(k)]);
            mean_k.push_back(mean_diff[static_cast<std::size_t>(r)][static_cast<std::size_t>(k)]);
            sd_k.push_back(sd_diff[static_cast<std::size_t>(r)][static_cast<std::size_t>(k)]);
        }
        ConvergenceRow row;
        row.cohorts_per_box = 1L << k;
        row.w1 = median_of(w1_k);
        row.mean_diff = median_of(mean_k);
        row.sd_diff = median_of(sd_k);
        row.order = k == 0 ? std::numeric_limits<double>::quiet_NaN()
                           : std::log2(report.rows.back().w1 / row.w1);
        report.rows.push_back(row);
    }
    return report;
}

FitResult run_fit(const ExperimentConfig& config, const SeroDataset& dataset,
                  std::uint64_t replicate) {
    validate(dataset);
    FitResult result;
    result.priors = priors_for(config.model);
    result.names = parameter_names(config.model);
    result.burn_in = config.sampler.burn_in;
    const auto solver = solver_from(config.solver);
    const auto target = target_for(config.model, dataset, solver, config.sampler.draws, result.priors);

    if (config.sampler.algorithm == SamplerConfig::Algorithm::pm_rwm) {
        Rng rng(Rng::derive(config.sampler.seed, {2, replicate}));
        auto theta0 = sample_prior(result.priors, rng);
        result.chains.push_back(
            pm_rwm(target, theta0, config.sampler.iterations, config.sampler.sigma0, rng));
        return result;
    }

    result.used_apt = true;
    const std::uint64_t apt_seed = Rng::derive_seed(config.sampler.seed, {3, replicate});
    Rng init_rng(apt_seed);
    auto theta0 = sample_prior(result.priors, init_rng);
    result.tempering = apt(target, theta0, config.sampler.levels, config.sampler.iterations,
                           config.sampler.burn_in, config.sampler.sigma0, apt_seed);
    result.chains = std::move(result.tempering.levels);
    result.tempering.levels.clear();
    return result;
}

HoldoutResult run_holdout(const ExperimentConfig& config, const SeroDataset& dataset,
                          long holdout_year, std::uint64_t replicate) {
    HoldoutResult result;
    result.holdout_year = holdout_year;
    SeroDataset fit_data;
    std::vector<SmoothedBox> cells;
    for (const auto& cell : dataset.subsamples) {
        const long year = std::llround(cell.box.t_lo());
        if (year == holdout_year) {
            result.cells.push_back({year, std::llround(cell.box.a_lo())});
            result.observed_prevalence.push_back(
                1.0 - static_cast<double>(cell.susceptible) / static_cast<double>(cell.tested));
            cells.push_back(cell.box);
        } else {
            fit_data.subsamples.push_back(cell);
        }
    }
    if (cells.empty()) throw InvariantViolation("holdout year absent from the dataset");
    if (fit_data.subsamples.empty()) throw InvariantViolation("no data left after removing the holdout year");

    result.fit = run_fit(config, fit_data, replicate);
    const Chain& cold = result.fit.chains.front();

    // Thin the retained draws before solving each cell, keeping the band
    // estimate cheap while leaving the quantile noise far below band widths.
    const long kept = cold.iterations() - result.fit.burn_in;
    const long stride = std::max(1L, kept / 2000);
    Chain thinned;
    for (long i = result.fit.burn_in; i < cold.iterations(); i += stride) {
        thinned.theta.push_back(cold.theta[static_cast<std::size_t>(i)]);
        thinned.log_like.push_back(cold.log_like[static_cast<std::size_t>(i)]);
        thinned.accepted.push_back(cold.accepted[static_cast<std::size_t>(i)]);
        thinned.scale_trace.push_back(cold.scale_trace[static_cast<std::size_t>(i)]);
    }
    const ModelConfig& model = config.model;
    result.bands = predict_prevalence(
        thinned, 0,
        [&model](std::span<const double> theta) { return foi_from_theta(model, theta); }, cells);
    for (std::size_t c = 0; c < cells.size(); ++c)
        result.covered.push_back(result.observed_prevalence[c] >= result.bands[c].prevalence_q05 &&
                                 result.observed_prevalence[c] <= result.bands[c].prevalence_q95);
    return result;
}

void write_chain_csv(const std::string& path, const Chain& chain,
                     std::span<const std::string> names) {
    auto out = open_for_write(path);
    out << "iteration";
    for (const auto& name : names) out << "," << name;
    out << ",log_likelihood,accepted\n";
    for (long i = 0; i < chain.iterations(); ++i) {
        out << i;
        for (double v : chain.theta[static_cast<std::size_t>(i)]) out << "," << fmt(v);
        out << "," << fmt(chain.log_like[static_cast<std::size_t>(i)]) << ","
            << (chain.accepted[static_cast<std::size_t>(i)] ? 1 : 0) << "\n";
    }
}

void write_summary_csv(const std::string& path, const Chain& chain,
                       std::span<const std::string> names, long burn_in) {
    const auto summaries = summarize(chain, burn_in);
    if (summaries.size() != names.size())
        throw InvariantViolation("summary columns do not match parameter names");
    auto out = open_for_write(path);
    out << "parameter,mean,sd,q025,q05,q50,q95,q975\n";
    for (std::size_t d = 0; d < summaries.size(); ++d) {
        const auto& s = summaries[d];
        out << names[d] << "," << fmt(s.mean) << "," << fmt(s.sd) << "," << fmt(s.q025) << ","
            << fmt(s.q05) << "," << fmt(s.q50) << "," << fmt(s.q95) << "," << fmt(s.q975) << "\n";
    }
}

void write_acf_csv(const std::string& path, const Chain& chain,
                   std::span<const std::string> names, long burn_in, long max_lag) {
    const long kept = chain.iterations() - burn_in;
    const long lag = std::min(max_lag, kept - 1);
    std::vector<std::vector<double>> columns;
    for (std::size_t d = 0; d < names.size(); ++d)
        columns.push_back(acf(component_after(chain, burn_in, d), lag));
    auto out = open_for_write(path);
    out << "lag";
    for (const auto& name : names) out << "," << name;
    out << "\n";
    for (long k = 0; k <= lag; ++k) {
        out << k;
        for (const auto& column : columns) out << "," << fmt(column[static_cast<std::size_t>(k)]);
        out << "\n";
    }
}

void write_convergence_csv(const std::string& path, const ConvergenceReport& report) {
    auto out = open_for_write(path);
    out << "cohorts_per_box,w1,order,mean_diff,sd_diff\n";
    for (const auto& row : report.rows) {
        out << row.cohorts_per_box << "," << fmt(row.w1) << ",";
        if (!std::isnan(row.order)) out << fmt(row.order);
        out << "," << fmt(row.mean_diff) << "," << fmt(row.sd_diff) << "\n";
    }
}

void write_temperature_csv(const std::string& path, const AptResult& tempering) {
    auto out = open_for_write(path);
    const std::size_t levels = tempering.beta_trace.empty() ? 0 : tempering.beta_trace.front().size();
    out << "iteration";
    for (std::size_t l = 0; l < levels; ++l) out << ",inv_beta_" << l;
    out << ",swap_pair,swap_eta,swap_accepted\n";
    for (std::size_t i = 0; i < tempering.beta_trace.size(); ++i) {
        out << i;
        for (double beta : tempering.beta_trace[i]) out << "," << fmt(1.0 / beta);
        out << "," << tempering.swap_pair[i] << "," << fmt(tempering.swap_eta[i]) << ","
            << (tempering.swap_accepted[i] ? 1 : 0) << "\n";
    }
}

void write_prediction_csv(const std::string& path, const HoldoutResult& holdout) {
    auto out = open_for_write(path);
    out << "year,age,observed_prevalence,prevalence_q05,prevalence_q50,prevalence_q95,"
           "susceptible_q05,susceptible_q50,susceptible_q95,covered\n";
    for (std::size_t c = 0; c < holdout.cells.size(); ++c) {
        const auto& band = holdout.bands[c];
        out << holdout.cells[c].year << "," << holdout.cells[c].age << ","
            << fmt(holdout.observed_prevalence[c]) << "," << fmt(band.prevalence_q05) << ","
            << fmt(band.prevalence_q50) << "," << fmt(band.prevalence_q95) << ","
            << fmt(band.susceptible_q05) << "," << fmt(band.susceptible_q50) << ","
            << fmt(band.susceptible_q95) << "," << (holdout.covered[c] ? 1 : 0) << "\n";
    }
}

void write_individuals_csv(const std::string& path,
                           std::span<const SyntheticIndividual> individuals,
                           std::span<const CellIndex> cells) {
    auto out = open_for_write(path);
    out << "year,age,t,a,susceptible\n";
    for (const auto& person : individuals) {
        const auto& cell = cells[static_cast<std::size_t>(person.box_index)];
        out << cell.year << "," << cell.age << "," << fmt(person.time) << "," << fmt(person.age)
            << "," << (person.susceptible ? 1 : 0) << "\n";
    }
}

void write_fit_outputs(const std::string& directory, const FitResult& fit) {
    std::filesystem::create_directories(directory);
    const std::filesystem::path base(directory);
    for (std::size_t level = 0; level < fit.chains.size(); ++level)
        write_chain_csv((base / ("chain_" + std::to_string(level) + ".csv")).string(),
                        fit.chains[level], fit.names);
    write_summary_csv((base / "summary.csv").string(), fit.chains.front(), fit.names, fit.burn_in);
    write_acf_csv((base / "acf.csv").string(), fit.chains.front(), fit.names, fit.burn_in, 200);
    if (fit.used_apt) write_temperature_csv((base / "temperatures.csv").string(), fit.tempering);
}

}  // namespace serofit
