#include <cstdio>
#include <exception>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "serofit/experiments.hpp"

namespace {

using namespace serofit;

struct CommonOptions {
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out_dir;
};

void add_common(CLI::App* cmd, CommonOptions& opts) {
    cmd->add_option("-c,--config", opts.config_path, "experiment config file")
        ->required()
        ->check(CLI::ExistingFile);
    cmd->add_option("--seed", opts.seed, "override the sampler seed");
    cmd->add_option("-o,--out", opts.out_dir, "override the output directory");
}

ExperimentConfig load(const CommonOptions& opts) {
    auto config = load_config(opts.config_path);
    if (opts.seed) config.sampler.seed = *opts.seed;
    if (opts.out_dir) config.output.directory = *opts.out_dir;
    return config;
}

Convention convention_from(const std::string& name) {
    if (name == "infected") return Convention::seropositive_is_infected;
    if (name == "susceptible") return Convention::seropositive_is_susceptible;
    throw InvariantViolation("convention must be 'infected' or 'susceptible'");
}

std::filesystem::path ensure_out(const ExperimentConfig& config) {
    std::filesystem::path dir(config.output.directory);
    std::filesystem::create_directories(dir);
    return dir;
}

int run_simulate(const CommonOptions& opts, const std::string& convention_name) {
    const auto config = load(opts);
    if (config.model.kind != ModelConfig::Kind::varicella)
        throw InvariantViolation("simulate needs the varicella model; the toy design is "
                                 "generated inside toy-convergence");
    if (!config.truth.present)
        throw InvariantViolation("simulate needs a [truth] section to draw from");

    const auto cells = design_cells(config.design);
    std::vector<SmoothedBox> boxes;
    boxes.reserve(cells.size());
    for (const auto& cell : cells)
        boxes.push_back(grid_cell(cell.year, cell.age, config.design.edge_time,
                                  config.design.edge_age));
    const auto foi = foi_from_theta(config.model, config.truth.theta);
    Rng rng(Rng::derive(config.sampler.seed, {1}));
    const auto synth = generate_synthetic(boxes, foi, config.design.n_per_cell, rng);

    const auto convention = convention_from(convention_name);
    std::vector<SeroCSVRecord> records;
    records.reserve(cells.size());
    for (std::size_t i = 0; i < cells.size(); ++i) {
        const auto& cell = synth.dataset.subsamples[i];
        const long positive = convention == Convention::seropositive_is_infected
                                  ? cell.tested - cell.susceptible
                                  : cell.susceptible;
        records.push_back({cells[i].year, cells[i].age, cell.tested, positive});
    }

    const auto dir = ensure_out(config);
    write_sero_records((dir / "data.csv").string(), records);
    write_individuals_csv((dir / "individuals.csv").string(), synth.individuals, cells);
    std::cout << "wrote " << records.size() << " cells (" << synth.individuals.size()
              << " individuals) to " << dir.string() << "\n";
    return 0;
}

int run_fit_cmd(const CommonOptions& opts, const std::string& data_path,
                const std::string& convention_name, std::uint64_t replicate) {
    const auto config = load(opts);
    const auto data = load_serodata(data_path, convention_from(convention_name),
                                    config.design.edge_time, config.design.edge_age);
    const auto fit = run_fit(config, data, replicate);
    const auto dir = ensure_out(config);
    write_fit_outputs(dir.string(), fit);
    const auto summary = summarize(fit.chains.front(), fit.burn_in);
    std::cout << "acceptance rate " << fit.chains.front().acceptance_rate(fit.burn_in) << "\n";
    for (std::size_t d = 0; d < summary.size(); ++d)
        std::cout << fit.names[d] << ": mean " << summary[d].mean << " sd " << summary[d].sd
                  << " [" << summary[d].q025 << ", " << summary[d].q975 << "]\n";
    std::cout << "outputs in " << dir.string() << "\n";
    return 0;
}

int run_predict(const CommonOptions& opts, const std::string& data_path,
                const std::string& convention_name, long holdout_year,
                std::uint64_t replicate) {
    const auto config = load(opts);
    const auto data = load_serodata(data_path, convention_from(convention_name),
                                    config.design.edge_time, config.design.edge_age);
    const auto holdout = run_holdout(config, data, holdout_year, replicate);
    const auto dir = ensure_out(config);
    write_fit_outputs(dir.string(), holdout.fit);
    write_prediction_csv((dir / "prediction.csv").string(), holdout);
    long covered = 0;
    for (bool hit : holdout.covered) covered += hit ? 1 : 0;
    std::cout << "holdout " << holdout_year << ": " << covered << "/" << holdout.cells.size()
              << " cells inside the 90% band\n";
    std::cout << "outputs in " << dir.string() << "\n";
    return 0;
}

int run_convergence(const CommonOptions& opts) {
    const auto config = load(opts);
    const auto report = run_toy_convergence(config);
    const auto dir = ensure_out(config);
    write_convergence_csv((dir / "convergence.csv").string(), report);
    std::printf("%16s %12s %8s\n", "cohorts_per_box", "w1", "order");
    for (const auto& row : report.rows)
        std::printf("%16ld %12.6g %8.3f\n", row.cohorts_per_box, row.w1, row.order);
    std::cout << "outputs in " << dir.string() << "\n";
    return 0;
}

int run_validate(const CommonOptions& opts) {
    const auto config = load(opts);
    std::cout << serialize_config(config);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"seroprevalence model fitting and prediction"};
    app.require_subcommand(1);

    CommonOptions sim_opts, fit_opts, pred_opts, conv_opts, val_opts;
    std::string fit_data, pred_data;
    std::string sim_convention = "infected";
    std::string fit_convention = "infected";
    std::string pred_convention = "infected";
    std::uint64_t fit_replicate = 1, pred_replicate = 1;
    long holdout_year = 0;

    auto* simulate = app.add_subcommand("simulate", "draw a synthetic survey from [truth]");
    add_common(simulate, sim_opts);
    simulate->add_option("--convention", sim_convention,
                         "meaning of n_seropositive: infected or susceptible");

    auto* fit = app.add_subcommand("fit", "sample the posterior for a survey");
    add_common(fit, fit_opts);
    fit->add_option("-d,--data", fit_data, "survey CSV")->required()->check(CLI::ExistingFile);
    fit->add_option("--convention", fit_convention,
                    "meaning of n_seropositive: infected or susceptible");
    fit->add_option("--replicate", fit_replicate, "random stream index");

    auto* predict = app.add_subcommand("predict", "fit without one year, band that year");
    add_common(predict, pred_opts);
    predict->add_option("-d,--data", pred_data, "survey CSV")->required()->check(CLI::ExistingFile);
    predict->add_option("--holdout-year", holdout_year, "year to hold out")->required();
    predict->add_option("--convention", pred_convention,
                        "meaning of n_seropositive: infected or susceptible");
    predict->add_option("--replicate", pred_replicate, "random stream index");

    auto* convergence =
        app.add_subcommand("toy-convergence", "cohort-versus-reference posterior distances");
    add_common(convergence, conv_opts);

    auto* validate_cmd = app.add_subcommand("validate-config", "parse and echo the canonical form");
    add_common(validate_cmd, val_opts);

    CLI11_PARSE(app, argc, argv);

    try {
        if (simulate->parsed()) return run_simulate(sim_opts, sim_convention);
        if (fit->parsed()) return run_fit_cmd(fit_opts, fit_data, fit_convention, fit_replicate);
        if (predict->parsed())
            return run_predict(pred_opts, pred_data, pred_convention, holdout_year, pred_replicate);
        if (convergence->parsed()) return run_convergence(conv_opts);
        if (validate_cmd->parsed()) return run_validate(val_opts);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
