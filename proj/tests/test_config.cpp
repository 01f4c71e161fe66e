#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <string>

#include "serofit/config.hpp"

using namespace serofit;

namespace {

ExperimentConfig parse(const std::string& text) { return parse_config_text(text, "test.ini"); }

long error_line(const std::string& text) {
    try {
        parse_config_text(text, "test.ini");
    } catch (const ParseError& e) {
        return e.line_number;
    }
    return -1;
}

const std::string kToyFull =
    "[model]\n"
    "kind = toy\n"
    "amplitude = 18\n"
    "offset = 1.2\n"
    "prior_gamma = uniform(0,6)\n"
    "[design]\n"
    "boxes = 4\n"
    "age_width = 0.1\n"
    "edge_time = 0.02\n"
    "edge_age = 0.001\n"
    "n_per_cell = 25\n"
    "[truth]\n"
    "gamma = 3.14\n"
    "[sampler]\n"
    "algorithm = pm_rwm\n"
    "iterations = 2000\n"
    "burn_in = 500\n"
    "draws = 32\n"
    "sigma0 = 0.4\n"
    "seed = 77\n"
    "[solver]\n"
    "kind = cohort\n"
    "cohorts_per_box = 4\n"
    "[convergence]\n"
    "k_max = 3\n"
    "runs = 2\n"
    "[output]\n"
    "directory = results\n";

const std::string kVaricellaFull =
    "[model]\n"
    "kind = varicella\n"
    "breakpoints = 0,3,7,15,21\n"
    "epoch = 2000\n"
    "prior_alpha = exponential(10)\n"
    "prior_gamma1 = exponential(0.8)\n"
    "prior_gamma2 = uniform_angle\n"
    "prior_gamma3 = exponential(1)\n"
    "[design]\n"
    "years = 2000:2004\n"
    "ages = 1:19\n"
    "n_per_cell = 40\n"
    "[truth]\n"
    "alpha = 0.1,0.2,0.15,0.05\n"
    "gamma1 = 1.5\n"
    "gamma2 = 3.0\n"
    "gamma3 = 0.3\n"
    "[sampler]\n"
    "algorithm = apt\n"
    "iterations = 5000\n"
    "burn_in = 1000\n"
    "draws = 100\n"
    "sigma0 = 0.25\n"
    "levels = 4\n"
    "seed = 9\n";

}  // namespace

TEST_CASE("a kind-only config fills every default") {
    const auto config = parse("[model]\nkind = toy\n");
    CHECK(config.model.kind == ModelConfig::Kind::toy);
    CHECK(config.model.amplitude == 20.0);
    CHECK(config.model.offset == 1.1);
    CHECK(config.model.prior_gamma.kind == Prior::Kind::uniform);
    CHECK(config.model.prior_gamma.a == 0.0);
    CHECK(config.model.prior_gamma.b == 5.0);
    CHECK(config.design.boxes == 6);
    CHECK(config.design.age_width == 0.05);
    CHECK(config.design.edge_time == 0.01);
    CHECK(config.design.edge_age == 0.0005);
    CHECK(config.design.n_per_cell == 10);
    CHECK_FALSE(config.truth.present);
    CHECK(config.sampler.algorithm == SamplerConfig::Algorithm::pm_rwm);
    CHECK(config.sampler.iterations == 100000);
    CHECK(config.sampler.burn_in == 10000);
    CHECK(config.sampler.draws == 500);
    CHECK(config.sampler.sigma0 == 0.5);
    CHECK(config.sampler.levels == 1);
    CHECK(config.sampler.seed == 1);
    CHECK(config.solver.kind == SolverConfig::Kind::exact);
    CHECK(config.convergence.k_max == 4);
    CHECK(config.convergence.runs == 5);
    CHECK(config.output.directory == "out");
}

TEST_CASE("varicella defaults cover the published design") {
    const auto config = parse("[model]\nkind = varicella\n");
    CHECK(config.model.breakpoints == std::vector<double>{0.0, 3.0, 7.0, 15.0, 21.0});
    CHECK(config.model.epoch == 2000.0);
    CHECK(config.model.prior_alpha.kind == Prior::Kind::exponential);
    CHECK(config.model.prior_alpha.a == 10.0);
    CHECK(config.model.prior_gamma2.kind == Prior::Kind::uniform_angle);
    CHECK(config.design.year_lo == 2000);
    CHECK(config.design.year_hi == 2004);
    CHECK(config.design.age_lo == 1);
    CHECK(config.design.age_hi == 19);
    CHECK(config.design.edge_time == 0.05);
    CHECK(config.design.edge_age == 0.05);
}

TEST_CASE("toy config text round trips through the serializer") {
    const auto config = parse(kToyFull);
    CHECK(config.model.amplitude == 18.0);
    CHECK(config.truth.present);
    CHECK(config.truth.theta == std::vector<double>{3.14});
    CHECK(config.solver.kind == SolverConfig::Kind::cohort);
    CHECK(config.solver.epsilon == 0.25);
    CHECK(config.sampler.seed == 77);
    CHECK(config.output.directory == "results");

    const std::string first = serialize_config(config);
    const std::string second = serialize_config(parse(first));
    CHECK(first == second);
}

TEST_CASE("varicella config text round trips through the serializer") {
    const auto config = parse(kVaricellaFull);
    CHECK(config.truth.present);
    CHECK(config.truth.theta ==
          std::vector<double>{0.1, 0.2, 0.15, 0.05, 1.5, 3.0, 0.3});
    CHECK(config.sampler.algorithm == SamplerConfig::Algorithm::apt);
    CHECK(config.sampler.levels == 4);

    const std::string first = serialize_config(config);
    const std::string second = serialize_config(parse(first));
    CHECK(first == second);
}

TEST_CASE("prior tokens parse and format back to themselves") {
    const Prior u = parse_prior("uniform(0.5, 2.5)");
    CHECK(u.kind == Prior::Kind::uniform);
    CHECK(u.a == 0.5);
    CHECK(u.b == 2.5);

    const Prior e = parse_prior("exponential(10)");
    CHECK(e.kind == Prior::Kind::exponential);
    CHECK(e.a == 10.0);

    const Prior w = parse_prior("uniform_angle");
    CHECK(w.kind == Prior::Kind::uniform_angle);

    for (const char* token : {"uniform(0.5,2.5)", "exponential(0.125)", "uniform_angle"})
        CHECK(format_prior(parse_prior(token)) == token);

    CHECK_THROWS_AS(parse_prior("normal(0,1)"), InvariantViolation);
    CHECK_THROWS_AS(parse_prior("uniform(2,1)"), InvariantViolation);
    CHECK_THROWS_AS(parse_prior("uniform(1)"), InvariantViolation);
    CHECK_THROWS_AS(parse_prior("exponential(-3)"), InvariantViolation);
    CHECK_THROWS_AS(parse_prior("exponential()"), InvariantViolation);
    CHECK_THROWS_AS(parse_prior("uniform(a,b)"), InvariantViolation);
    CHECK_THROWS_AS(parse_prior(""), InvariantViolation);
}

TEST_CASE("syntax errors report the offending line") {
    CHECK(error_line("[model]\nkind = toy\n[banana]\nx = 1\n") == 3);
    CHECK(error_line("[model]\nkind = toy\nbreakpoints = 0,21\n") == 3);
    CHECK(error_line("[model]\nkind = toy\noffset = 1\noffset = 2\n") == 4);
    CHECK(error_line("[model]\nkind = toy\n[model]\n") == 3);
    CHECK(error_line("[model]\nkind = toy\njust words\n") == 3);
    CHECK(error_line("kind = toy\n") == 1);
    CHECK(error_line("[model\nkind = toy\n") == 1);
    CHECK(error_line("[model]\nkind = toy\noffset =\n") == 3);
    CHECK(error_line("[model]\nkind = toy\namplitude = fast\n") == 3);
    CHECK(error_line("[model]\nkind = racoon\n") == 2);
    CHECK(error_line("[model]\n") == 0);  // missing kind reports the file, not a line
    CHECK(error_line("[sampler]\nseed = -4\n") == 0);
}

TEST_CASE("cross-field validation rejects inconsistent configs") {
    const std::string toy = "[model]\nkind = toy\n";
    CHECK_THROWS_AS(parse(toy + "[sampler]\niterations = 10\nburn_in = 10\n"), ParseError);
    CHECK_THROWS_AS(parse(toy + "[sampler]\nsigma0 = 0\n"), ParseError);
    CHECK_THROWS_AS(parse(toy + "[sampler]\nalgorithm = apt\n"), ParseError);
    CHECK_THROWS_AS(parse(toy + "[sampler]\nlevels = 3\n"), ParseError);
    CHECK_THROWS_AS(parse(toy + "[convergence]\nk_max = 13\n"), ParseError);
    CHECK_THROWS_AS(parse(toy + "[convergence]\nruns = 0\n"), ParseError);
    CHECK_THROWS_AS(parse(toy + "[design]\nn_per_cell = 0\n"), ParseError);
    CHECK_THROWS_AS(parse(toy + "[design]\nage_width = 0.05\nedge_age = 0.03\n"), ParseError);
    CHECK_THROWS_AS(parse(toy + "[truth]\ngamma = -1\n"), ParseError);
    CHECK_THROWS_AS(parse(toy + "[output]\ndirectory =\n"), ParseError);

    const std::string vz = "[model]\nkind = varicella\n";
    CHECK_THROWS_AS(parse(vz + "[design]\nages = 1:21\n"), ParseError);
    CHECK_THROWS_AS(parse(vz + "[design]\nyears = 2004:2000\n"), ParseError);
    CHECK_THROWS_AS(parse(vz + "[design]\nages = 5\n"), ParseError);
    CHECK_THROWS_AS(parse(vz + "[truth]\nalpha = 0.1,0.1,0.1,0.1\n"), ParseError);
    CHECK_THROWS_AS(
        parse(vz + "[truth]\nalpha = 0.1,0.1\ngamma1 = 1\ngamma2 = 1\ngamma3 = 1\n"),
        ParseError);
    CHECK_THROWS_AS(
        parse(vz + "[truth]\nalpha = 0.1,0.1,0.1,0.1\ngamma1 = 1\ngamma2 = 6.4\ngamma3 = 1\n"),
        ParseError);
    CHECK_THROWS_AS(parse("[model]\nkind = varicella\nbreakpoints = 1,21\n"), ParseError);
    CHECK_THROWS_AS(parse("[model]\nkind = varicella\nbreakpoints = 0,7,7,21\n"), ParseError);
}

TEST_CASE("solver keys are mutually exclusive by kind") {
    const std::string toy = "[model]\nkind = toy\n[solver]\n";
    CHECK(parse(toy + "kind = exact\n").solver.kind == SolverConfig::Kind::exact);
    CHECK(parse(toy + "kind = cohort\nepsilon = 0.125\n").solver.epsilon == 0.125);
    CHECK(parse(toy + "kind = cohort\ncohorts_per_box = 8\n").solver.epsilon == 0.125);
    CHECK_THROWS_AS(parse(toy + "kind = exact\nepsilon = 0.5\n"), ParseError);
    CHECK_THROWS_AS(parse(toy + "kind = exact\ncohorts_per_box = 2\n"), ParseError);
    CHECK_THROWS_AS(parse(toy + "kind = cohort\n"), ParseError);
    CHECK_THROWS_AS(parse(toy + "kind = cohort\nepsilon = 0.5\ncohorts_per_box = 2\n"), ParseError);
    CHECK_THROWS_AS(parse(toy + "kind = cohort\nepsilon = 0\n"), ParseError);
    CHECK_THROWS_AS(parse(toy + "kind = cohort\ncohorts_per_box = 0\n"), ParseError);
    CHECK_THROWS_AS(parse(toy + "kind = magic\n"), ParseError);
}

TEST_CASE("comments and spacing are tolerated") {
    const auto config = parse(
        "# leading comment\n"
        "\n"
        "[model]   \n"
        "  kind   =   toy  # trailing comment\n"
        "; alternative comment style\n"
        "offset=1.3\n");
    CHECK(config.model.kind == ModelConfig::Kind::toy);
    CHECK(config.model.offset == 1.3);
}

TEST_CASE("load_config reads a file and reports open failures") {
    const std::string path = "test_config_tmp.ini";
    {
        std::ofstream out(path);
        out << kToyFull;
    }
    const auto from_file = load_config(path);
    CHECK(serialize_config(from_file) == serialize_config(parse(kToyFull)));
    std::remove(path.c_str());

    try {
        load_config("does_not_exist.ini");
        CHECK(false);
    } catch (const ParseError& e) {
        CHECK(e.line_number == 0);
        CHECK(std::string(e.what()).find("does_not_exist.ini") != std::string::npos);
    }
}
