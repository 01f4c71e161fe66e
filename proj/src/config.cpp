#include "serofit/config.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>

namespace serofit {

namespace {

const double kTwoPi = 2.0 * std::acos(-1.0);

std::string trim(std::string_view text) {
    std::size_t lo = 0, hi = text.size();
    while (lo < hi && std::isspace(static_cast<unsigned char>(text[lo]))) ++lo;
    while (hi > lo && std::isspace(static_cast<unsigned char>(text[hi - 1]))) --hi;
    return std::string(text.substr(lo, hi - lo));
}

std::string fmt(double v) {
    char buffer[64];
    std::snprintf(buffer, sizeof(buffer), "%.17g", v);
    return buffer;
}

struct RawValue {
    std::string text;
    long line = 0;
    bool consumed = false;
};

using Section = std::map<std::string, RawValue>;

struct RawConfig {
    std::string label;
    std::map<std::string, Section> sections;
    std::map<std::string, long> section_lines;

    [[noreturn]] void fail(long line, const std::string& what) const {
        throw ParseError(label, line, what);
    }

    bool has(const std::string& section, const std::string& key) const {
        const auto s = sections.find(section);
        return s != sections.end() && s->second.count(key) > 0;
    }

    const RawValue* take(const std::string& section, const std::string& key) {
        auto s = sections.find(section);
        if (s == sections.end()) return nullptr;
        auto k = s->second.find(key);
        if (k == s->second.end()) return nullptr;
        k->second.consumed = true;
        return &k->second;
    }

    void reject_unconsumed() const {
        for (const auto& [name, section] : sections)
            for (const auto& [key, value] : section)
                if (!value.consumed)
                    fail(value.line, "unknown key '" + key + "' in [" + name + "]");
    }
};

RawConfig scan(std::string_view text, const std::string& label) {
    RawConfig raw;
    raw.label = label;
    static const char* kSections[] = {"model",  "design",      "truth", "sampler",
                                      "solver", "convergence", "output"};
    std::string current;
    long line_no = 0;
    std::istringstream stream{std::string(text)};
    std::string line;
    while (std::getline(stream, line)) {
        ++line_no;
        // Inline comments start at a # or ; that opens the line or follows
        // whitespace, so values may still contain either character.
        for (std::size_t i = 0; i < line.size(); ++i) {
            if ((line[i] == '#' || line[i] == ';') &&
                (i == 0 || line[i - 1] == ' ' || line[i - 1] == '\t')) {
                line.erase(i);
                break;
            }
        }
        const std::string body = trim(line);
        if (body.empty()) continue;
        if (body.front() == '[') {
            if (body.back() != ']') raw.fail(line_no, "unterminated section header");
            current = trim(body.substr(1, body.size() - 2));
            bool known = false;
            for (const char* s : kSections) known = known || current == s;
            if (!known) raw.fail(line_no, "unknown section [" + current + "]");
            if (raw.sections.count(current)) raw.fail(line_no, "duplicate section [" + current + "]");
            raw.sections[current] = {};
            raw.section_lines[current] = line_no;
            continue;
        }
        const auto eq = body.find('=');
        if (eq == std::string::npos) raw.fail(line_no, "expected 'key = value'");
        if (current.empty()) raw.fail(line_no, "key outside any section");
        const std::string key = trim(body.substr(0, eq));
        const std::string value = trim(body.substr(eq + 1));
        if (key.empty()) raw.fail(line_no, "empty key");
        if (value.empty()) raw.fail(line_no, "empty value for '" + key + "'");
        auto [it, inserted] = raw.sections[current].emplace(key, RawValue{value, line_no, false});
        if (!inserted) raw.fail(line_no, "duplicate key '" + key + "'");
    }
    return raw;
}

double parse_double(const RawConfig& raw, const RawValue& value) {
    const char* begin = value.text.c_str();
    char* end = nullptr;
    const double v = std::strtod(begin, &end);
    if (end == begin || *end != '\0' || !std::isfinite(v))
        raw.fail(value.line, "expected a finite number, got '" + value.text + "'");
    return v;
}

long parse_long(const RawConfig& raw, const RawValue& value) {
    const char* begin = value.text.c_str();
    char* end = nullptr;
    const long v = std::strtol(begin, &end, 10);
    if (end == begin || *end != '\0')
        raw.fail(value.line, "expected an integer, got '" + value.text + "'");
    return v;
}

std::uint64_t parse_u64(const RawConfig& raw, const RawValue& value) {
    const char* begin = value.text.c_str();
    char* end = nullptr;
    if (!value.text.empty() && value.text[0] == '-')
        raw.fail(value.line, "expected a non-negative integer, got '" + value.text + "'");
    const unsigned long long v = std::strtoull(begin, &end, 10);
    if (end == begin || *end != '\0')
        raw.fail(value.line, "expected a non-negative integer, got '" + value.text + "'");
    return static_cast<std::uint64_t>(v);
}

std::vector<double> parse_double_list(const RawConfig& raw, const RawValue& value) {
    std::vector<double> out;
    std::istringstream stream(value.text);
    std::string item;
    while (std::getline(stream, item, ',')) {
        const std::string token = trim(item);
        const char* begin = token.c_str();
        char* end = nullptr;
        const double v = std::strtod(begin, &end);
        if (token.empty() || end == begin || *end != '\0' || !std::isfinite(v))
            raw.fail(value.line, "expected a comma-separated number list");
        out.push_back(v);
    }
    if (out.empty()) raw.fail(value.line, "expected a comma-separated number list");
    return out;
}

std::pair<long, long> parse_range(const RawConfig& raw, const RawValue& value) {
    const auto colon = value.text.find(':');
    if (colon == std::string::npos)
        raw.fail(value.line, "expected 'lo:hi', got '" + value.text + "'");
    const RawValue lo{trim(value.text.substr(0, colon)), value.line, false};
    const RawValue hi{trim(value.text.substr(colon + 1)), value.line, false};
    if (lo.text.empty() || hi.text.empty()) raw.fail(value.line, "expected 'lo:hi'");
    return {parse_long(raw, lo), parse_long(raw, hi)};
}

Prior parse_prior_checked(const RawConfig& raw, const RawValue& value) {
    try {
        return parse_prior(value.text);
    } catch (const InvariantViolation& err) {
        raw.fail(value.line, err.what());
    }
}

void validate(const RawConfig& raw, bool ok, const std::string& what) {
    if (!ok) throw ParseError(raw.label, 0, what);
}

}  // namespace

Prior parse_prior(std::string_view token) {
    const std::string text = trim(token);
    if (text == "uniform_angle") return Prior{Prior::Kind::uniform_angle, 0.0, 0.0};

    const auto open = text.find('(');
    if (open == std::string::npos || text.back() != ')')
        throw InvariantViolation("malformed prior '" + text + "'");
    const std::string name = trim(text.substr(0, open));
    const std::string args = text.substr(open + 1, text.size() - open - 2);

    std::vector<double> values;
    std::istringstream stream(args);
    std::string item;
    while (std::getline(stream, item, ',')) {
        const std::string tok = trim(item);
        const char* begin = tok.c_str();
        char* end = nullptr;
        const double v = std::strtod(begin, &end);
        if (tok.empty() || end == begin || *end != '\0' || !std::isfinite(v))
            throw InvariantViolation("malformed prior argument in '" + text + "'");
        values.push_back(v);
    }
    if (name == "uniform") {
        if (values.size() != 2 || !(values[0] < values[1]))
            throw InvariantViolation("uniform prior needs bounds a < b");
        return Prior{Prior::Kind::uniform, values[0], values[1]};
    }
    if (name == "exponential") {
        if (values.size() != 1 || !(values[0] > 0.0))
            throw InvariantViolation("exponential prior needs a positive rate");
        return Prior{Prior::Kind::exponential, values[0], 0.0};
    }
    throw InvariantViolation("unknown prior family '" + name + "'");
}

std::string format_prior(const Prior& prior) {
    switch (prior.kind) {
        case Prior::Kind::uniform:
            return "uniform(" + fmt(prior.a) + "," + fmt(prior.b) + ")";
        case Prior::Kind::exponential:
            return "exponential(" + fmt(prior.a) + ")";
        case Prior::Kind::uniform_angle:
            return "uniform_angle";
    }
    throw InvariantViolation("unreachable prior kind");
}

ExperimentConfig parse_config_text(std::string_view text, const std::string& label) {
    RawConfig raw = scan(text, label);
    ExperimentConfig config;

    // [model] drives which keys are legal elsewhere, so read it first.
    const RawValue* kind = raw.take("model", "kind");
    if (kind == nullptr) raw.fail(0, "missing required key 'kind' in [model]");
    if (kind->text == "toy")
        config.model.kind = ModelConfig::Kind::toy;
    else if (kind->text == "varicella")
        config.model.kind = ModelConfig::Kind::varicella;
    else
        raw.fail(kind->line, "model kind must be 'toy' or 'varicella'");
    const bool toy = config.model.kind == ModelConfig::Kind::toy;

    if (toy) {
        if (const auto* v = raw.take("model", "amplitude")) config.model.amplitude = parse_double(raw, *v);
        if (const auto* v = raw.take("model", "offset")) config.model.offset = parse_double(raw, *v);
        if (const auto* v = raw.take("model", "prior_gamma")) config.model.prior_gamma = parse_prior_checked(raw, *v);
        validate(raw, config.model.amplitude >= 0.0, "[model] amplitude must be non-negative");
    } else {
        if (const auto* v = raw.take("model", "breakpoints")) config.model.breakpoints = parse_double_list(raw, *v);
        if (const auto* v = raw.take("model", "epoch")) config.model.epoch = parse_double(raw, *v);
        if (const auto* v = raw.take("model", "prior_alpha")) config.model.prior_alpha = parse_prior_checked(raw, *v);
        if (const auto* v = raw.take("model", "prior_gamma1")) config.model.prior_gamma1 = parse_prior_checked(raw, *v);
        if (const auto* v = raw.take("model", "prior_gamma2")) config.model.prior_gamma2 = parse_prior_checked(raw, *v);
        if (const auto* v = raw.take("model", "prior_gamma3")) config.model.prior_gamma3 = parse_prior_checked(raw, *v);
        const auto& b = config.model.breakpoints;
        validate(raw, b.size() >= 2, "[model] breakpoints need at least two entries");
        validate(raw, b.front() == 0.0, "[model] breakpoints must start at 0");
        for (std::size_t i = 0; i + 1 < b.size(); ++i)
            validate(raw, b[i] < b[i + 1], "[model] breakpoints must increase strictly");
    }

    // [design]
    if (toy) {
        if (const auto* v = raw.take("design", "boxes")) config.design.boxes = parse_long(raw, *v);
        if (const auto* v = raw.take("design", "age_width")) config.design.age_width = parse_double(raw, *v);
        if (const auto* v = raw.take("design", "edge_time")) config.design.edge_time = parse_double(raw, *v);
        if (const auto* v = raw.take("design", "edge_age")) config.design.edge_age = parse_double(raw, *v);
        validate(raw, config.design.boxes >= 1, "[design] boxes must be at least 1");
        validate(raw, config.design.age_width > 0.0, "[design] age_width must be positive");
        validate(raw, config.design.edge_time >= 0.0 && config.design.edge_time < 0.5,
                 "[design] edge_time must lie in [0, 0.5)");
        validate(raw, config.design.edge_age >= 0.0 && config.design.edge_age < config.design.age_width / 2.0,
                 "[design] edge_age must lie in [0, age_width/2)");
    } else {
        config.design.edge_time = 0.05;
        config.design.edge_age = 0.05;
        if (const auto* v = raw.take("design", "years")) {
            const auto [lo, hi] = parse_range(raw, *v);
            config.design.year_lo = lo;
            config.design.year_hi = hi;
        }
        if (const auto* v = raw.take("design", "ages")) {
            const auto [lo, hi] = parse_range(raw, *v);
            config.design.age_lo = lo;
            config.design.age_hi = hi;
        }
        if (const auto* v = raw.take("design", "edge_time")) config.design.edge_time = parse_double(raw, *v);
        if (const auto* v = raw.take("design", "edge_age")) config.design.edge_age = parse_double(raw, *v);
        validate(raw, config.design.year_lo <= config.design.year_hi, "[design] years range is inverted");
        validate(raw, config.design.age_lo >= 0, "[design] ages must be non-negative");
        validate(raw, config.design.age_lo <= config.design.age_hi, "[design] ages range is inverted");
        validate(raw, config.design.edge_time >= 0.0 && config.design.edge_time < 0.5,
                 "[design] edge_time must lie in [0, 0.5)");
        validate(raw, config.design.edge_age >= 0.0 && config.design.edge_age < 0.5,
                 "[design] edge_age must lie in [0, 0.5)");
        validate(raw,
                 static_cast<double>(config.design.age_hi + 1) + config.design.edge_age <=
                     config.model.breakpoints.back(),
                 "[design] age cells exceed the oldest breakpoint");
    }
    if (const auto* v = raw.take("design", "n_per_cell")) config.design.n_per_cell = parse_long(raw, *v);
    validate(raw, config.design.n_per_cell >= 1, "[design] n_per_cell must be at least 1");

    // [truth]
    if (toy) {
        if (const auto* v = raw.take("truth", "gamma")) {
            config.truth.present = true;
            config.truth.theta = {parse_double(raw, *v)};
            validate(raw, config.truth.theta[0] >= 0.0, "[truth] gamma must be non-negative");
        }
    } else {
        const auto* alpha = raw.take("truth", "alpha");
        const auto* g1 = raw.take("truth", "gamma1");
        const auto* g2 = raw.take("truth", "gamma2");
        const auto* g3 = raw.take("truth", "gamma3");
        const int given = (alpha != nullptr) + (g1 != nullptr) + (g2 != nullptr) + (g3 != nullptr);
        if (given > 0) {
            validate(raw, given == 4, "[truth] needs alpha, gamma1, gamma2 and gamma3 together");
            config.truth.present = true;
            config.truth.theta = parse_double_list(raw, *alpha);
            const std::size_t bands = config.model.breakpoints.size() - 1;
            validate(raw, config.truth.theta.size() == bands,
                     "[truth] alpha list must match the number of age bands");
            for (double a : config.truth.theta)
                validate(raw, a > 0.0, "[truth] alpha entries must be positive");
            config.truth.theta.push_back(parse_double(raw, *g1));
            config.truth.theta.push_back(parse_double(raw, *g2));
            config.truth.theta.push_back(parse_double(raw, *g3));
            validate(raw, config.truth.theta[bands] > 0.0, "[truth] gamma1 must be positive");
            validate(raw, config.truth.theta[bands + 1] >= 0.0 && config.truth.theta[bands + 1] < kTwoPi,
                     "[truth] gamma2 must lie in [0, 2*pi)");
            validate(raw, config.truth.theta[bands + 2] > 0.0, "[truth] gamma3 must be positive");
        }
    }

    // [sampler]
    if (const auto* v = raw.take("sampler", "algorithm")) {
        if (v->text == "pm_rwm")
            config.sampler.algorithm = SamplerConfig::Algorithm::pm_rwm;
        else if (v->text == "apt")
            config.sampler.algorithm = SamplerConfig::Algorithm::apt;
        else
            raw.fail(v->line, "algorithm must be 'pm_rwm' or 'apt'");
    }
    if (const auto* v = raw.take("sampler", "iterations")) config.sampler.iterations = parse_long(raw, *v);
    if (const auto* v = raw.take("sampler", "burn_in")) config.sampler.burn_in = parse_long(raw, *v);
    if (const auto* v = raw.take("sampler", "draws")) config.sampler.draws = parse_long(raw, *v);
    if (const auto* v = raw.take("sampler", "sigma0")) config.sampler.sigma0 = parse_double(raw, *v);
    if (const auto* v = raw.take("sampler", "levels")) config.sampler.levels = parse_long(raw, *v);
    if (const auto* v = raw.take("sampler", "seed")) config.sampler.seed = parse_u64(raw, *v);
    validate(raw, config.sampler.iterations >= 1, "[sampler] iterations must be at least 1");
    validate(raw, config.sampler.burn_in >= 0 && config.sampler.burn_in < config.sampler.iterations,
             "[sampler] burn_in must lie in [0, iterations)");
    validate(raw, config.sampler.draws >= 1, "[sampler] draws must be at least 1");
    validate(raw, config.sampler.sigma0 > 0.0, "[sampler] sigma0 must be positive");
    if (config.sampler.algorithm == SamplerConfig::Algorithm::apt)
        validate(raw, config.sampler.levels >= 2, "[sampler] apt needs at least 2 levels");
    else
        validate(raw, config.sampler.levels == 1, "[sampler] levels is only used by apt");

    // [solver]
    const RawValue* solver_kind = raw.take("solver", "kind");
    const RawValue* eps = raw.take("solver", "epsilon");
    const RawValue* cpb = raw.take("solver", "cohorts_per_box");
    if (solver_kind != nullptr) {
        if (solver_kind->text == "exact")
            config.solver.kind = SolverConfig::Kind::exact;
        else if (solver_kind->text == "cohort")
            config.solver.kind = SolverConfig::Kind::cohort;
        else
            raw.fail(solver_kind->line, "solver kind must be 'exact' or 'cohort'");
    }
    if (config.solver.kind == SolverConfig::Kind::exact) {
        validate(raw, eps == nullptr && cpb == nullptr, "[solver] exact takes neither epsilon nor cohorts_per_box");
    } else {
        validate(raw, (eps != nullptr) != (cpb != nullptr),
                 "[solver] cohort needs exactly one of epsilon or cohorts_per_box");
        if (eps != nullptr) {
            config.solver.epsilon = parse_double(raw, *eps);
            validate(raw, config.solver.epsilon > 0.0, "[solver] epsilon must be positive");
        } else {
            const long n = parse_long(raw, *cpb);
            validate(raw, n >= 1, "[solver] cohorts_per_box must be at least 1");
            config.solver.epsilon = 1.0 / static_cast<double>(n);
        }
    }

    // [convergence]
    if (const auto* v = raw.take("convergence", "k_max")) config.convergence.k_max = parse_long(raw, *v);
    if (const auto* v = raw.take("convergence", "runs")) config.convergence.runs = parse_long(raw, *v);
    validate(raw, config.convergence.k_max >= 0 && config.convergence.k_max <= 12,
             "[convergence] k_max must lie in [0, 12]");
    validate(raw, config.convergence.runs >= 1, "[convergence] runs must be at least 1");

    // [output]
    if (const auto* v = raw.take("output", "directory")) config.output.directory = v->text;
    validate(raw, !config.output.directory.empty(), "[output] directory must not be empty");

    raw.reject_unconsumed();
    return config;
}

ExperimentConfig load_config(const std::string& path) {
    std::ifstream file(path);
    if (!file) throw ParseError(path, 0, "cannot open config file");
    std::ostringstream text;
    text << file.rdbuf();
    return parse_config_text(text.str(), path);
}

std::string serialize_config(const ExperimentConfig& config) {
    std::ostringstream out;
    const bool toy = config.model.kind == ModelConfig::Kind::toy;
    out << "[model]\n";
    out << "kind = " << (toy ? "toy" : "varicella") << "\n";
    if (toy) {
        out << "amplitude = " << fmt(config.model.amplitude) << "\n";
        out << "offset = " << fmt(config.model.offset) << "\n";
        out << "prior_gamma = " << format_prior(config.model.prior_gamma) << "\n";
    } else {
        out << "breakpoints = ";
        for (std::size_t i = 0; i < config.model.breakpoints.size(); ++i)
            out << (i > 0 ? "," : "") << fmt(config.model.breakpoints[i]);
        out << "\n";
        out << "epoch = " << fmt(config.model.epoch) << "\n";
        out << "prior_alpha = " << format_prior(config.model.prior_alpha) << "\n";
        out << "prior_gamma1 = " << format_prior(config.model.prior_gamma1) << "\n";
        out << "prior_gamma2 = " << format_prior(config.model.prior_gamma2) << "\n";
        out << "prior_gamma3 = " << format_prior(config.model.prior_gamma3) << "\n";
    }
    out << "\n[design]\n";
    if (toy) {
        out << "boxes = " << config.design.boxes << "\n";
        out << "age_width = " << fmt(config.design.age_width) << "\n";
    } else {
        out << "years = " << config.design.year_lo << ":" << config.design.year_hi << "\n";
        out << "ages = " << config.design.age_lo << ":" << config.design.age_hi << "\n";
    }
    out << "edge_time = " << fmt(config.design.edge_time) << "\n";
    out << "edge_age = " << fmt(config.design.edge_age) << "\n";
    out << "n_per_cell = " << config.design.n_per_cell << "\n";
    if (config.truth.present) {
        out << "\n[truth]\n";
        if (toy) {
            out << "gamma = " << fmt(config.truth.theta[0]) << "\n";
        } else {
            const std::size_t bands = config.model.breakpoints.size() - 1;
            out << "alpha = ";
            for (std::size_t i = 0; i < bands; ++i)
                out << (i > 0 ? "," : "") << fmt(config.truth.theta[i]);
            out << "\n";
            out << "gamma1 = " << fmt(config.truth.theta[bands]) << "\n";
            out << "gamma2 = " << fmt(config.truth.theta[bands + 1]) << "\n";
            out << "gamma3 = " << fmt(config.truth.theta[bands + 2]) << "\n";
        }
    }
    out << "\n[sampler]\n";
    out << "algorithm = "
        << (config.sampler.algorithm == SamplerConfig::Algorithm::pm_rwm ? "pm_rwm" : "apt") << "\n";
    out << "iterations = " << config.sampler.iterations << "\n";
    out << "burn_in = " << config.sampler.burn_in << "\n";
    out << "draws = " << config.sampler.draws << "\n";
    out << "sigma0 = " << fmt(config.sampler.sigma0) << "\n";
    if (config.sampler.algorithm == SamplerConfig::Algorithm::apt)
        out << "levels = " << config.sampler.levels << "\n";
    out << "seed = " << config.sampler.seed << "\n";
    out << "\n[solver]\n";
    if (config.solver.kind == SolverConfig::Kind::exact) {
        out << "kind = exact\n";
    } else {
        out << "kind = cohort\n";
        out << "epsilon = " << fmt(config.solver.epsilon) << "\n";
    }
    out << "\n[convergence]\n";
    out << "k_max = " << config.convergence.k_max << "\n";
    out << "runs = " << config.convergence.runs << "\n";
    out << "\n[output]\n";
    out << "directory = " << config.output.directory << "\n";
    return out.str();
}

}  // namespace serofit
