#include <cmath>
#include <cstdlib>
#include <limits>
#include <set>
#include <type_traits>

#include "walsh/errors.hpp"
#include "walsh/grid.hpp"
#include "walsh/harness.hpp"

namespace walsh {

using nlohmann::json;

namespace {

[[noreturn]] void field_error(const std::string& field, const std::string& why) {
    throw ConfigError(field + ": " + why);
}

template <class T>
T read(const json& section, const std::string& path, const std::string& key, T fallback) {
    if (!section.contains(key)) return fallback;
    const json& v = section.at(key);
    if constexpr (std::is_unsigned_v<T>) {
        if (!v.is_number_unsigned()) field_error(path + key, "must be a non-negative integer");
    } else if constexpr (std::is_floating_point_v<T>) {
        if (!v.is_number()) field_error(path + key, "must be a number");
    }
    try {
        return v.get<T>();
    } catch (const json::exception&) {
        field_error(path + key, "has the wrong type");
    }
}

double read_gamma(const json& section, double fallback) {
    if (!section.contains("gamma_limit")) return fallback;
    const json& v = section.at("gamma_limit");
    if (v.is_string()) {
        if (v.get<std::string>() == "inf") return std::numeric_limits<double>::infinity();
        field_error("domain.gamma_limit", "must be a number or \"inf\"");
    }
    if (!v.is_number()) field_error("domain.gamma_limit", "must be a number or \"inf\"");
    return v.get<double>();
}

void reject_unknown(const json& section, const std::string& path,
                    const std::set<std::string>& known) {
    if (!section.is_object()) field_error(path.empty() ? "config" : path, "must be an object");
    for (const auto& [key, value] : section.items())
        if (!known.contains(key)) field_error(path + key, "unknown key");
}

const std::set<std::string> kTop = {"experiment", "seed", "domain", "sim", "grid", "output"};
const std::set<std::string> kDomain = {"rays",   "weights",  "r",           "a",
                                       "outer_radius", "lambda", "kappa", "kappas",
                                       "alpha",  "epsilons", "gamma_limit", "time"};
const std::set<std::string> kSim = {"dt", "dt_min", "horizon", "n_paths", "threads"};
const std::set<std::string> kGrid = {"nodes", "h", "h_values"};
const std::set<std::string> kOutput = {"dir"};

}  // namespace

AngularMeasure ExperimentConfig::measure() const {
    if (weights.empty()) return AngularMeasure::uniform(rays);
    if (weights.size() != rays) field_error("domain.weights", "needs one weight per ray");
    return AngularMeasure::with_weights(weights);
}

SimConfig ExperimentConfig::sim() const {
    SimConfig s;
    s.dt = dt;
    s.dt_min = dt_min;
    s.horizon = horizon;
    s.n_paths = n_paths;
    s.seed = seed.value_or(0);
    s.kappa = kappa;
    s.outer_radius = outer_radius;
    s.threads = threads;
    return s;
}

ExperimentConfig parse_config(const json& j) {
    reject_unknown(j, "", kTop);
    if (!j.contains("experiment") || !j.at("experiment").is_string())
        field_error("experiment", "required string");
    const std::string id = j.at("experiment").get<std::string>();
    // Missing fields fall back to the experiment's registry defaults, except
    // the seed, which must be given explicitly.
    ExperimentConfig c;
    for (const ExperimentInfo& e : experiment_registry())
        if (e.id == id) c = e.defaults();
    c.experiment = id;
    c.seed.reset();
    if (j.contains("seed")) {
        if (!j.at("seed").is_number_unsigned()) field_error("seed", "must be a non-negative integer");
        c.seed = j.at("seed").get<std::uint64_t>();
    }
    const json empty = json::object();
    const json& d = j.value("domain", empty);
    reject_unknown(d, "domain.", kDomain);
    c.rays = read(d, "domain.", "rays", c.rays);
    c.weights = read(d, "domain.", "weights", c.weights);
    c.r = read(d, "domain.", "r", c.r);
    c.a = read(d, "domain.", "a", c.a);
    c.outer_radius = read(d, "domain.", "outer_radius", c.outer_radius);
    c.lambda = read(d, "domain.", "lambda", c.lambda);
    c.kappa = read(d, "domain.", "kappa", c.kappa);
    c.kappas = read(d, "domain.", "kappas", c.kappas);
    c.alpha = read(d, "domain.", "alpha", c.alpha);
    c.epsilons = read(d, "domain.", "epsilons", c.epsilons);
    c.gamma_limit = read_gamma(d, c.gamma_limit);
    c.time = read(d, "domain.", "time", c.time);

    const json& s = j.value("sim", empty);
    reject_unknown(s, "sim.", kSim);
    c.dt = read(s, "sim.", "dt", c.dt);
    c.dt_min = read(s, "sim.", "dt_min", c.dt_min);
    c.horizon = read(s, "sim.", "horizon", c.horizon);
    c.n_paths = read(s, "sim.", "n_paths", c.n_paths);
    c.threads = read(s, "sim.", "threads", c.threads);

    const json& g = j.value("grid", empty);
    reject_unknown(g, "grid.", kGrid);
    c.nodes = read(g, "grid.", "nodes", c.nodes);
    c.h = read(g, "grid.", "h", c.h);
    c.h_values = read(g, "grid.", "h_values", c.h_values);

    const json& o = j.value("output", empty);
    reject_unknown(o, "output.", kOutput);
    c.output_dir = read(o, "output.", "dir", c.output_dir);
    return c;
}

ExperimentConfig parse_config_text(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("config: not valid JSON (") + e.what() + ")");
    }
    return parse_config(j);
}

json serialize_config(const ExperimentConfig& c) {
    json j;
    j["experiment"] = c.experiment;
    if (c.seed) j["seed"] = *c.seed;
    j["domain"] = {{"rays", c.rays},       {"weights", c.weights},
                   {"r", c.r},             {"a", c.a},
                   {"outer_radius", c.outer_radius}, {"lambda", c.lambda},
                   {"kappa", c.kappa},     {"kappas", c.kappas},
                   {"alpha", c.alpha},     {"epsilons", c.epsilons},
                   {"time", c.time}};
    if (std::isinf(c.gamma_limit))
        j["domain"]["gamma_limit"] = "inf";
    else
        j["domain"]["gamma_limit"] = c.gamma_limit;
    j["sim"] = {{"dt", c.dt},
                {"dt_min", c.dt_min},
                {"horizon", c.horizon},
                {"n_paths", c.n_paths},
                {"threads", c.threads}};
    j["grid"] = {{"nodes", c.nodes}, {"h", c.h}, {"h_values", c.h_values}};
    j["output"] = {{"dir", c.output_dir}};
    return j;
}

void apply_override(ExperimentConfig& c, const std::string& assignment) {
    const auto eq = assignment.find('=');
    if (eq == std::string::npos) field_error(assignment, "override must look like key=value");
    const std::string key = assignment.substr(0, eq);
    const std::string text = assignment.substr(eq + 1);
    json value;
    try {
        value = json::parse(text);
    } catch (const json::parse_error&) {
        value = text;
    }
    json j = serialize_config(c);
    if (key == "experiment" || key == "seed") {
        j[key] = value;
    } else {
        const auto dot = key.find('.');
        if (dot == std::string::npos) field_error(key, "unknown key");
        const std::string section = key.substr(0, dot);
        if (!j.contains(section)) field_error(key, "unknown section");
        j[section][key.substr(dot + 1)] = value;
    }
    c = parse_config(j);
}

void validate_config(const ExperimentConfig& c) {
    const ExperimentInfo& info = find_experiment(c.experiment);
    if (info.stochastic && !c.seed) field_error("seed", "required for a stochastic experiment");
    if (c.rays < 2) field_error("domain.rays", "need at least 2 rays");
    try {
        (void)c.measure();
    } catch (const ConfigError& e) {
        field_error("domain.weights", e.what());
    }
    if (!(c.a > 0.0)) field_error("domain.a", "must be positive");
    if (!(c.lambda > 0.0)) field_error("domain.lambda", "must be positive");
    if (!(c.kappa > 0.0)) field_error("domain.kappa", "must be positive");
    for (double k : c.kappas)
        if (!(k > 0.0)) field_error("domain.kappas", "entries must be positive");
    for (double e : c.epsilons)
        if (!(e > 0.0)) field_error("domain.epsilons", "entries must be positive");
    if (!(c.gamma_limit > 0.0)) field_error("domain.gamma_limit", "must lie in (0, inf]");
    if (!(c.time > 0.0)) field_error("domain.time", "must be positive");
    if (c.nodes < 2) field_error("grid.nodes", "need at least 2 nodes");
    if (!(c.h > 0.0)) field_error("grid.h", "must be positive");
    for (double h : c.h_values)
        if (!(h > 0.0)) field_error("grid.h_values", "entries must be positive");
    if (c.output_dir.empty()) field_error("output.dir", "must not be empty");
    try {
        c.sim().validate();
    } catch (const ConfigError& e) {
        throw ConfigError(e.what());
    }
    if (!(c.r >= 0.0)) field_error("domain.r", "must be non-negative");

    const auto aligned = [&](double eps, double h, std::size_t nodes) {
        try {
            (void)Grid(c.rays, nodes, h).node_at(eps);
        } catch (const std::exception& e) {
            field_error("domain.epsilons", e.what());
        }
    };
    if (c.experiment == "phase-sweep" || c.experiment == "kernels")
        for (double e : c.epsilons.empty() ? std::vector<double>{0.1} : c.epsilons)
            aligned(e, c.h, c.nodes);
    if (c.experiment == "barrier-walk")
        for (double e : c.epsilons) aligned(e, c.h, std::size_t{1} << 30);
    if (c.experiment == "recovery")
        for (double h : c.h_values)
            aligned(c.epsilons.empty() ? 0.01 : c.epsilons.front(), h,
                    static_cast<std::size_t>(std::llround(1.0 / h)) + 1);
}

std::string resolve_output_dir(const std::string& configured) {
    if (const char* env = std::getenv("WALSHSIM_OUTPUT_DIR"); env && *env) return env;
    return configured;
}

}  // namespace walsh
