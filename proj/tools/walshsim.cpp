// walshsim: run experiments, list the registry, run the acceptance suite.
//
// Precedence for every setting: command-line flag > WALSHSIM_OUTPUT_DIR
// (output directory only) > config file > built-in default.

#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"

#include "walsh/errors.hpp"
#include "walsh/harness.hpp"

namespace {

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw walsh::ConfigError("cannot read config file '" + path + "'");
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

int run_command(const std::string& path, const std::vector<std::string>& sets,
                const std::optional<std::uint64_t>& seed, const std::optional<unsigned>& threads,
                const std::string& output, bool quiet) {
    walsh::ExperimentConfig cfg;
    try {
        cfg = walsh::parse_config_text(slurp(path));
        for (const std::string& s : sets) walsh::apply_override(cfg, s);
        if (seed) cfg.seed = *seed;
        if (threads) cfg.threads = *threads;
        cfg.output_dir = output.empty() ? walsh::resolve_output_dir(cfg.output_dir) : output;
        walsh::validate_config(cfg);
    } catch (const walsh::ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return walsh::kExitConfigError;
    }

    walsh::ExperimentOutput out;
    try {
        out = walsh::run_experiment(cfg);
    } catch (const walsh::ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return walsh::kExitConfigError;
    } catch (const walsh::AlignmentError& e) {
        std::cerr << "config error in experiment '" << cfg.experiment << "': " << e.what() << '\n';
        return walsh::kExitConfigError;
    } catch (const std::exception& e) {
        std::cerr << "internal error in experiment '" << cfg.experiment << "': " << e.what() << '\n';
        return walsh::kExitInternal;
    }
    for (const std::string& w : out.warnings) std::cerr << "warning: " << w << '\n';
    const auto written = walsh::write_outputs(out, cfg.output_dir);
    if (!quiet) {
        std::cout << walsh::summary_csv(out);
        for (const std::string& p : written) std::cerr << "wrote " << p << '\n';
    }
    return out.passed() ? walsh::kExitPass : walsh::kExitGateFailure;
}

int list_command(bool as_json) {
    const auto& registry = walsh::experiment_registry();
    if (as_json) {
        nlohmann::json j = nlohmann::json::array();
        for (const auto& e : registry)
            j.push_back({{"id", e.id},
                         {"description", e.description},
                         {"gates", e.gates},
                         {"stochastic", e.stochastic},
                         {"defaults", walsh::serialize_config(e.defaults())}});
        std::cout << j.dump(2) << '\n';
        return walsh::kExitPass;
    }
    for (const auto& e : registry) {
        std::cout << e.id << (e.stochastic ? "  (stochastic)" : "") << "\n    " << e.description
                  << '\n';
        for (const auto& g : e.gates) std::cout << "    gate: " << g << '\n';
    }
    return walsh::kExitPass;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Walsh Brownian motion, snapping-out motion and thin-barrier forms"};
    app.require_subcommand(1);

    std::string config_path, output;
    std::vector<std::string> sets;
    std::optional<std::uint64_t> seed;
    std::optional<unsigned> threads;
    bool quiet = false;
    auto* run = app.add_subcommand("run", "Run one experiment from a JSON config file");
    run->add_option("config", config_path, "Config file")->required();
    run->add_option("--set", sets, "Override a field, e.g. --set sim.n_paths=1000");
    run->add_option("--seed", seed, "Master seed");
    run->add_option("--threads", threads, "Worker threads");
    run->add_option("--output", output, "Output directory");
    run->add_flag("-q,--quiet", quiet, "Do not echo the summary");

    bool as_json = false;
    auto* list = app.add_subcommand("list", "List experiments, descriptions and gates");
    list->add_flag("--json", as_json, "Emit JSON including default configs");

    walsh::AcceptanceOptions accept_opts;
    auto* accept = app.add_subcommand("accept", "Run the gated acceptance suite");
    accept->add_option("--seed", accept_opts.seed, "Master seed");
    accept->add_option("--threads", accept_opts.threads, "Worker threads");
    accept->add_option("--only", accept_opts.only, "Criterion ids to run");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? walsh::kExitPass : walsh::kExitConfigError;
    }

    try {
        if (*run) return run_command(config_path, sets, seed, threads, output, quiet);
        if (*list) return list_command(as_json);
        const auto results = walsh::run_acceptance(accept_opts, std::cout);
        for (const auto& r : results)
            if (!r.pass) return walsh::kExitGateFailure;
        return walsh::kExitPass;
    } catch (const walsh::ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return walsh::kExitConfigError;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << '\n';
        return walsh::kExitInternal;
    }
}
