#include <algorithm>
#include <chrono>
#include <cstdio>
#include <map>
#include <ostream>
#include <sstream>

#include "walsh/harness.hpp"

namespace walsh {

namespace {

struct Criterion {
    int id;
    std::string name;
    double budget_s;
    std::vector<ExperimentConfig> configs;
    // Optional row filter: only these quantities count toward the verdict.
    std::vector<std::string> quantities;
};

ExperimentConfig defaults_for(const std::string& id, const AcceptanceOptions& o) {
    ExperimentConfig c = find_experiment(id).defaults();
    if (c.seed) c.seed = o.seed;
    c.threads = o.threads;
    return c;
}

std::vector<Criterion> criteria(const AcceptanceOptions& o) {
    std::vector<Criterion> list;

    ExperimentConfig hit = defaults_for("hitting", o);
    hit.r = 0.3;
    hit.a = 1.0;
    hit.rays = 4;
    hit.n_paths = 100000;
    hit.dt = 1e-2;
    hit.dt_min = 1e-6;
    list.push_back({1, "hitting law of Walsh Brownian motion", 30.0, {hit},
                    {"same_ray_mass", "mixture_rays_chi2_pvalue", "exit_rays_chi2_pvalue"}});

    ExperimentConfig lap = defaults_for("laplace", o);
    lap.r = 0.3;
    lap.a = 1.0;
    lap.lambda = 0.5;
    lap.n_paths = 1000000;
    list.push_back({2, "Laplace transforms of exit times", 120.0, {lap}, {}});

    ExperimentConfig fel = defaults_for("feller", o);
    fel.a = 1.0;
    list.push_back({3, "Feller measure limit", 1.0, {fel}, {"limit_at_lambda_1e4"}});

    ExperimentConfig reb = defaults_for("snowb-rebirth", o);
    reb.kappa = 2.0;
    reb.n_paths = 4000;
    reb.horizon = 1.0;
    reb.dt = 1e-3;
    list.push_back({4, "snapping-out rebirth law and local time", 120.0, {reb},
                    {"rebirth_count", "rebirth_rays_chi2_pvalue", "mean_local_time_at_death",
                     "local_time_vs_random_walk"}});

    ExperimentConfig tr = defaults_for("trace-vs-snowb", o);
    tr.a = 0.5;
    tr.r = 0.2;
    tr.outer_radius = 1.0;
    tr.n_paths = 100000;
    list.push_back({5, "trace on {|x|>=a} against snapping-out motion", 180.0, {tr},
                    {"first_passage_ks"}});

    ExperimentConfig dar = defaults_for("darning", o);
    dar.kappas = {0.5, 1.0, 4.0};
    dar.n_paths = 100000;
    dar.time = 1.0;
    dar.dt = 1e-3;
    list.push_back({6, "darning recovers Walsh Brownian motion", 120.0, {dar}, {}});

    ExperimentConfig ker = defaults_for("kernels", o);
    ker.rays = 4;
    ker.nodes = 1000;
    ker.h = 1e-3;
    list.push_back({7, "kernel dimensions of the assembled forms", 10.0, {ker}, {}});

    std::vector<ExperimentConfig> sweeps;
    for (double alpha : {-1.0, -2.0, 0.0, -0.5}) {
        ExperimentConfig s = defaults_for("phase-sweep", o);
        s.alpha = alpha;
        s.kappa = 1.0;
        s.rays = 4;
        s.nodes = 2000;
        s.h = 5e-4;
        s.lambda = 1.0;
        // b = 1 at alpha = 0; alpha = -0.5 is a non-degenerate Walsh-side family.
        s.epsilons = alpha == -0.5 ? std::vector<double>{0.04, 0.02, 0.01, 0.005}
                                   : std::vector<double>{0.1, 0.05, 0.025, 0.0125};
        sweeps.push_back(s);
    }
    list.push_back({8, "phase transition of thin-barrier resolvents", 60.0, sweeps, {}});

    ExperimentConfig rec = defaults_for("recovery", o);
    list.push_back({9, "recovery-sequence energy identity", 10.0, {rec}, {}});

    ExperimentConfig gam = defaults_for("gamma-continuity", o);
    gam.gamma_limit = 1.0;
    gam.kappas = {1e-2, 1e-4, 1e-6};
    list.push_back({10, "continuity in the resistance", 30.0, {gam}, {}});
    return list;
}

bool counts(const Criterion& c, const ResultRow& row) {
    if (!row.pass) return false;
    if (c.quantities.empty()) return true;
    for (const std::string& q : c.quantities)
        if (row.quantity == q) return true;
    return false;
}

std::string short_num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4g", v);
    return buf;
}

// Reproducible text of one run: summary without clock plus every data file.
std::string fingerprint(const ExperimentOutput& out) {
    std::string s = summary_csv(out, false);
    for (const CsvFile& f : out.files) s += "\n@" + f.name + "\n" + f.content;
    return s;
}

constexpr int kDeterminismId = 11;
const int kStochastic[] = {1, 2, 4, 5, 6};

}  // namespace

std::vector<CriterionResult> run_acceptance(const AcceptanceOptions& options, std::ostream& log) {
    const auto wanted = [&](int id) {
        return options.only.empty() ||
               std::find(options.only.begin(), options.only.end(), id) != options.only.end();
    };
    const std::vector<Criterion> list = criteria(options);
    std::map<int, std::vector<std::string>> prints;
    std::vector<CriterionResult> results;

    const auto report = [&](const CriterionResult& r) {
        log << (r.pass ? "PASS" : "FAIL") << "  [" << r.id << "] " << r.name << ": " << r.detail;
        if (r.budget > 0.0) log << " (" << short_num(r.seconds) << " s / " << r.budget << " s)";
        log << std::endl;
    };

    for (const Criterion& c : list) {
        const bool needed_for_determinism =
            wanted(kDeterminismId) && std::find(std::begin(kStochastic), std::end(kStochastic), c.id) != std::end(kStochastic);
        if (!wanted(c.id) && !needed_for_determinism) continue;
        CriterionResult r{c.id, c.name, true, "", 0.0, c.budget_s};
        std::ostringstream detail;
        try {
            for (const ExperimentConfig& cfg : c.configs) {
                const ExperimentOutput out = run_experiment(cfg);
                r.seconds += out.wall_clock;
                prints[c.id].push_back(fingerprint(out));
                for (const ResultRow& row : out.rows) {
                    if (!counts(c, row)) continue;
                    r.pass = r.pass && *row.pass;
                    detail << (detail.tellp() > 0 ? "; " : "") << row.quantity;
                    if (c.configs.size() > 1) detail << "[alpha=" << cfg.alpha << "]";
                    detail << "=" << short_num(row.estimate);
                    if (row.error != 0.0) detail << " (err " << short_num(row.error) << ")";
                    if (!*row.pass) detail << " FAILED(" << row.gate << ")";
                }
            }
        } catch (const std::exception& e) {
            r.pass = false;
            detail << "error: " << e.what();
        }
        if (r.seconds > r.budget) {
            r.pass = false;
            detail << "; over runtime budget";
        }
        r.detail = detail.str();
        if (wanted(c.id)) {
            results.push_back(r);
            report(r);
        }
    }

    if (wanted(kDeterminismId)) {
        // Same seed, different thread count: byte-identical output.
        CriterionResult r{kDeterminismId, "seeded reproducibility across thread counts", true, "",
                          0.0, 0.0};
        std::ostringstream detail;
        AcceptanceOptions again = options;
        again.threads = options.threads == 2 ? 1 : 2;
        const std::vector<Criterion> rerun = criteria(again);
        try {
            for (const Criterion& c : rerun) {
                if (std::find(std::begin(kStochastic), std::end(kStochastic), c.id) == std::end(kStochastic))
                    continue;
                for (std::size_t k = 0; k < c.configs.size(); ++k) {
                    const ExperimentOutput out = run_experiment(c.configs[k]);
                    r.seconds += out.wall_clock;
                    const bool same = prints[c.id].size() > k && prints[c.id][k] == fingerprint(out);
                    r.pass = r.pass && same;
                    detail << (detail.tellp() > 0 ? "; " : "") << "[" << c.id << "] "
                           << (same ? "identical" : "DIFFERS");
                }
            }
        } catch (const std::exception& e) {
            r.pass = false;
            detail << "error: " << e.what();
        }
        r.detail = detail.str() + " (threads " + std::to_string(options.threads) + " vs " +
                   std::to_string(again.threads) + ")";
        results.push_back(r);
        report(r);
    }
    return results;
}

}  // namespace walsh
