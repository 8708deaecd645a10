#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <numbers>
#include <sstream>

#include "walsh/analytic.hpp"
#include "walsh/discrete_forms.hpp"
#include "walsh/errors.hpp"
#include "walsh/harness.hpp"
#include "walsh/montecarlo.hpp"
#include "walsh/oracles.hpp"
#include "walsh/stats.hpp"

namespace walsh {

using nlohmann::json;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string num(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

// "key=value;key=value"
class Params {
public:
    Params& add(const std::string& key, double v) { return add(key, num(v)); }
    Params& add(const std::string& key, const std::string& v) {
        if (!text_.empty()) text_ += ';';
        text_ += key + '=' + v;
        return *this;
    }
    const std::string& str() const { return text_; }

private:
    std::string text_;
};

class Csv {
public:
    Csv(const std::string& schema, const std::string& columns) {
        out_ << "# schema=" << schema << "/1\n" << columns << '\n';
    }
    template <class... Ts>
    void row(const Ts&... values) {
        std::size_t k = 0;
        ((out_ << (k++ ? "," : "") << cell(values)), ...);
        out_ << '\n';
    }
    CsvFile file(const std::string& name) const { return {name, out_.str()}; }

private:
    static std::string cell(double v) { return num(v); }
    static std::string cell(const std::string& s) { return s; }
    static std::string cell(const char* s) { return s; }
    template <class T>
        requires std::is_integral_v<T>
    static std::string cell(T v) {
        return std::to_string(v);
    }
    std::ostringstream out_;
};

ResultRow gated(const std::string& experiment, const std::string& quantity, const Params& p,
                double estimate, double error, std::optional<double> oracle,
                const std::string& gate, bool pass) {
    return {experiment, quantity, p.str(), estimate, error, oracle, gate, pass, 0.0};
}

ResultRow info(const std::string& experiment, const std::string& quantity, const Params& p,
               double estimate, double error, std::optional<double> oracle = std::nullopt) {
    return {experiment, quantity, p.str(), estimate, error, oracle, "", std::nullopt, 0.0};
}

const char* kind_name(ExitKind k) {
    switch (k) {
        case ExitKind::SameRay: return "same_ray";
        case ExitKind::Rebirth: return "rebirth";
        case ExitKind::OuterBoundary: return "outer_boundary";
        case ExitKind::Horizon: return "horizon";
    }
    return "unknown";
}

std::vector<double> weights_of(const AngularMeasure& eta) {
    return {eta.weights().begin(), eta.weights().end()};
}

std::vector<double> sorted(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    return v;
}

// Distinct master seed per sub-run of an experiment.
std::uint64_t sub_seed(std::uint64_t seed, std::uint64_t k) {
    std::uint64_t s = seed ^ (0xa0761d6478bd642fULL * (k + 1));
    return splitmix64(s);
}

// ---------------------------------------------------------------------------
// hitting

constexpr double kSigmaGate = 3.0;
constexpr double kChiSquareLevel = 0.01;

ExperimentOutput run_hitting(const ExperimentConfig& c) {
    const std::string id = "hitting";
    const AngularMeasure eta = c.measure();
    const SimConfig sim = c.sim();
    if (!(c.r < c.a)) throw ConfigError("domain.r: must lie below domain.a");
    std::vector<ExitRecord> records(c.n_paths);
    for_each_path(c.n_paths, *c.seed, c.threads, [&](std::uint64_t i, RandomStream& rng) {
        records[i] = wbm_exit({0, c.r}, eta, c.a, sim, rng);
    });

    ExperimentOutput out;
    const HittingEstimate est = estimate_hitting(records, 0, eta.size());
    const Params p = Params().add("r", c.r).add("a", c.a).add("rays", double(eta.size()))
                         .add("n_paths", double(c.n_paths)).add("seed", double(*c.seed));
    const double n = static_cast<double>(est.n);
    const double q = c.r / c.a;
    const double band = kSigmaGate * std::sqrt(q * (1.0 - q) / n);
    out.rows.push_back(gated(id, "same_ray_mass", p, est.same_ray_mass, est.same_ray_se, q,
                             "|estimate-oracle|<=3*sqrt(q(1-q)/n)",
                             std::abs(est.same_ray_mass - q) <= band));

    const ChiSquareResult mix =
        chi_square_probabilities(est.mixture_counts, weights_of(eta));
    out.rows.push_back(gated(id, "mixture_rays_chi2_pvalue", p, mix.p_value, mix.statistic,
                             std::nullopt, "p>0.01", mix.p_value > kChiSquareLevel));

    std::vector<std::uint64_t> all(eta.size(), 0);
    std::vector<double> law(eta.size());
    for (const auto& rec : records) ++all[rec.point.ray];
    for (std::size_t j = 0; j < eta.size(); ++j)
        law[j] = (j == 0 ? q : 0.0) + (1.0 - q) * eta.weight(j);
    const ChiSquareResult full = chi_square_probabilities(all, law);
    out.rows.push_back(gated(id, "exit_rays_chi2_pvalue", p, full.p_value, full.statistic,
                             std::nullopt, "p>0.01", full.p_value > kChiSquareLevel));

    std::vector<double> times(records.size());
    for (std::size_t i = 0; i < records.size(); ++i) times[i] = records[i].elapsed;
    const MeanEstimate mt = mean_estimate(times);
    const double et = c.a * c.a - c.r * c.r;
    out.rows.push_back(gated(id, "mean_exit_time", p, mt.mean, mt.standard_error, et,
                             "|estimate-oracle|<=4*se",
                             std::abs(mt.mean - et) <= 4.0 * mt.standard_error));

    Csv csv("hitting-records", "path,exit_ray,kind,elapsed");
    for (std::size_t i = 0; i < records.size(); ++i)
        csv.row(i, records[i].point.ray, kind_name(records[i].kind), records[i].elapsed);
    out.files.push_back(csv.file("hitting_records"));
    return out;
}

// ---------------------------------------------------------------------------
// laplace

constexpr double kLaplaceRelTol = 0.01;

ExperimentOutput run_laplace(const ExperimentConfig& c) {
    const std::string id = "laplace";
    if (!(c.r > 0.0 && c.r < c.a)) throw ConfigError("domain.r: must lie in (0, a)");
    const SimConfig sim = c.sim();
    const std::uint64_t n = c.n_paths;
    std::vector<double> outer(n), origin(n), sym(n), t_interval(n), t_sym(n);
    for_each_path(n, *c.seed, c.threads, [&](std::uint64_t i, RandomStream& rng) {
        const IntervalExit e = bm_interval_exit(c.r, c.a, sim, rng);
        const double w = std::exp(-c.lambda * e.time);
        outer[i] = e.at_outer ? w : 0.0;
        origin[i] = e.at_outer ? 0.0 : w;
        t_interval[i] = e.time;
        t_sym[i] = bm_symmetric_exit_time(c.a, sim, rng);
        sym[i] = std::exp(-c.lambda * t_sym[i]);
    });
    const ExitLaplace oracle = bm_exit_laplace(c.r, c.a, c.lambda);
    const Params p = Params().add("r", c.r).add("a", c.a).add("lambda", c.lambda)
                         .add("n_paths", double(n)).add("seed", double(*c.seed));
    ExperimentOutput out;
    const auto add = [&](const std::string& q, const std::vector<double>& v, double o) {
        const MeanEstimate m = mean_estimate(v);
        out.rows.push_back(gated(id, q, p, m.mean, m.standard_error, o, "relative error<0.01",
                                 std::abs(m.mean - o) < kLaplaceRelTol * o));
    };
    add("outer_before_origin", outer, oracle.outer);
    add("origin_before_outer", origin, oracle.origin);
    add("symmetric_exit", sym, oracle.symmetric);

    // Exit-time histograms on [0, 4 a^2) in 200 bins plus an overflow bin.
    constexpr std::size_t bins = 200;
    const double top = 4.0 * c.a * c.a;
    std::vector<std::uint64_t> hi(bins + 1, 0), hs(bins + 1, 0);
    const auto bin = [&](double t) {
        return std::min<std::size_t>(bins, static_cast<std::size_t>(t / top * bins));
    };
    for (std::uint64_t i = 0; i < n; ++i) {
        ++hi[bin(t_interval[i])];
        ++hs[bin(t_sym[i])];
    }
    Csv csv("laplace-exit-histogram", "bin_lower,bin_upper,interval_exit_count,symmetric_exit_count");
    for (std::size_t b = 0; b <= bins; ++b) {
        const double lo = top * double(b) / bins;
        const double up = b == bins ? std::numeric_limits<double>::infinity() : top * double(b + 1) / bins;
        csv.row(lo, up, hi[b], hs[b]);
    }
    out.files.push_back(csv.file("laplace_exit_histogram"));
    return out;
}

// ---------------------------------------------------------------------------
// feller

constexpr double kFellerTol = 1e-4;
constexpr double kFellerLambdaTop = 1e4;

// lambda (H^lambda phi, H psi) for phi psi = 0, per unit phi_bar psi_bar.
double feller_closed_form(double a, double lambda) {
    const double k = std::sqrt(2.0 * lambda);
    const double e = std::exp(-2.0 * k * a);
    return 0.5 / a - 4.0 * lambda * e / (k * (1.0 - e * e));
}

ExperimentOutput run_feller(const ExperimentConfig& c) {
    const std::string id = "feller";
    const AngularMeasure eta = c.measure();
    const std::size_t m = eta.size();
    std::vector<double> phi(m, 0.0), psi(m, 0.0);
    for (std::size_t j = 0; j < m; ++j) {
        if (j % 2 == 0)
            phi[j] = 1.0 + static_cast<double>(j);
        else
            psi[j] = 1.0 + 0.5 * static_cast<double>(j);
    }
    const double pb = eta.average(phi);
    const double qb = eta.average(psi);
    const double limit = feller_pair_weight(c.a) * pb * qb;

    ExperimentOutput out;
    double previous = -1.0;
    bool increasing = true;
    for (double lambda : {10.0, 100.0, 1000.0, kFellerLambdaTop}) {
        const Params p = Params().add("a", c.a).add("lambda", lambda);
        const double value = feller_functional(phi, psi, eta, c.a, lambda);
        const double closed = feller_closed_form(c.a, lambda) * pb * qb;
        out.rows.push_back(gated(id, "quadrature_vs_closed_form", p, value,
                                 std::abs(value - closed), closed, "relative difference<1e-10",
                                 std::abs(value - closed) <= 1e-10 * std::abs(closed)));
        increasing = increasing && value > previous;
        previous = value;
        if (lambda == kFellerLambdaTop)
            out.rows.push_back(gated(id, "limit_at_lambda_1e4", p, value,
                                     std::abs(value - limit), limit, "|value-limit|<1e-4",
                                     std::abs(value - limit) < kFellerTol));
    }
    out.rows.push_back(gated(id, "monotone_in_lambda", Params().add("a", c.a),
                             increasing ? 1.0 : 0.0, 0.0, 1.0, "increasing", increasing));
    const SnappingParameter sp(c.kappa);
    const double coeff = trace_jump_coefficient(sp.trace_radius());
    out.rows.push_back(gated(id, "trace_jump_coefficient", Params().add("kappa", c.kappa), coeff,
                             std::abs(coeff - 0.5 * c.kappa), 0.5 * c.kappa,
                             "|1/(4a)-kappa/2|<=1e-15*kappa",
                             std::abs(coeff - 0.5 * c.kappa) <= 1e-15 * c.kappa));
    return out;
}

// ---------------------------------------------------------------------------
// snowb-rebirth

constexpr double kLocalTimeRelTol = 0.02;
constexpr double kLocalTimeHorizon = 0.01;
constexpr double kLocalTimeLattice = 1e-3;
constexpr std::uint64_t kLocalTimeReplications = 100000;
constexpr std::size_t kMinRebirths = 10000;
constexpr std::size_t kRebirthsPerWalker = 3;

ExperimentOutput run_snowb_rebirth(const ExperimentConfig& c) {
    const std::string id = "snowb-rebirth";
    const AngularMeasure eta = c.measure();
    SimConfig sim = c.sim();
    sim.kappa = c.kappa;
    // Count statistic on [0, horizon].
    std::vector<double> counts(c.n_paths);
    for_each_path(c.n_paths, *c.seed, c.threads, [&](std::uint64_t i, RandomStream& rng) {
        counts[i] = static_cast<double>(snowb_path({0, 0.0}, eta, sim, rng).rebirths.size());
    });
    // Death statistics from walkers run until kRebirthsPerWalker rebirths with no
    // time cap: a horizon would censor large thresholds.
    std::vector<std::vector<RebirthRecord>> per_path(c.n_paths);
    for_each_path(c.n_paths, sub_seed(*c.seed, 3), c.threads, [&](std::uint64_t i, RandomStream& rng) {
        WalkerState s = snowb_start({0, 0.0}, c.kappa, rng);
        std::vector<RebirthRecord>& recs = per_path[i];
        while (recs.size() < kRebirthsPerWalker) {
            // No local time accrues before the walker returns to the origin; jump
            // there with the exact hitting time (r/Z)^2, then take a unit step.
            if (s.point.r > 0.0) {
                const double z = rng.normal();
                s.clock += (s.point.r / z) * (s.point.r / z);
                s.point.r = 0.0;
            }
            snowb_advance(s, 1.0, eta, c.kappa, rng, &recs);
        }
        recs.resize(kRebirthsPerWalker);
    });

    std::vector<std::uint64_t> rays(eta.size(), 0);
    std::vector<double> deaths;
    Csv csv("snowb-rebirths", "walker,index,time,ray_before,ray_after,local_time_at_death");
    for (std::size_t i = 0; i < per_path.size(); ++i) {
        for (std::size_t k = 0; k < per_path[i].size(); ++k) {
            const RebirthRecord& r = per_path[i][k];
            ++rays[r.ray_after];
            deaths.push_back(r.local_time_at_death);
            csv.row(i, k, r.time, r.ray_before, r.ray_after, r.local_time_at_death);
        }
    }
    ExperimentOutput out;
    out.files.push_back(csv.file("snowb_rebirths"));
    const Params p = Params().add("kappa", c.kappa).add("horizon", c.horizon).add("dt", c.dt)
                         .add("n_paths", double(c.n_paths)).add("seed", double(*c.seed));
    const Params pd = Params().add("kappa", c.kappa).add("dt", c.dt)
                          .add("walkers", double(c.n_paths))
                          .add("rebirths_per_walker", double(kRebirthsPerWalker))
                          .add("seed", double(*c.seed));
    out.rows.push_back(gated(id, "rebirth_count", pd, double(deaths.size()), 0.0,
                             double(kMinRebirths), "count>=10000", deaths.size() >= kMinRebirths));

    const ChiSquareResult chi = chi_square_probabilities(rays, weights_of(eta));
    out.rows.push_back(gated(id, "rebirth_rays_chi2_pvalue", pd, chi.p_value, chi.statistic,
                             std::nullopt, "p>0.01", chi.p_value > kChiSquareLevel));

    const MeanEstimate lt = mean_estimate(deaths);
    const double inv = 1.0 / c.kappa;
    out.rows.push_back(gated(id, "mean_local_time_at_death", pd, lt.mean, lt.standard_error, inv,
                             "|estimate-1/kappa|<=3*se",
                             std::abs(lt.mean - inv) <= kSigmaGate * lt.standard_error));

    const MeanEstimate rc = mean_estimate(counts);
    const double expected = c.kappa * expected_local_time(0.0, c.horizon);
    out.rows.push_back(gated(id, "rebirths_per_path", p, rc.mean, rc.standard_error, expected,
                             "|estimate-kappa*E[l_t]|<=4*se",
                             std::abs(rc.mean - expected) <= 4.0 * rc.standard_error));

    // Accumulator against the random-walk oracle.
    std::vector<double> acc(kLocalTimeReplications);
    const std::uint64_t acc_seed = sub_seed(*c.seed, 1);
    for_each_path(kLocalTimeReplications, acc_seed, c.threads,
                  [&](std::uint64_t i, RandomStream& rng) {
                      WalkerState s{{0, 0.0}, 0.0, 0.0, std::numeric_limits<double>::infinity()};
                      const double step = std::min(c.dt, kLocalTimeHorizon);
                      while (s.clock < kLocalTimeHorizon * (1.0 - 1e-12))
                          snowb_advance(s, std::min(step, kLocalTimeHorizon - s.clock), eta,
                                        c.kappa, rng, nullptr);
                      acc[i] = s.local_time;
                  });
    const MeanEstimate am = mean_estimate(acc);
    const MeanEstimate rw = random_walk_local_time(0.0, kLocalTimeHorizon, kLocalTimeLattice,
                                                   kLocalTimeReplications, sub_seed(*c.seed, 2));
    const Params lp = Params().add("T", kLocalTimeHorizon).add("dt", c.dt)
                          .add("lattice", kLocalTimeLattice)
                          .add("replications", double(kLocalTimeReplications));
    const double rel = std::abs(am.mean - rw.mean) / rw.mean;
    out.rows.push_back(gated(id, "local_time_vs_random_walk", lp, am.mean, am.standard_error,
                             rw.mean, "relative difference<0.02", rel < kLocalTimeRelTol));
    const double exact = expected_local_time(0.0, kLocalTimeHorizon);
    out.rows.push_back(info(id, "local_time_exact_reference", lp, am.mean, am.standard_error, exact));
    out.rows.push_back(info(id, "random_walk_local_time", lp, rw.mean, rw.standard_error, exact));
    return out;
}

// ---------------------------------------------------------------------------
// trace-vs-snowb

constexpr double kTraceKsTol = 0.02;
constexpr double kExploratoryTime = 0.5;
constexpr std::uint64_t kExploratoryPaths = 10000;

ExperimentOutput run_trace_vs_snowb(const ExperimentConfig& c) {
    const std::string id = "trace-vs-snowb";
    const AngularMeasure eta = c.measure();
    const SimConfig sim = c.sim();
    const double kappa = SnappingParameter::from_trace_radius(c.a).kappa();
    const double level = c.outer_radius;
    if (!(c.r < level)) throw ConfigError("domain.r: must lie below domain.outer_radius");
    const std::uint64_t n = c.n_paths;
    std::vector<FirstPassage> sn(n), tr(n);
    for_each_path(n, sub_seed(*c.seed, 0), c.threads, [&](std::uint64_t i, RandomStream& rng) {
        sn[i] = snowb_first_passage({0, c.r}, eta, kappa, level, sim, rng);
    });
    for_each_path(n, sub_seed(*c.seed, 1), c.threads, [&](std::uint64_t i, RandomStream& rng) {
        tr[i] = trace_first_passage(c.a, {0, c.r}, eta, level, sim, rng);
    });

    std::vector<double> ts(n), tt(n), ss(n), st(n);
    std::uint64_t same_s = 0, same_t = 0;
    Csv csv("trace-vs-snowb-passages", "path,snowb_time,snowb_ray,snowb_rebirths,trace_time,trace_ray,trace_switches");
    for (std::uint64_t i = 0; i < n; ++i) {
        ts[i] = sn[i].time;
        tt[i] = tr[i].time;
        ss[i] = double(sn[i].switches);
        st[i] = double(tr[i].switches);
        same_s += sn[i].ray == 0;
        same_t += tr[i].ray == 0;
        csv.row(i, sn[i].time, sn[i].ray, sn[i].switches, tr[i].time, tr[i].ray, tr[i].switches);
    }
    ExperimentOutput out;
    out.files.push_back(csv.file("trace_vs_snowb_passages"));
    const Params p = Params().add("a", c.a).add("kappa", kappa).add("start", c.r)
                         .add("level", level).add("n_paths", double(n)).add("seed", double(*c.seed));
    const double ks = ks_two_sample(sorted(ts), sorted(tt));
    out.rows.push_back(gated(id, "first_passage_ks", p, ks, 0.0, std::nullopt, "ks<0.02",
                             ks < kTraceKsTol));
    const MeanEstimate ms = mean_estimate(ts), mt = mean_estimate(tt);
    out.rows.push_back(info(id, "snowb_mean_passage_time", p, ms.mean, ms.standard_error));
    out.rows.push_back(info(id, "trace_mean_passage_time", p, mt.mean, mt.standard_error));
    const MeanEstimate rs = mean_estimate(ss), rt = mean_estimate(st);
    out.rows.push_back(info(id, "snowb_mean_rebirths", p, rs.mean, rs.standard_error));
    out.rows.push_back(info(id, "trace_mean_origin_excursions", p, rt.mean, rt.standard_error));
    out.rows.push_back(info(id, "snowb_same_ray_fraction", p, double(same_s) / double(n), 0.0));
    out.rows.push_back(info(id, "trace_same_ray_fraction", p, double(same_t) / double(n), 0.0));

    // Exploratory: radial marginals at a fixed (trace) time. Not gated.
    SimConfig fixed = sim;
    fixed.horizon = kExploratoryTime;
    fixed.dt = std::min(sim.dt, 1e-3);
    std::vector<double> rs_t(kExploratoryPaths), rt_t(kExploratoryPaths);
    for_each_path(kExploratoryPaths, sub_seed(*c.seed, 2), c.threads,
                  [&](std::uint64_t i, RandomStream& rng) {
                      WalkerState s = snowb_start({0, c.r}, kappa, rng);
                      snowb_advance(s, kExploratoryTime, eta, kappa, rng, nullptr);
                      rs_t[i] = s.point.r;
                  });
    for_each_path(kExploratoryPaths, sub_seed(*c.seed, 3), c.threads,
                  [&](std::uint64_t i, RandomStream& rng) {
                      const PathSample path = trace_wbm_path(c.a, {0, c.r}, eta, fixed, rng);
                      const auto it = std::upper_bound(path.times.begin(), path.times.end(),
                                                       kExploratoryTime);
                      rt_t[i] = path.points[static_cast<std::size_t>(it - path.times.begin()) - 1].r;
                  });
    const double ks_time = ks_two_sample(sorted(rs_t), sorted(rt_t));
    out.rows.push_back(info(id, "exploratory_time_marginal_ks",
                            Params().add("t", kExploratoryTime).add("n_paths", double(kExploratoryPaths)),
                            ks_time, 0.0));
    return out;
}

// ---------------------------------------------------------------------------
// darning

constexpr double kDarningKsTol = 0.01;

ExperimentOutput run_darning(const ExperimentConfig& c) {
    const std::string id = "darning";
    const AngularMeasure eta = c.measure();
    const std::vector<double> kappas = c.kappas.empty() ? std::vector<double>{c.kappa} : c.kappas;
    ExperimentOutput out;
    Csv csv("darning-states", "kappa,path,ray,r");
    for (std::size_t k = 0; k < kappas.size(); ++k) {
        const double kappa = kappas[k];
        std::vector<StarPoint> end(c.n_paths);
        for_each_path(c.n_paths, sub_seed(*c.seed, k), c.threads,
                      [&](std::uint64_t i, RandomStream& rng) {
                          // The darned origin is one point; its ray label is drawn from eta.
                          WalkerState s = snowb_start({eta.sample(rng), 0.0}, kappa, rng);
                          while (s.clock < c.time * (1.0 - 1e-12))
                              snowb_advance(s, std::min(c.dt, c.time - s.clock), eta, kappa, rng,
                                            nullptr);
                          end[i] = darning_project(s.point).point;
                      });
        std::vector<double> radii(end.size());
        std::vector<std::uint64_t> rays(eta.size(), 0);
        for (std::size_t i = 0; i < end.size(); ++i) {
            radii[i] = end[i].r;
            ++rays[end[i].ray];
            csv.row(kappa, i, end[i].ray, end[i].r);
        }
        const Params p = Params().add("kappa", kappa).add("t", c.time).add("dt", c.dt)
                             .add("n_paths", double(c.n_paths)).add("seed", double(*c.seed));
        const double t = c.time;
        const double ks =
            ks_distance(sorted(radii), [t](double x) { return half_normal_cdf(x, t); });
        out.rows.push_back(gated(id, "radial_ks_half_normal", p, ks, 0.0, std::nullopt, "ks<0.01",
                                 ks < kDarningKsTol));
        const ChiSquareResult chi = chi_square_probabilities(rays, weights_of(eta));
        out.rows.push_back(gated(id, "angle_chi2_pvalue", p, chi.p_value, chi.statistic,
                                 std::nullopt, "p>0.01", chi.p_value > kChiSquareLevel));
    }
    out.files.push_back(csv.file("darning_states"));
    return out;
}

// ---------------------------------------------------------------------------
// Deterministic test functions for the resolvent sweeps: smooth, with
// distinct per-ray origin values.

std::vector<DiscreteFunction> sweep_basket(const Grid& grid, const AngularMeasure& eta) {
    const auto angles = eta.angles();
    std::vector<DiscreteFunction> basket;
    basket.push_back(DiscreteFunction::sample(grid, OriginMode::PerRay, [&](std::size_t j, double r) {
        return (1.0 + std::cos(angles[j])) * std::exp(-2.0 * r);
    }));
    basket.push_back(DiscreteFunction::sample(grid, OriginMode::PerRay, [&](std::size_t j, double r) {
        return 1.0 + 0.5 * std::sin(angles[j] + 0.3) * std::cos(3.0 * r);
    }));
    return basket;
}

std::string sweep_csv_text(const std::string& schema, const std::vector<SweepRow>& rows) {
    Csv csv(schema, "epsilon,gamma_bar,norm,lambda,grid_h,grid_L,M");
    for (const SweepRow& r : rows)
        csv.row(r.epsilon, r.gamma_bar, r.norm, r.lambda, r.grid_h, r.grid_L, r.rays);
    return csv.file("").content;
}

// ---------------------------------------------------------------------------
// phase-sweep

constexpr double kPhaseRatio = 0.5;
constexpr double kSolverFloor = 1e-10;

FormKind phase_target(double alpha, double kappa) {
    if (alpha < -1.0) return FormKind::reflecting();
    if (alpha == -1.0) return FormKind::snapping(0.5 * kappa);  // gamma_bar = 1/kappa
    return FormKind::walsh();
}

ExperimentOutput run_phase_sweep(const ExperimentConfig& c) {
    const std::string id = "phase-sweep";
    const AngularMeasure eta = c.measure();
    const Grid grid(eta.size(), c.nodes, c.h);
    const std::vector<double> eps =
        c.epsilons.empty() ? std::vector<double>{0.1, 0.05, 0.025, 0.0125} : c.epsilons;
    std::vector<BarrierProfile> profiles;
    for (double e : eps) profiles.push_back(power_law_profile(c.kappa, c.alpha, e));
    const FormKind target = phase_target(c.alpha, c.kappa);
    const auto basket = sweep_basket(grid, eta);

    ExperimentOutput out;
    for (std::size_t b = 0; b < basket.size(); ++b) {
        const SweepResult sweep = mosco_sweep(profiles, target, c.lambda, basket[b], grid, eta);
        out.warnings.insert(out.warnings.end(), sweep.warnings.begin(), sweep.warnings.end());
        const std::string g = "g" + std::to_string(b);
        out.files.push_back({"phase-sweep_" + g, sweep_csv_text("phase-sweep", sweep.rows)});
        const Params p = Params().add("alpha", c.alpha).add("kappa", c.kappa)
                             .add("target", target.name()).add("g", g).add("lambda", c.lambda)
                             .add("M", double(grid.rays)).add("N", double(grid.nodes))
                             .add("h", grid.h);
        for (const SweepRow& r : sweep.rows)
            out.rows.push_back(info(id, "resolvent_difference",
                                    Params(p).add("epsilon", r.epsilon).add("gamma_bar", r.gamma_bar),
                                    r.norm, r.relative_norm));
        const double first = sweep.rows.front().norm;
        const double last = sweep.rows.back().norm;
        bool degenerate = true;
        for (const BarrierProfile& pr : profiles)
            degenerate = degenerate && pr.lower_bound() == 1.0 && pr.upper_bound() == 1.0;
        if (degenerate) {
            // b = 1 everywhere: the barrier form is the Walsh form itself.
            double worst = 0.0;
            for (const SweepRow& r : sweep.rows) worst = std::max(worst, r.relative_norm);
            out.rows.push_back(gated(id, "norms_at_solver_floor", p, worst, 0.0, 0.0,
                                     "max relative norm<=1e-10", worst <= kSolverFloor));
            continue;
        }
        out.rows.push_back(gated(id, "strictly_decreasing", p,
                                 strictly_decreasing(sweep.rows) ? 1.0 : 0.0, 0.0, 1.0,
                                 "norms strictly decreasing in epsilon",
                                 strictly_decreasing(sweep.rows)));
        if (c.alpha == -1.0)
            out.rows.push_back(gated(id, "last_over_first", p, last / first, 0.0, std::nullopt,
                                     "ratio<0.5", last / first < kPhaseRatio));
        else
            out.rows.push_back(info(id, "last_over_first", p, last / first, 0.0));
    }
    return out;
}

// ---------------------------------------------------------------------------
// gamma-continuity

constexpr double kGeometricRatio = 0.7;
constexpr double kReflectingRelTol = 1e-6;

ExperimentOutput run_gamma_continuity(const ExperimentConfig& c) {
    const std::string id = "gamma-continuity";
    const AngularMeasure eta = c.measure();
    const Grid grid(eta.size(), c.nodes, c.h);
    const auto basket = sweep_basket(grid, eta);
    std::vector<double> gammas;
    for (int n = 1; n <= 6; ++n)
        gammas.push_back(std::isinf(c.gamma_limit) ? std::ldexp(1.0, n)
                                                   : c.gamma_limit * (1.0 + std::ldexp(1.0, -n)));
    const std::vector<double> kappas =
        c.kappas.empty() ? std::vector<double>{1e-2, 1e-4, 1e-6} : c.kappas;
    std::vector<double> big;
    for (double k : kappas) big.push_back(0.5 / k);

    ExperimentOutput out;
    for (std::size_t b = 0; b < basket.size(); ++b) {
        const std::string g = "g" + std::to_string(b);
        const Params p = Params().add("gamma_limit", c.gamma_limit).add("g", g)
                             .add("lambda", c.lambda).add("M", double(grid.rays))
                             .add("N", double(grid.nodes)).add("h", grid.h);
        const SweepResult s = gamma_continuity_sweep(gammas, c.gamma_limit, c.lambda, basket[b], grid, eta);
        out.files.push_back({"gamma-continuity_" + g, sweep_csv_text("gamma-continuity", s.rows)});
        double worst = 0.0;
        for (std::size_t k = 0; k < s.rows.size(); ++k) {
            out.rows.push_back(info(id, "resolvent_difference",
                                    Params(p).add("gamma_n", s.rows[k].gamma_bar), s.rows[k].norm,
                                    s.rows[k].relative_norm));
            if (k > 0) worst = std::max(worst, s.rows[k].norm / s.rows[k - 1].norm);
        }
        out.rows.push_back(gated(id, "max_successive_ratio", p, worst, 0.0, std::nullopt,
                                 "every ratio<0.7", worst < kGeometricRatio));

        const SweepResult r = gamma_continuity_sweep(big, std::numeric_limits<double>::infinity(),
                                                     c.lambda, basket[b], grid, eta);
        out.files.push_back({"gamma-continuity-reflecting_" + g,
                             sweep_csv_text("gamma-continuity-reflecting", r.rows)});
        for (std::size_t k = 0; k < r.rows.size(); ++k)
            out.rows.push_back(info(id, "difference_to_reflecting",
                                    Params(p).add("kappa_n", kappas[k]), r.rows[k].norm,
                                    r.rows[k].relative_norm));
        const double final_rel = r.rows.back().relative_norm;
        out.rows.push_back(gated(id, "reflecting_limit_relative_norm",
                                 Params(p).add("kappa_n", kappas.back()), final_rel, 0.0,
                                 std::nullopt, "relative norm<1e-6",
                                 final_rel < kReflectingRelTol && strictly_decreasing(r.rows)));
    }
    return out;
}

// ---------------------------------------------------------------------------
// recovery

constexpr double kRecoveryRelTol = 1e-3;
constexpr double kRecoveryRatioLow = 0.4;
constexpr double kRecoveryRatioHigh = 0.6;

// Origin values of the tent test functions c_j max(0, 1 - 3 r).
std::vector<double> tent_heights(std::size_t rays) {
    static const double pattern[] = {1.0, -1.0, 0.5, 2.0, -0.5, 1.5};
    std::vector<double> c(rays);
    for (std::size_t j = 0; j < rays; ++j) c[j] = pattern[j % 6];
    return c;
}

ExperimentOutput run_recovery(const ExperimentConfig& c) {
    const std::string id = "recovery";
    const AngularMeasure eta = c.measure();
    const double eps = c.epsilons.empty() ? 0.01 : c.epsilons.front();
    const BarrierProfile profile = power_law_profile(c.kappa, c.alpha, eps);
    const std::vector<double> hs =
        c.h_values.empty() ? std::vector<double>{1e-4, 5e-5} : c.h_values;
    const std::vector<double> heights = tent_heights(eta.size());
    // 1/2 sum_j w_j int (g_j')^2 for g_j = c_j max(0, 1 - 3 r): slope 3 c_j on [0, 1/3].
    double dirichlet = 0.0;
    for (std::size_t j = 0; j < eta.size(); ++j) dirichlet += eta.weight(j) * heights[j] * heights[j];
    dirichlet *= 0.5 * 9.0 / 3.0;
    const double target = recovery_energy_target(dirichlet, heights, profile, eta);

    ExperimentOutput out;
    std::vector<double> errors;
    for (double h : hs) {
        const auto nodes = static_cast<std::size_t>(std::llround(1.0 / h)) + 1;
        const Grid grid(eta.size(), nodes, h);
        const DiscreteFunction g = DiscreteFunction::sample(
            grid, OriginMode::PerRay,
            [&](std::size_t j, double r) { return heights[j] * std::max(0.0, 1.0 - 3.0 * r); });
        const DiscreteFunction gn = recovery_sequence(g, profile, eta);
        const double energy = form_energy(FormKind::barrier(profile), gn, eta);
        const double rel = std::abs(energy - target) / target;
        errors.push_back(rel);
        const Params p = Params().add("h", h).add("epsilon", eps).add("gamma_bar", resistance(profile));
        if (errors.size() == 1)
            out.rows.push_back(gated(id, "recovery_energy", p, energy, rel, target,
                                     "relative error<1e-3", rel < kRecoveryRelTol));
        else
            out.rows.push_back(info(id, "recovery_energy", p, energy, rel, target));
    }
    for (std::size_t k = 1; k < errors.size(); ++k) {
        const double ratio = errors[k] / errors[k - 1];
        out.rows.push_back(gated(id, "error_ratio_on_halving",
                                 Params().add("h_coarse", hs[k - 1]).add("h_fine", hs[k]), ratio,
                                 0.0, 0.5, "ratio in [0.4, 0.6]",
                                 ratio >= kRecoveryRatioLow && ratio <= kRecoveryRatioHigh));
    }
    return out;
}

// ---------------------------------------------------------------------------
// kernels

ExperimentOutput run_kernels(const ExperimentConfig& c) {
    const std::string id = "kernels";
    const AngularMeasure eta = c.measure();
    const Grid grid(eta.size(), c.nodes, c.h);
    const double eps = c.epsilons.empty() ? 0.1 : c.epsilons.front();
    const std::vector<std::pair<FormKind, std::size_t>> cases = {
        {FormKind::reflecting(), eta.size()},
        {FormKind::snapping(c.kappa), 1},
        {FormKind::walsh(), 1},
        {FormKind::barrier(power_law_profile(c.kappa, c.alpha, eps)), 1},
    };
    ExperimentOutput out;
    for (const auto& [kind, expected] : cases) {
        const FormMatrix form = assemble(kind, grid, eta);
        const std::size_t dim = kernel_dimension(form);
        const Params p = Params().add("form", kind.name()).add("M", double(grid.rays))
                             .add("N", double(grid.nodes)).add("h", grid.h);
        out.rows.push_back(gated(id, "kernel_dimension", p, double(dim), 0.0, double(expected),
                                 "exact match", dim == expected));
    }
    return out;
}

// ---------------------------------------------------------------------------
// barrier-walk

ExperimentOutput run_barrier_walk(const ExperimentConfig& c) {
    const std::string id = "barrier-walk";
    const AngularMeasure eta = c.measure();
    const std::vector<double> eps =
        c.epsilons.empty() ? std::vector<double>{0.1, 0.05, 0.025, 0.0125} : c.epsilons;
    SimConfig sim = c.sim();
    sim.outer_h = c.h_values.empty() ? 0.0125 : c.h_values.front();
    ExperimentOutput out;
    Csv csv("barrier-walk-records", "epsilon,path,kind,ray,elapsed,origin_visits");
    std::vector<double> freq;
    for (std::size_t k = 0; k < eps.size(); ++k) {
        const BarrierProfile profile = power_law_profile(c.kappa, c.alpha, eps[k]);
        const BarrierWalkScheme scheme(profile, c.h, sim);
        std::vector<JumpChainSample> runs(c.n_paths), capped(c.n_paths);
        for_each_path(c.n_paths, sub_seed(*c.seed, k), c.threads,
                      [&](std::uint64_t i, RandomStream& rng) {
                          runs[i] = scheme.sample({0, c.r}, eta, std::numeric_limits<double>::infinity(), rng);
                          capped[i] = scheme.sample({0, c.r}, eta, c.horizon, rng);
                      });
        std::uint64_t touched = 0, crossed = 0;
        for (std::size_t i = 0; i < runs.size(); ++i) {
            touched += runs[i].terminal().kind != ExitKind::SameRay;
            crossed += capped[i].records.size() > 1;
            const ExitRecord& t = runs[i].terminal();
            csv.row(eps[k], i, kind_name(t.kind), t.point.ray, t.elapsed, runs[i].records.size() - 1);
        }
        const double n = double(c.n_paths);
        const double s0 = profile.scale(c.r), sR = profile.scale(c.outer_radius);
        const double oracle = (sR - s0) / sR;
        const double est = double(touched) / n;
        const double se = std::sqrt(oracle * (1.0 - oracle) / n);
        const Params p = Params().add("alpha", c.alpha).add("kappa", c.kappa).add("epsilon", eps[k])
                             .add("gamma_bar", resistance(profile)).add("start", c.r)
                             .add("R", c.outer_radius).add("n_paths", n);
        out.rows.push_back(gated(id, "origin_before_outer", p, est, se, oracle,
                                 "|estimate-scale ratio|<=4*se", std::abs(est - oracle) <= 4.0 * se));
        freq.push_back(double(crossed) / n);
        out.rows.push_back(info(id, "origin_crossing_within_horizon", Params(p).add("horizon", c.horizon),
                                freq.back(), std::sqrt(freq.back() * (1.0 - freq.back()) / n)));
    }
    if (c.alpha < -1.0) {
        bool down = true;
        for (std::size_t k = 1; k < freq.size(); ++k) down = down && freq[k] < freq[k - 1];
        out.rows.push_back(gated(id, "crossing_frequency_decreasing", Params().add("alpha", c.alpha),
                                 down ? 1.0 : 0.0, 0.0, 1.0, "strictly decreasing as epsilon shrinks",
                                 down));
    }
    out.files.push_back(csv.file("barrier_walk_records"));
    return out;
}

// ---------------------------------------------------------------------------

ExperimentConfig base(const std::string& id, bool stochastic) {
    ExperimentConfig c;
    c.experiment = id;
    if (stochastic) c.seed = 42;
    return c;
}

std::vector<ExperimentInfo> build_registry() {
    std::vector<ExperimentInfo> r;
    r.push_back({"hitting",
                 "Exit law of Walsh Brownian motion from the ball |x|<a: mass r/a on the start ray, "
                 "the rest spread as eta; mean exit time a^2-r^2.",
                 {"same-ray mass within 3 binomial sigma of r/a", "mixture rays chi-square p>0.01",
                  "exit rays chi-square p>0.01", "mean exit time within 4 se"},
                 true,
                 [] {
                     ExperimentConfig c = base("hitting", true);
                     c.dt = 1e-2;
                     c.n_paths = 100000;
                     return c;
                 },
                 run_hitting});
    r.push_back({"laplace",
                 "Laplace transforms of one-dimensional Brownian exit times: "
                 "sinh(kr)/sinh(ka), sinh(k(a-r))/sinh(ka), 1/cosh(ka) with k=sqrt(2 lambda).",
                 {"each estimate within 1% relative of its closed form"},
                 true,
                 [] {
                     ExperimentConfig c = base("laplace", true);
                     c.dt = 1e-2;
                     c.n_paths = 1000000;
                     return c;
                 },
                 run_laplace});
    r.push_back({"feller",
                 "Feller measure of the trace on {|x|>=a}: lambda(H^lambda phi, H psi) increases to "
                 "phi_bar psi_bar/(2a); jump coefficient 1/(4a) equals kappa/2.",
                 {"quadrature matches closed form to 1e-10", "within 1e-4 of the limit at lambda=1e4",
                  "monotone in lambda", "1/(4a)=kappa/2"},
                 false,
                 [] { return base("feller", false); },
                 run_feller});
    r.push_back({"snowb-rebirth",
                 "Snapping-out construction: rebirth rays follow eta, local time at death is "
                 "Exp(kappa), rebirth count matches kappa E[l_t], local-time accumulator matches a "
                 "lattice random walk.",
                 {"at least 1e4 rebirths", "rebirth rays chi-square p>0.01",
                  "mean local time at death within 3 se of 1/kappa", "rebirths per path within 4 se",
                  "accumulator within 2% of the random-walk oracle"},
                 true,
                 [] {
                     ExperimentConfig c = base("snowb-rebirth", true);
                     c.kappa = 2.0;
                     c.n_paths = 4000;
                     return c;
                 },
                 run_snowb_rebirth});
    r.push_back({"trace-vs-snowb",
                 "Trace of Walsh Brownian motion on {|x|>=a}, shifted inward by a, against the "
                 "snapping-out motion with kappa=1/(2a): first-passage laws agree.",
                 {"two-sample KS of first-passage times < 0.02"},
                 true,
                 [] {
                     ExperimentConfig c = base("trace-vs-snowb", true);
                     c.a = 0.5;
                     c.r = 0.2;
                     c.outer_radius = 1.0;
                     c.dt = 1e-2;
                     c.dt_min = 1e-5;
                     c.n_paths = 100000;
                     return c;
                 },
                 run_trace_vs_snowb});
    r.push_back({"darning",
                 "Shorting the origin circle of the snapping-out motion gives Walsh Brownian motion: "
                 "from the origin, |x_t| is half-normal and the ray follows eta, for every kappa.",
                 {"radial KS vs half-normal < 0.01", "angle chi-square p>0.01"},
                 true,
                 [] {
                     ExperimentConfig c = base("darning", true);
                     c.kappas = {0.5, 1.0, 4.0};
                     c.n_paths = 100000;
                     return c;
                 },
                 run_darning});
    r.push_back({"phase-sweep",
                 "Thin-barrier forms with resistance gamma_bar(eps): resolvents approach the "
                 "reflecting (gamma_bar->inf), snapping-out kappa=1/(2 gamma_bar) or Walsh "
                 "(gamma_bar->0) resolvent as eps shrinks.",
                 {"norms strictly decreasing", "last/first < 0.5 for alpha=-1",
                  "solver floor when b=1"},
                 false,
                 [] {
                     ExperimentConfig c = base("phase-sweep", false);
                     c.lambda = 1.0;
                     c.nodes = 2000;
                     c.h = 5e-4;
                     c.epsilons = {0.1, 0.05, 0.025, 0.0125};
                     return c;
                 },
                 run_phase_sweep});
    r.push_back({"gamma-continuity",
                 "Continuity of the snapping-out resolvent in gamma_bar, including gamma_bar->inf "
                 "toward the reflecting resolvent.",
                 {"successive ratios < 0.7", "relative norm < 1e-6 at kappa_n = 1e-6"},
                 false,
                 [] {
                     ExperimentConfig c = base("gamma-continuity", false);
                     c.lambda = 1.0;
                     c.nodes = 2000;
                     c.h = 5e-4;
                     return c;
                 },
                 run_gamma_continuity});
    r.push_back({"recovery",
                 "Recovery sequence for the barrier forms: energy equals the Dirichlet part plus "
                 "(1/(2 gamma_bar)) int (g(0,theta)-c)^2 eta, up to O(h).",
                 {"relative error < 1e-3 at the coarse h", "error ratio in [0.4, 0.6] on halving h"},
                 false,
                 [] {
                     ExperimentConfig c = base("recovery", false);
                     c.kappa = 2.0;
                     c.alpha = -1.0;
                     c.epsilons = {0.01};
                     c.h_values = {1e-4, 5e-5};
                     return c;
                 },
                 run_recovery});
    r.push_back({"kernels",
                 "Null spaces of the assembled forms: per-ray constants for the reflecting form, "
                 "global constants for the snapping-out, Walsh and barrier forms.",
                 {"kernel dimension M, 1, 1, 1"},
                 false,
                 [] { return base("kernels", false); },
                 run_kernels});
    r.push_back({"barrier-walk",
                 "Radial walk through a thin barrier: origin-before-R probability equals the scale "
                 "ratio; with infinite limiting resistance the origin crossings die out.",
                 {"origin-before-R within 4 se of the scale ratio",
                  "crossing frequency decreasing for alpha<-1"},
                 true,
                 [] {
                     ExperimentConfig c = base("barrier-walk", true);
                     c.alpha = -2.0;
                     c.r = 0.1;
                     c.outer_radius = 1.0;
                     c.h = 0.0125 / 8.0;
                     c.h_values = {0.0125};
                     c.n_paths = 5000;
                     c.epsilons = {0.1, 0.05, 0.025, 0.0125};
                     return c;
                 },
                 run_barrier_walk});
    return r;
}

std::string quoted(const std::string& s) {
    std::string out = "\"";
    for (char ch : s) {
        if (ch == '"') out += '"';
        out += ch;
    }
    return out + '"';
}

}  // namespace

bool ExperimentOutput::passed() const {
    return std::all_of(rows.begin(), rows.end(),
                       [](const ResultRow& r) { return !r.pass.has_value() || *r.pass; });
}

const std::vector<ExperimentInfo>& experiment_registry() {
    static const std::vector<ExperimentInfo> registry = build_registry();
    return registry;
}

const ExperimentInfo& find_experiment(const std::string& id) {
    for (const ExperimentInfo& e : experiment_registry())
        if (e.id == id) return e;
    throw ConfigError("experiment: unknown id '" + id + "'");
}

ExperimentOutput run_experiment(const ExperimentConfig& config) {
    validate_config(config);
    const ExperimentInfo& info = find_experiment(config.experiment);
    const auto start = Clock::now();
    ExperimentOutput out = info.run(config);
    out.experiment = info.id;
    out.wall_clock = seconds_since(start);
    for (ResultRow& r : out.rows) r.wall_clock = out.wall_clock;
    return out;
}

std::string summary_csv(const ExperimentOutput& out, bool with_clock) {
    std::ostringstream os;
    os << "# schema=summary/1\n"
       << "experiment,quantity,parameters,estimate,error,oracle,gate,pass,wall_clock_s\n";
    for (const ResultRow& r : out.rows) {
        os << r.experiment << ',' << r.quantity << ',' << quoted(r.parameters) << ','
           << num(r.estimate) << ',' << num(r.error) << ',' << (r.oracle ? num(*r.oracle) : "")
           << ',' << quoted(r.gate) << ',' << (r.pass ? (*r.pass ? "pass" : "fail") : "") << ','
           << (with_clock ? num(r.wall_clock) : "") << '\n';
    }
    return os.str();
}

json summary_json(const ExperimentOutput& out) {
    json j;
    j["experiment"] = out.experiment;
    j["passed"] = out.passed();
    j["wall_clock_s"] = out.wall_clock;
    j["warnings"] = out.warnings;
    j["rows"] = json::array();
    for (const ResultRow& r : out.rows) {
        json row = {{"quantity", r.quantity},
                    {"parameters", r.parameters},
                    {"estimate", r.estimate},
                    {"error", r.error}};
        if (r.oracle) row["oracle"] = *r.oracle;
        if (r.pass) {
            row["gate"] = r.gate;
            row["pass"] = *r.pass;
        }
        j["rows"].push_back(row);
    }
    return j;
}

std::vector<std::string> write_outputs(const ExperimentOutput& out, const std::string& dir) {
    namespace fs = std::filesystem;
    fs::create_directories(dir);
    std::vector<std::string> written;
    const auto put = [&](const std::string& name, const std::string& text) {
        const fs::path path = fs::path(dir) / name;
        std::ofstream f(path, std::ios::binary);
        if (!f) throw std::runtime_error("cannot write " + path.string());
        f << text;
        written.push_back(path.string());
    };
    put(out.experiment + "_summary.csv", summary_csv(out));
    put(out.experiment + "_summary.json", summary_json(out).dump(2) + "\n");
    for (const CsvFile& f : out.files) put(f.name + ".csv", f.content);
    return written;
}

}  // namespace walsh
