#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "walsh/analytic.hpp"
#include "walsh/errors.hpp"
#include "walsh/montecarlo.hpp"
#include "walsh/oracles.hpp"
#include "walsh/stats.hpp"

using namespace walsh;

namespace {

bool within(double estimate, double truth, double se, double sigmas = 4.0) {
    return std::abs(estimate - truth) <= sigmas * se;
}

double binomial_se(double p, std::size_t n) { return std::sqrt(p * (1.0 - p) / double(n)); }

}  // namespace

TEST_CASE("reflected step: endpoint law is reflected Brownian motion") {
    for (double r : {0.0, 0.3, 1.0}) {
        RandomStream rng(100 + std::uint64_t(r * 10));
        std::vector<double> x(50000);
        for (double& v : x) v = reflected_step(r, 0.5, rng).r;
        std::sort(x.begin(), x.end());
        CHECK(ks_distance(x, [r](double y) { return reflected_bm_cdf(y, r, 0.5); }) < 0.01);
    }
}

TEST_CASE("reflected step: contact probability 2 Phi(-r / sqrt(dt))") {
    RandomStream rng(5);
    const double r = 0.4, dt = 0.25;
    const std::size_t n = 100000;
    std::size_t hits = 0;
    for (std::size_t i = 0; i < n; ++i) hits += reflected_step(r, dt, rng).hit_origin;
    const double p = 2.0 * normal_cdf(-r / std::sqrt(dt));
    CHECK(within(double(hits) / double(n), p, binomial_se(p, n)));
}

TEST_CASE("reflected step: mean local time from the origin") {
    RandomStream rng(9);
    const double dt = 0.3;
    std::vector<double> l(100000);
    for (double& v : l) v = reflected_step(0.0, dt, rng).local_time;
    const MeanEstimate m = mean_estimate(l);
    CHECK(within(m.mean, 2.0 * std::sqrt(2.0 * dt / std::numbers::pi), m.standard_error));
    // Local time only accrues on contact.
    RandomStream rng2(10);
    for (int i = 0; i < 10000; ++i) {
        const ReflectedStep s = reflected_step(0.5, 0.01, rng2);
        if (!s.hit_origin) CHECK(s.local_time == 0.0);
        CHECK(s.local_time >= 0.0);
    }
}

TEST_CASE("summed local time is step-size independent") {
    // E l_T from r = 0.2 with coarse and fine steps.
    const double T = 0.5, r0 = 0.2, exact = expected_local_time(r0, T);
    for (double dt : {0.5, 0.05, 0.005}) {
        std::vector<double> l(40000);
        for_each_path(l.size(), 77, 1, [&](std::uint64_t i, RandomStream& rng) {
            double r = r0, acc = 0.0;
            for (double t = 0.0; t < T - 1e-12; t += dt) {
                const ReflectedStep s = reflected_step(r, dt, rng);
                r = s.r;
                acc += s.local_time;
            }
            l[i] = acc;
        });
        const MeanEstimate m = mean_estimate(l);
        CHECK(within(m.mean, exact, m.standard_error));
    }
}

TEST_CASE("random-walk local time oracle agrees with the exact mean") {
    const MeanEstimate m = random_walk_local_time(0.0, 0.01, 1e-3, 50000, 4);
    CHECK(within(m.mean, expected_local_time(0.0, 0.01), m.standard_error, 5.0));
    CHECK(expected_local_time(0.0, 2.0) == doctest::Approx(2.0 * std::sqrt(4.0 / std::numbers::pi)));
    CHECK(expected_local_time(50.0, 1.0) < 1e-12);
}

TEST_CASE("conditioned hitting time stays below its limit") {
    RandomStream rng(12);
    for (int i = 0; i < 20000; ++i) {
        const double level = 0.01 + rng.uniform();
        const double limit = 0.001 + rng.uniform();
        const double t = conditioned_hitting_time(level, limit, rng);
        CHECK(t > 0.0);
        CHECK(t <= limit);
    }
}

TEST_CASE("bridge crossing: deterministic cases and frequency") {
    RandomStream rng(13);
    CHECK(bridge_reaches(1.0, 0.2, 1.0, 0.1, rng));
    CHECK(bridge_reaches(0.0, 2.0, 1.0, 0.1, rng));
    const double x0 = 0.2, x1 = 0.5, level = 1.0, dt = 0.3;
    const double p = std::exp(-2.0 * (level - x0) * (level - x1) / dt);
    std::size_t hits = 0;
    const std::size_t n = 100000;
    for (std::size_t i = 0; i < n; ++i) hits += bridge_reaches(x0, x1, level, dt, rng);
    CHECK(within(double(hits) / double(n), p, binomial_se(p, n)));
}

TEST_CASE("adaptive step clamps (d/3)^2") {
    SimConfig c;
    c.dt = 1e-2;
    c.dt_min = 1e-6;
    CHECK(adaptive_step(3.0, c) == 1e-2);
    CHECK(adaptive_step(0.03, c) == doctest::Approx(1e-4));
    CHECK(adaptive_step(0.0, c) == 1e-6);
}

TEST_CASE("simulation config validation") {
    SimConfig c;
    CHECK_NOTHROW(c.validate());
    c.dt = 0.0;
    CHECK_THROWS_AS(c.validate(), ConfigError);
    c = SimConfig{};
    c.n_paths = 0;
    CHECK_THROWS_AS(c.validate(), ConfigError);
    c = SimConfig{};
    c.dt_min = 1.0;
    CHECK_THROWS_AS(c.validate(), ConfigError);
}

TEST_CASE("WBM exit: same-ray mass r/a and eta spread") {
    const AngularMeasure eta = AngularMeasure::with_weights({0.1, 0.2, 0.3, 0.4});
    SimConfig c;
    c.dt = 1e-2;
    std::vector<ExitRecord> rec(20000);
    for_each_path(rec.size(), 21, 1, [&](std::uint64_t i, RandomStream& rng) {
        rec[i] = wbm_exit({1, 0.6}, eta, 1.0, c, rng);
    });
    const HittingEstimate e = estimate_hitting(rec, 1, 4);
    CHECK(within(e.same_ray_mass, 0.6, binomial_se(0.6, rec.size())));
    const std::vector<double> w(eta.weights().begin(), eta.weights().end());
    CHECK(chi_square_probabilities(e.mixture_counts, w).p_value > 1e-3);
    for (const ExitRecord& r : rec) {
        CHECK(r.point.r == 1.0);
        if (r.kind == ExitKind::SameRay) CHECK(r.point.ray == 1);
    }
}

TEST_CASE("WBM from the origin: half-normal radius, ray ~ eta") {
    const AngularMeasure eta = AngularMeasure::uniform(3);
    std::vector<double> radii(20000);
    std::vector<std::uint64_t> rays(3, 0);
    std::vector<StarPoint> end(radii.size());
    for_each_path(radii.size(), 22, 1, [&](std::uint64_t i, RandomStream& rng) {
        end[i] = wbm_state_at({0, 0.0}, eta, 0.4, 0.01, rng);
    });
    for (std::size_t i = 0; i < end.size(); ++i) {
        radii[i] = end[i].r;
        ++rays[end[i].ray];
    }
    std::sort(radii.begin(), radii.end());
    CHECK(ks_distance(radii, [](double x) { return half_normal_cdf(x, 0.4); }) < 0.015);
    CHECK(chi_square_probabilities(rays, std::vector<double>(3, 1.0 / 3.0)).p_value > 1e-3);
}

TEST_CASE("SNOWB: rebirth count tracks kappa times local time") {
    const AngularMeasure eta = AngularMeasure::uniform(4);
    SimConfig c;
    c.kappa = 3.0;
    c.horizon = 0.5;
    c.dt = 1e-2;
    std::vector<double> count(10000);
    for_each_path(count.size(), 23, 1, [&](std::uint64_t i, RandomStream& rng) {
        const PathSample p = snowb_path({0, 0.0}, eta, c, rng);
        count[i] = double(p.rebirths.size());
        for (const RebirthRecord& r : p.rebirths) CHECK(r.local_time_at_death > 0.0);
    });
    const MeanEstimate m = mean_estimate(count);
    CHECK(within(m.mean, 3.0 * expected_local_time(0.0, 0.5), m.standard_error));
}

TEST_CASE("SNOWB: kappa -> 0 never kills, huge kappa kills at the first contact") {
    const AngularMeasure eta = AngularMeasure::uniform(4);
    RandomStream rng(24);
    WalkerState s = snowb_start({2, 0.1}, 1e-12, rng);
    std::vector<RebirthRecord> recs;
    snowb_advance(s, 1.0, eta, 1e-12, rng, &recs);
    CHECK(recs.empty());
    CHECK(s.point.ray == 2);

    WalkerState t = snowb_start({2, 0.0}, 1e9, rng);
    snowb_advance(t, 1e-4, eta, 1e9, rng, &recs);
    CHECK_FALSE(recs.empty());
}

TEST_CASE("SNOWB first passage: probability of reaching R with no rebirth") {
    // Reflected motion killed at rate kappa per unit local time reaches R
    // before the kill with probability (r0 + g) / (R + g), g = 1/(2 kappa).
    const AngularMeasure eta = AngularMeasure::uniform(4);
    const double kappa = 1.0, r0 = 0.2, level = 1.0;
    SimConfig c;
    c.dt = 1e-2;
    c.dt_min = 1e-6;
    std::vector<FirstPassage> fp(20000);
    for_each_path(fp.size(), 25, 1, [&](std::uint64_t i, RandomStream& rng) {
        fp[i] = snowb_first_passage({0, r0}, eta, kappa, level, c, rng);
    });
    std::size_t none = 0;
    for (const FirstPassage& f : fp) {
        none += f.switches == 0;
        if (f.switches == 0) CHECK(f.ray == 0);
    }
    const double g = 0.5 / kappa;
    const double q = (r0 + g) / (level + g);
    CHECK(within(double(none) / double(fp.size()), q, binomial_se(q, fp.size())));
}

TEST_CASE("one-dimensional exits: probability r/a and Laplace transform") {
    SimConfig c;
    c.dt = 1e-2;
    std::vector<double> out(40000), lap(40000);
    for_each_path(out.size(), 26, 1, [&](std::uint64_t i, RandomStream& rng) {
        const IntervalExit e = bm_interval_exit(0.3, 1.0, c, rng);
        out[i] = e.at_outer ? 1.0 : 0.0;
        lap[i] = std::exp(-0.5 * bm_symmetric_exit_time(1.0, c, rng));
    });
    const MeanEstimate mo = mean_estimate(out), ml = mean_estimate(lap);
    CHECK(within(mo.mean, 0.3, mo.standard_error));
    CHECK(within(ml.mean, bm_exit_laplace(0.0, 1.0, 0.5).symmetric, ml.standard_error));
}

TEST_CASE("barrier walk: exit probabilities are scale ratios") {
    const AngularMeasure eta = AngularMeasure::uniform(4);
    const BarrierProfile profile = BarrierProfile::constant(0.1, 0.25);
    SimConfig c;
    c.outer_radius = 1.0;
    c.outer_h = 0.05;
    const BarrierWalkScheme scheme(profile, 0.0125, c);
    CHECK(scheme.nodes().front() == 0.0);
    CHECK(scheme.nodes().back() == doctest::Approx(1.0));
    CHECK_THROWS_AS(scheme.node_of(0.11), AlignmentError);

    std::vector<JumpChainSample> runs(20000);
    for_each_path(runs.size(), 27, 1, [&](std::uint64_t i, RandomStream& rng) {
        runs[i] = scheme.sample({0, 0.15}, eta, std::numeric_limits<double>::infinity(), rng);
    });
    std::size_t touched = 0;
    for (const JumpChainSample& s : runs) touched += s.terminal().kind != ExitKind::SameRay;
    const double p = (profile.scale(1.0) - profile.scale(0.15)) / profile.scale(1.0);
    CHECK(within(double(touched) / double(runs.size()), p, binomial_se(p, runs.size())));
    const HittingEstimate e = estimate_hitting(runs, 0, 4);
    CHECK(within(e.same_ray_mass, 1.0 - p, binomial_se(1.0 - p, runs.size())));
}

TEST_CASE("barrier walk: mean exit time of the free interval") {
    // b = 1 everywhere: from r on (0, R) the walk is absorbed only at R; the
    // reflecting exit time is R^2 - r^2.
    const AngularMeasure eta = AngularMeasure::uniform(2);
    SimConfig c;
    c.outer_radius = 1.0;
    const BarrierWalkScheme scheme(BarrierProfile::constant(0.1, 1.0), 0.05, c);
    std::vector<double> t(20000);
    for_each_path(t.size(), 28, 1, [&](std::uint64_t i, RandomStream& rng) {
        t[i] = scheme.sample({0, 0.5}, eta, std::numeric_limits<double>::infinity(), rng)
                   .terminal()
                   .elapsed;
    });
    const MeanEstimate m = mean_estimate(t);
    CHECK(within(m.mean, 0.75, m.standard_error));
}

TEST_CASE("estimators reject empty input") {
    CHECK_THROWS_AS(estimate_hitting(std::vector<ExitRecord>{}, 0, 4), EmptyInputError);
    std::vector<JumpChainSample> horizon_only(1);
    horizon_only[0].records.push_back({{0, 0.2}, ExitKind::Horizon, 1.0});
    CHECK_THROWS_AS(estimate_hitting(horizon_only, 0, 4), EmptyInputError);
}

TEST_CASE("parallel driver: output independent of thread count, errors propagate") {
    const AngularMeasure eta = AngularMeasure::uniform(4);
    SimConfig c;
    c.dt = 1e-2;
    const auto run = [&](unsigned threads) {
        std::vector<double> t(3001);
        for_each_path(t.size(), 99, threads, [&](std::uint64_t i, RandomStream& rng) {
            t[i] = wbm_exit({0, 0.3}, eta, 1.0, c, rng).elapsed;
        });
        return t;
    };
    const auto one = run(1);
    CHECK(one == run(3));
    CHECK(one == run(8));
    CHECK_THROWS_AS(for_each_path(100, 1, 3,
                                  [](std::uint64_t i, RandomStream&) {
                                      if (i == 57) throw SolverError("boom");
                                  }),
                    SolverError);
}

TEST_CASE("trace first passage matches SNOWB in mean") {
    const AngularMeasure eta = AngularMeasure::uniform(4);
    SimConfig c;
    c.dt = 1e-2;
    c.dt_min = 1e-5;
    const double a = 0.5;
    std::vector<double> ts(4000), tt(4000);
    for_each_path(ts.size(), 30, 1, [&](std::uint64_t i, RandomStream& rng) {
        ts[i] = snowb_first_passage({0, 0.2}, eta, 1.0, 1.0, c, rng).time;
    });
    for_each_path(tt.size(), 31, 1, [&](std::uint64_t i, RandomStream& rng) {
        tt[i] = trace_first_passage(a, {0, 0.2}, eta, 1.0, c, rng).time;
    });
    const MeanEstimate ms = mean_estimate(ts), mt = mean_estimate(tt);
    CHECK(within(ms.mean - mt.mean, 0.0, std::hypot(ms.standard_error, mt.standard_error)));
}
