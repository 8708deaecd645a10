#include "walsh/montecarlo.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include <boost/math/special_functions/erf.hpp>

#include "walsh/errors.hpp"

namespace walsh {

ReflectedStep reflected_step(double r, double dt, RandomStream& rng) noexcept {
    const double x = r + std::sqrt(dt) * rng.normal();
    const double u = rng.uniform_open0();
    ReflectedStep out;
    out.r = std::abs(x);
    // -log P(L > 0 | r, x)
    const double barrier = x < 0.0 ? 0.0 : 2.0 * r * x / dt;
    const double e = -std::log(u);
    if (e < barrier) return out;
    out.hit_origin = true;
    // (s + L)^2 = (x - r)^2 - 2 dt log u with s = r + |x|, solved without cancellation.
    const double s = r + out.r;
    const double d = x - r;
    const double num = 2.0 * dt * (e - barrier);
    const double tanaka = num / (std::sqrt(d * d + 2.0 * dt * e) + s);
    out.local_time = 2.0 * tanaka;
    return out;
}

bool bridge_reaches(double x0, double x1, double level, double dt, RandomStream& rng) noexcept {
    if (x0 >= level || x1 >= level) return true;
    const double p = std::exp(-2.0 * (level - x0) * (level - x1) / dt);
    return rng.uniform() < p;
}

double conditioned_hitting_time(double level, double limit, RandomStream& rng) {
    // tau = level^2 / Z^2 with |Z| restricted to (level / sqrt(limit), inf).
    const double z0 = level / std::sqrt(limit);
    const double tail = std::erfc(z0 / std::numbers::sqrt2);
    if (!(tail > 0.0)) return limit;
    const double z = std::numbers::sqrt2 * boost::math::erfc_inv(rng.uniform_open0() * tail);
    return std::min(limit, (level / z) * (level / z));
}

void SimConfig::validate() const {
    const auto fail = [](const std::string& field, const std::string& why) {
        throw ConfigError("sim." + field + ": " + why);
    };
    if (!(dt > 0.0) || !std::isfinite(dt)) fail("dt", "must be positive");
    if (!(dt_min > 0.0) || dt_min > dt) fail("dt_min", "must lie in (0, dt]");
    if (!(horizon > 0.0) || !std::isfinite(horizon)) fail("horizon", "must be positive");
    if (!(dt < horizon)) fail("dt", "must be smaller than the horizon");
    if (n_paths == 0) fail("n_paths", "must be positive");
    if (!(kappa > 0.0) || !std::isfinite(kappa)) fail("kappa", "must be positive");
    if (!(outer_radius > 0.0)) fail("outer_radius", "must be positive");
    if (!(outer_h >= 0.0)) fail("outer_h", "must be non-negative");
    if (threads == 0) fail("threads", "must be at least 1");
}

double adaptive_step(double distance, const SimConfig& config) noexcept {
    const double s = distance / 3.0;
    return std::clamp(s * s, config.dt_min, config.dt);
}

// ---------------------------------------------------------------------------

namespace {

std::size_t step_count(double horizon, double dt) {
    return static_cast<std::size_t>(std::ceil(horizon / dt - 1e-9));
}

double above_fraction(double r0, double r1, double level) {
    const bool a0 = r0 >= level;
    const bool a1 = r1 >= level;
    if (a0 && a1) return 1.0;
    if (!a0 && !a1) return 0.0;
    return (std::max(r0, r1) - level) / std::abs(r1 - r0);
}

// Time inside a step of length dt at which the upper level was reached.
double crossing_offset(double r0, double r1, double level, double dt) {
    if (r1 >= level) return dt * std::clamp((level - r0) / (r1 - r0), 0.0, 1.0);
    return 0.5 * dt;
}

}  // namespace

PathSample wbm_path(const StarPoint& start, const AngularMeasure& eta, const SimConfig& config,
                    RandomStream& rng) {
    validate_point(start, eta.size());
    PathSample out;
    const std::size_t n = step_count(config.horizon, config.dt);
    out.times.reserve(n + 1);
    out.points.reserve(n + 1);
    StarPoint p = start;
    double t = 0.0;
    out.times.push_back(t);
    out.points.push_back(p);
    for (std::size_t k = 0; k < n; ++k) {
        const double dt = std::min(config.dt, config.horizon - t);
        const ReflectedStep st = reflected_step(p.r, dt, rng);
        if (st.hit_origin) p.ray = eta.sample(rng);
        p.r = st.r;
        t = (k + 1 == n) ? config.horizon : t + dt;
        out.times.push_back(t);
        out.points.push_back(p);
    }
    return out;
}

StarPoint wbm_state_at(const StarPoint& start, const AngularMeasure& eta, double t, double dt,
                       RandomStream& rng) {
    validate_point(start, eta.size());
    StarPoint p = start;
    double clock = 0.0;
    while (clock < t) {
        const double step = std::min(dt, t - clock);
        const ReflectedStep st = reflected_step(p.r, step, rng);
        if (st.hit_origin) p.ray = eta.sample(rng);
        p.r = st.r;
        clock += step;
    }
    return p;
}

ExitRecord wbm_exit(const StarPoint& start, const AngularMeasure& eta, double a,
                    const SimConfig& config, RandomStream& rng) {
    validate_point(start, eta.size());
    if (!(start.r < a)) throw ConfigError("wbm_exit: start radius must be below a");
    StarPoint p = start;
    double t = 0.0;
    bool touched = false;
    for (;;) {
        const double dt = adaptive_step(a - p.r, config);
        const ReflectedStep st = reflected_step(p.r, dt, rng);
        if (st.hit_origin) {
            p.ray = eta.sample(rng);
            touched = true;
        }
        if (bridge_reaches(p.r, st.r, a, dt, rng)) {
            t += crossing_offset(p.r, st.r, a, dt);
            return {{p.ray, a}, touched ? ExitKind::OuterBoundary : ExitKind::SameRay, t};
        }
        p.r = st.r;
        t += dt;
    }
}

// ---------------------------------------------------------------------------

WalkerState snowb_start(const StarPoint& start, double kappa, RandomStream& rng) {
    WalkerState s;
    s.point = start;
    s.kill_threshold = rng.exponential(kappa);
    return s;
}

namespace {

std::size_t snowb_advance_count(WalkerState& state, double duration, const AngularMeasure& eta,
                                double kappa, RandomStream& rng,
                                std::vector<RebirthRecord>* rebirths) {
    std::size_t count = 0;
    double remaining = duration;
    while (remaining > 0.0) {
        const ReflectedStep st = reflected_step(state.point.r, remaining, rng);
        const double room = state.kill_threshold - state.local_time;
        if (st.local_time <= room) {
            state.point.r = st.r;
            state.local_time += st.local_time;
            state.clock += remaining;
            return count;
        }
        // Local time (occupation density, twice the Tanaka local time) reaches
        // the threshold at the first time the free path started at 0 climbs
        // r + room/2.
        const double tau =
            conditioned_hitting_time(state.point.r + 0.5 * room, remaining, rng);
        state.clock += tau;
        remaining -= tau;
        const std::size_t before = state.point.ray;
        state.point = {eta.sample(rng), 0.0};
        if (rebirths)
            rebirths->push_back({state.clock, before, state.point.ray, state.kill_threshold});
        state.local_time = 0.0;
        state.kill_threshold = rng.exponential(kappa);
        ++count;
    }
    return count;
}

}  // namespace

void snowb_advance(WalkerState& state, double duration, const AngularMeasure& eta, double kappa,
                   RandomStream& rng, std::vector<RebirthRecord>* rebirths) {
    snowb_advance_count(state, duration, eta, kappa, rng, rebirths);
}

PathSample snowb_path(const StarPoint& start, const AngularMeasure& eta, const SimConfig& config,
                      RandomStream& rng) {
    validate_point(start, eta.size());
    PathSample out;
    const std::size_t n = step_count(config.horizon, config.dt);
    out.times.reserve(n + 1);
    out.points.reserve(n + 1);
    WalkerState s = snowb_start(start, config.kappa, rng);
    out.times.push_back(0.0);
    out.points.push_back(s.point);
    for (std::size_t k = 0; k < n; ++k) {
        const double dt = std::min(config.dt, config.horizon - s.clock);
        snowb_advance(s, dt, eta, config.kappa, rng, &out.rebirths);
        if (k + 1 == n) s.clock = config.horizon;
        out.times.push_back(s.clock);
        out.points.push_back(s.point);
    }
    return out;
}

FirstPassage snowb_first_passage(const StarPoint& start, const AngularMeasure& eta, double kappa,
                                 double level, const SimConfig& config, RandomStream& rng) {
    validate_point(start, eta.size());
    if (!(start.r < level)) throw ConfigError("snowb_first_passage: start must lie below level");
    WalkerState s = snowb_start(start, kappa, rng);
    FirstPassage out;
    for (;;) {
        const double r0 = s.point.r;
        const double t0 = s.clock;
        const double dt = adaptive_step(level - r0, config);
        const std::size_t born = snowb_advance_count(s, dt, eta, kappa, rng, nullptr);
        out.switches += born;
        const double r1 = s.point.r;
        // After a rebirth inside the step the path restarted at 0, farther than
        // the step can carry it; only the endpoint is checked then.
        const bool crossed = born == 0 ? bridge_reaches(r0, r1, level, dt, rng) : r1 >= level;
        if (crossed) {
            out.time = t0 + (born == 0 ? crossing_offset(r0, r1, level, dt) : dt);
            out.ray = s.point.ray;
            return out;
        }
    }
}

// ---------------------------------------------------------------------------

PathSample trace_wbm_path(double a, const StarPoint& start, const AngularMeasure& eta,
                          const SimConfig& config, RandomStream& rng) {
    if (!(a > 0.0)) throw ConfigError("trace_wbm_path: a must be positive");
    validate_point(start, eta.size());
    PathSample out;
    StarPoint p = shift(start, a);
    double trace_time = 0.0;
    out.times.push_back(0.0);
    out.points.push_back(start);
    bool reborn = false;
    std::size_t before = p.ray;
    while (trace_time < config.horizon) {
        const double dt = adaptive_step(std::abs(p.r - a), config);
        const ReflectedStep st = reflected_step(p.r, dt, rng);
        if (st.hit_origin) {
            p.ray = eta.sample(rng);
            reborn = true;
        }
        trace_time += dt * above_fraction(p.r, st.r, a);
        p.r = st.r;
        if (p.r >= a) {
            if (reborn) {
                out.rebirths.push_back({trace_time, before, p.ray, 0.0});
                reborn = false;
            }
            before = p.ray;
            out.times.push_back(trace_time);
            out.points.push_back(unshift(p, a));
        }
    }
    return out;
}

FirstPassage trace_first_passage(double a, const StarPoint& start, const AngularMeasure& eta,
                                 double level, const SimConfig& config, RandomStream& rng) {
    if (!(a > 0.0)) throw ConfigError("trace_first_passage: a must be positive");
    validate_point(start, eta.size());
    if (!(start.r < level)) throw ConfigError("trace_first_passage: start must lie below level");
    const double top = level + a;
    StarPoint p = shift(start, a);
    double trace_time = 0.0;
    bool reborn = false;
    FirstPassage out;
    for (;;) {
        const double d = p.r >= a ? std::min(p.r - a, top - p.r) : a - p.r;
        const double dt = adaptive_step(d, config);
        const ReflectedStep st = reflected_step(p.r, dt, rng);
        if (st.hit_origin) {
            p.ray = eta.sample(rng);
            reborn = true;
        }
        if (st.r >= top || (p.r >= a && bridge_reaches(p.r, st.r, top, dt, rng))) {
            out.time = trace_time + crossing_offset(std::max(p.r, a), st.r, top, dt);
            out.ray = p.ray;
            if (reborn) ++out.switches;
            return out;
        }
        trace_time += dt * above_fraction(p.r, st.r, a);
        p.r = st.r;
        if (reborn && p.r >= a) {
            ++out.switches;
            reborn = false;
        }
    }
}

// ---------------------------------------------------------------------------

IntervalExit bm_interval_exit(double r, double a, const SimConfig& config, RandomStream& rng) {
    if (!(a > 0.0) || !(r > 0.0 && r < a))
        throw ConfigError("bm_interval_exit: need 0 < r < a");
    double x = r;
    double t = 0.0;
    for (;;) {
        const double dt = adaptive_step(std::min(x, a - x), config);
        const double x1 = x + std::sqrt(dt) * rng.normal();
        if (x1 >= a) return {t + dt * (a - x) / (x1 - x), true};
        if (x1 <= 0.0) return {t + dt * x / (x - x1), false};
        const double p_outer = std::exp(-2.0 * (a - x) * (a - x1) / dt);
        const double p_origin = std::exp(-2.0 * x * x1 / dt);
        const double u = rng.uniform();
        if (u < p_outer) return {t + 0.5 * dt, true};
        if (u < p_outer + p_origin) return {t + 0.5 * dt, false};
        x = x1;
        t += dt;
    }
}

double bm_symmetric_exit_time(double a, const SimConfig& config, RandomStream& rng) {
    if (!(a > 0.0)) throw ConfigError("bm_symmetric_exit_time: a must be positive");
    double r = 0.0;
    double t = 0.0;
    for (;;) {
        const double dt = adaptive_step(a - r, config);
        const ReflectedStep st = reflected_step(r, dt, rng);
        if (bridge_reaches(r, st.r, a, dt, rng)) return t + crossing_offset(r, st.r, a, dt);
        r = st.r;
        t += dt;
    }
}

// ---------------------------------------------------------------------------

HittingEstimate estimate_hitting(const std::vector<ExitRecord>& terminal, std::size_t start_ray,
                                 std::size_t rays) {
    HittingEstimate est;
    est.ray_mass.assign(rays, 0.0);
    est.ray_se.assign(rays, 0.0);
    est.mixture_counts.assign(rays, 0);
    std::size_t same = 0;
    std::vector<std::size_t> counts(rays, 0);
    for (const ExitRecord& rec : terminal) {
        if (rec.kind != ExitKind::SameRay && rec.kind != ExitKind::OuterBoundary) continue;
        if (rec.point.ray >= rays) throw ShapeError("estimate_hitting: ray index out of range");
        ++est.n;
        ++counts[rec.point.ray];
        if (rec.kind == ExitKind::SameRay && rec.point.ray == start_ray)
            ++same;
        else
            ++est.mixture_counts[rec.point.ray];
    }
    if (est.n == 0) throw EmptyInputError("estimate_hitting: no exit records");
    const double n = static_cast<double>(est.n);
    const auto se = [n](double p) { return std::sqrt(p * (1.0 - p) / n); };
    est.same_ray_mass = static_cast<double>(same) / n;
    est.same_ray_se = se(est.same_ray_mass);
    for (std::size_t j = 0; j < rays; ++j) {
        est.ray_mass[j] = static_cast<double>(counts[j]) / n;
        est.ray_se[j] = se(est.ray_mass[j]);
    }
    est.se_defined = est.n > 1;
    return est;
}

HittingEstimate estimate_hitting(const std::vector<JumpChainSample>& samples, std::size_t start_ray,
                                 std::size_t rays) {
    std::vector<ExitRecord> terminal;
    terminal.reserve(samples.size());
    for (const auto& s : samples)
        if (!s.records.empty()) terminal.push_back(s.terminal());
    return estimate_hitting(terminal, start_ray, rays);
}

}  // namespace walsh
