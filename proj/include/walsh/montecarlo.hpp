#pragma once

// Path simulators for Walsh's Brownian motion (WBM), the snapping-out Walsh
// Brownian motion (SNOWB), the trace of WBM outside a ball, and the radial
// random walk through a thin barrier.
//
// Every radial move is an exact draw from the reflected Brownian transition,
// so grid-time marginals are exact for any step size. Contacts with the
// origin and the local time spent there are drawn from the exact bridge laws
// given the step endpoints.

#include <algorithm>
#include <cstdint>
#include <exception>
#include <optional>
#include <thread>
#include <vector>

#include "walsh/domain.hpp"
#include "walsh/random.hpp"

namespace walsh {

/// Result of one reflected Brownian step from r over time dt.
struct ReflectedStep {
    double r = 0.0;          // |r + sqrt(dt) Z|
    bool hit_origin = false;  // the free path crossed 0 during the step
    double local_time = 0.0;  // boundary local time accrued at 0 during the step
};

/// One exact step of reflected Brownian motion.
///
/// The free endpoint x = r + sqrt(dt) Z is drawn first. Given (r, x), the
/// Tanaka local time L at 0 of the free path satisfies
///   P(L > l | r, x) = exp(-((r + |x| + l)^2 - (x - r)^2) / (2 dt)),
/// so a single uniform U decides both the contact (U <= P(L > 0), which is
/// exp(-2 r x / dt) for x >= 0 and 1 for x < 0) and, by inversion, L.
/// The returned local time is 2L: the occupation density at 0 of the
/// reflected path with respect to dr, i.e. the additive functional whose
/// Revuz measure is the Dirac mass at 0+.
ReflectedStep reflected_step(double r, double dt, RandomStream& rng) noexcept;

/// Whether a Brownian bridge from x0 to x1 (both below `level`) over dt
/// touches `level`. Always true if either endpoint is at or above it.
bool bridge_reaches(double x0, double x1, double level, double dt, RandomStream& rng) noexcept;

/// Draw of the hitting time of `level` > 0 by a standard Brownian motion
/// from 0, conditioned to be below `limit`.
double conditioned_hitting_time(double level, double limit, RandomStream& rng);

struct SimConfig {
    double dt = 1e-3;        // step (the largest step for adaptive runs)
    double dt_min = 1e-6;    // floor of adaptive steps near an absorbing level
    double horizon = 1.0;
    std::uint64_t n_paths = 1000;
    std::uint64_t seed = 0;
    double kappa = 1.0;        // SNOWB coupling
    double outer_radius = 1.0;  // absorbing truncation R for hitting runs
    double outer_h = 0.0;      // barrier walk spacing beyond the barrier (0: same as inside)
    unsigned threads = 1;

    /// ConfigError on non-positive steps, dt >= horizon, zero paths, ...
    void validate() const;
};

/// Step used near an absorbing level at distance d: (d/3)^2 clamped to
/// [dt_min, dt].
double adaptive_step(double distance, const SimConfig& config) noexcept;

/// Per-path state of a walker.
struct WalkerState {
    StarPoint point;
    double clock = 0.0;
    double local_time = 0.0;      // SNOWB only; reset at each rebirth
    double kill_threshold = 0.0;  // SNOWB only; Exp(kappa)
};

struct RebirthRecord {
    double time = 0.0;
    std::size_t ray_before = 0;
    std::size_t ray_after = 0;
    double local_time_at_death = 0.0;
};

struct PathSample {
    std::vector<double> times;
    std::vector<StarPoint> points;
    std::vector<RebirthRecord> rebirths;
};

enum class ExitKind {
    SameRay,        // reached the outer radius without touching the origin
    Rebirth,        // origin contact; the ray was redrawn from eta
    OuterBoundary,  // reached the outer radius after at least one origin contact
    Horizon,        // time horizon reached before any exit
};

struct ExitRecord {
    StarPoint point;
    ExitKind kind = ExitKind::SameRay;
    double elapsed = 0.0;
};

struct JumpChainSample {
    std::vector<ExitRecord> records;
    const ExitRecord& terminal() const { return records.back(); }
};

// ---------------------------------------------------------------------------
// Walsh's Brownian motion

/// Fixed-step WBM path on [0, horizon]: at each step the radius moves by
/// reflected_step and, on origin contact, the ray is redrawn from eta.
PathSample wbm_path(const StarPoint& start, const AngularMeasure& eta, const SimConfig& config,
                    RandomStream& rng);

/// State of WBM at time t (fixed steps of config.dt).
StarPoint wbm_state_at(const StarPoint& start, const AngularMeasure& eta, double t, double dt,
                       RandomStream& rng);

/// Runs WBM from `start` (r < a) until |x| = a with adaptive steps. The
/// record is SameRay or OuterBoundary; elapsed is the exit time.
ExitRecord wbm_exit(const StarPoint& start, const AngularMeasure& eta, double a,
                    const SimConfig& config, RandomStream& rng);

// ---------------------------------------------------------------------------
// Snapping-out WBM

/// Advances a SNOWB walker by `duration`: per-ray reflected motion whose
/// local time at 0+ is accumulated; when it exceeds the Exp(kappa)
/// threshold the walker is reborn at (0, theta'), theta' ~ eta, with no time
/// elapsing, and local time and threshold are reset.
void snowb_advance(WalkerState& state, double duration, const AngularMeasure& eta, double kappa,
                   RandomStream& rng, std::vector<RebirthRecord>* rebirths);

WalkerState snowb_start(const StarPoint& start, double kappa, RandomStream& rng);

/// Fixed-step SNOWB path on [0, horizon] with its rebirth records.
PathSample snowb_path(const StarPoint& start, const AngularMeasure& eta, const SimConfig& config,
                      RandomStream& rng);

struct FirstPassage {
    double time = 0.0;
    std::size_t ray = 0;
    std::size_t switches = 0;  // rebirths (SNOWB) or ray changes seen from outside (trace)
};

/// First time SNOWB started at `start` reaches radius `level`.
FirstPassage snowb_first_passage(const StarPoint& start, const AngularMeasure& eta, double kappa,
                                 double level, const SimConfig& config, RandomStream& rng);

// ---------------------------------------------------------------------------
// Trace of WBM on {|x| >= a}

/// WBM started at shift(start, a), watched only while |x| >= a: time spent
/// in the open ball is excised and the output is mapped back by the inverse
/// shift. Sampled at the (trace) times of each step ending outside the ball,
/// up to trace time `horizon`.
PathSample trace_wbm_path(double a, const StarPoint& start, const AngularMeasure& eta,
                          const SimConfig& config, RandomStream& rng);

/// First trace time at which the trace process (in shifted coordinates)
/// reaches `level`.
FirstPassage trace_first_passage(double a, const StarPoint& start, const AngularMeasure& eta,
                                 double level, const SimConfig& config, RandomStream& rng);

// ---------------------------------------------------------------------------
// One-dimensional exits (Laplace functionals)

struct IntervalExit {
    double time = 0.0;
    bool at_outer = false;  // exited at a (true) or at 0 (false)
};

/// Brownian motion from r in (0, a) until it leaves (0, a).
IntervalExit bm_interval_exit(double r, double a, const SimConfig& config, RandomStream& rng);

/// Exit time of (-a, a) by Brownian motion from 0 (first time |B| = a).
double bm_symmetric_exit_time(double a, const SimConfig& config, RandomStream& rng);

// ---------------------------------------------------------------------------
// Barrier random walk

/// Radial walk on the nodes {0, h, ..., eps} U {eps + H, eps + 2H, ..., R}
/// (H = config.outer_h, or h when zero). From an interior node the walk
/// steps left with probability (s(r+) - s(r)) / (s(r+) - s(r-)), s the
/// scale function of the barrier profile, and advances its clock by the
/// mean exit time of the neighbouring interval, int G(r, y) 2 dy. At the
/// origin the next ray is drawn from eta. Records every origin contact and
/// the terminal exit (outer radius or horizon).
///
/// AlignmentError if the start, the breakpoints or R are not nodes.
JumpChainSample barrier_walk(const StarPoint& start, const BarrierProfile& profile, double grid_h,
                             const AngularMeasure& eta, const SimConfig& config,
                             RandomStream& rng);

/// Precomputed transition probabilities and step durations of barrier_walk,
/// reusable across paths.
class BarrierWalkScheme {
public:
    BarrierWalkScheme(const BarrierProfile& profile, double grid_h, const SimConfig& config);

    JumpChainSample sample(const StarPoint& start, const AngularMeasure& eta, double horizon,
                           RandomStream& rng) const;

    const std::vector<double>& nodes() const noexcept { return nodes_; }
    /// Index of the node at r; AlignmentError if r is not a node.
    std::size_t node_of(double r) const;

private:
    std::vector<double> nodes_;
    std::vector<double> left_;      // exit-left probability per node
    std::vector<double> duration_;  // mean holding time per node
};

// ---------------------------------------------------------------------------
// Estimators

struct HittingEstimate {
    std::size_t n = 0;  // exited paths
    double same_ray_mass = 0.0;
    double same_ray_se = 0.0;
    std::vector<double> ray_mass;          // exit ray distribution over all exits
    std::vector<double> ray_se;
    std::vector<std::uint64_t> mixture_counts;  // exit rays of exits after an origin contact
    bool se_defined = false;                // false for a single record
};

/// Empirical exit kernel from the terminal records of the samples.
/// EmptyInputError if no sample exited.
HittingEstimate estimate_hitting(const std::vector<JumpChainSample>& samples, std::size_t start_ray,
                                 std::size_t rays);
HittingEstimate estimate_hitting(const std::vector<ExitRecord>& terminal, std::size_t start_ray,
                                 std::size_t rays);

// ---------------------------------------------------------------------------
// Parallel driver

/// Calls fn(i, rng_i) for i in [0, n) with rng_i = RandomStream::for_path(seed, i).
/// Work is split into contiguous chunks over `threads` workers; results must be
/// written by index so that output is independent of scheduling.
template <class Fn>
void for_each_path(std::uint64_t n, std::uint64_t seed, unsigned threads, Fn&& fn) {
    threads = std::max(1u, threads);
    const auto run = [&](std::uint64_t lo, std::uint64_t hi) {
        for (std::uint64_t i = lo; i < hi; ++i) {
            RandomStream rng = RandomStream::for_path(seed, i);
            fn(i, rng);
        }
    };
    if (threads == 1 || n < 2) {
        run(0, n);
        return;
    }
    const std::uint64_t chunk = (n + threads - 1) / threads;
    std::vector<std::exception_ptr> errors(threads);
    {
        std::vector<std::jthread> pool;
        for (unsigned t = 0; t < threads; ++t) {
            const std::uint64_t lo = std::min<std::uint64_t>(n, t * chunk);
            const std::uint64_t hi = std::min<std::uint64_t>(n, lo + chunk);
            if (lo < hi)
                pool.emplace_back([&, t, lo, hi] {
                    try {
                        run(lo, hi);
                    } catch (...) {
                        errors[t] = std::current_exception();
                    }
                });
        }
    }
    // Lowest chunk first, so the reported error does not depend on scheduling.
    for (const std::exception_ptr& e : errors)
        if (e) std::rethrow_exception(e);
}

}  // namespace walsh
