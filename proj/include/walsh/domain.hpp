#pragma once

// State space of the star graph, the angular measure and barrier profiles.

#include <cstddef>
#include <span>
#include <vector>

#include "walsh/errors.hpp"
#include "walsh/random.hpp"

namespace walsh {

/// Finitely supported probability measure on the circle: one atom per ray.
///
/// Invariants (checked on construction, ConfigError otherwise): at least two
/// rays, strictly increasing angles in [0, 2pi), strictly positive weights
/// summing to one within 1e-12. Immutable afterwards.
class AngularMeasure {
public:
    AngularMeasure(std::vector<double> angles, std::vector<double> weights);

    /// M rays at equally spaced angles with weight 1/M each.
    static AngularMeasure uniform(std::size_t rays);
    /// Equally spaced angles carrying the given weights.
    static AngularMeasure with_weights(std::vector<double> weights);

    std::size_t size() const noexcept { return weights_.size(); }
    std::span<const double> angles() const noexcept { return angles_; }
    std::span<const double> weights() const noexcept { return weights_; }
    double weight(std::size_t ray) const { return weights_.at(ray); }

    /// Ray j with probability weight j. Consumes exactly one uniform draw.
    std::size_t sample(RandomStream& rng) const noexcept;

    /// Integral of per-ray values against the measure.
    double average(std::span<const double> per_ray) const;

    bool operator==(const AngularMeasure&) const = default;

private:
    std::vector<double> angles_;
    std::vector<double> weights_;
    std::vector<double> cumulative_;
};

inline std::size_t sample_angle(const AngularMeasure& measure, RandomStream& rng) noexcept {
    return measure.sample(rng);
}

enum class Topology { Glued, Separated };

/// Point (ray, r) of the star graph.
struct StarPoint {
    std::size_t ray = 0;
    double r = 0.0;

    bool operator==(const StarPoint&) const = default;
};

/// Throws ConfigError unless r >= 0 and ray < rays.
void validate_point(const StarPoint& point, std::size_t rays);

/// Equality under a topology. Glued: every point with r = 0 is the single
/// origin. Separated: (0, j) and (0, k) are distinct for j != k.
bool same_point(const StarPoint& a, const StarPoint& b, Topology topology) noexcept;

/// A star point together with the topology its equality is taken in.
struct PlacedPoint {
    StarPoint point;
    Topology topology = Topology::Separated;

    friend bool operator==(const PlacedPoint& a, const PlacedPoint& b) noexcept {
        const Topology t = (a.topology == Topology::Glued || b.topology == Topology::Glued)
                               ? Topology::Glued
                               : Topology::Separated;
        return same_point(a.point, b.point, t);
    }
};

/// (r, ray) -> (r + beta, ray).
StarPoint shift(const StarPoint& point, double beta);
/// Inverse of shift; requires r >= beta.
StarPoint unshift(const StarPoint& point, double beta);

/// Shorts the origin circle {0+} x S^1 into a single point: coordinates are
/// kept, equality becomes ray-blind at r = 0. Idempotent.
PlacedPoint darning_project(const StarPoint& point) noexcept;
PlacedPoint darning_project(const PlacedPoint& point) noexcept;

/// Piecewise-constant conductivity b on [0, epsilon).
///
/// `breakpoints` has one more entry than `values`, starts at 0 and ends at
/// epsilon; piece k is [breakpoints[k], breakpoints[k+1]) with conductivity
/// values[k]. The bounds are the min and max of the values.
class BarrierProfile {
public:
    BarrierProfile(std::vector<double> breakpoints, std::vector<double> values);

    static BarrierProfile constant(double epsilon, double conductivity);

    double epsilon() const noexcept { return breakpoints_.back(); }
    std::span<const double> breakpoints() const noexcept { return breakpoints_; }
    std::span<const double> values() const noexcept { return values_; }
    double lower_bound() const noexcept { return lower_; }
    double upper_bound() const noexcept { return upper_; }
    std::size_t pieces() const noexcept { return values_.size(); }

    /// Conductivity at r (1 beyond the barrier).
    double conductivity(double r) const noexcept;
    /// Scale function s(r) = int_0^r dq / a(q), with a = b inside, 1 outside.
    double scale(double r) const noexcept;

    bool operator==(const BarrierProfile&) const = default;

private:
    std::vector<double> breakpoints_;
    std::vector<double> values_;
    double lower_ = 0.0;
    double upper_ = 0.0;
};

/// Total thermal resistance of the barrier: int_0^eps 1/b.
double resistance(const BarrierProfile& profile) noexcept;

/// b(r) = (kappa * eps)^(-alpha) on [0, eps). Resistance kappa^alpha eps^(1+alpha).
BarrierProfile power_law_profile(double kappa, double alpha, double epsilon);

/// `inner` on [0, eps1) followed by `outer` translated to [eps1, eps1 + eps2).
BarrierProfile concatenate(const BarrierProfile& inner, const BarrierProfile& outer);

}  // namespace walsh
