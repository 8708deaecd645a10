#pragma once

// Grid functions on the truncated star graph and the four form kinds.

#include <cstddef>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "walsh/domain.hpp"

namespace walsh {

/// M rays, N nodes per ray (node 0 is the origin), uniform spacing h.
/// The truncated ray is [0, L] with L = (N - 1) h.
struct Grid {
    std::size_t rays = 0;
    std::size_t nodes = 0;
    double h = 0.0;

    Grid() = default;
    Grid(std::size_t rays, std::size_t nodes, double h);

    double length() const noexcept { return static_cast<double>(nodes - 1) * h; }
    double radius(std::size_t node) const noexcept { return static_cast<double>(node) * h; }

    /// Index of the node sitting at r. AlignmentError if r is not a node.
    std::size_t node_at(double r) const;

    /// ConfigError unless L >= 10 a. Only needed when a trace radius is
    /// under test; resolvent comparisons on a shared grid do not need it.
    void require_trace_room(double trace_radius) const;

    bool operator==(const Grid&) const = default;
};

enum class OriginMode {
    Shared,  // single value at r = 0 (Walsh, Barrier)
    PerRay,  // one value per ray at r = 0+ (Reflecting, Snapping)
};

/// Values f[ray][node] stored row-major. In Shared mode every ray's node-0
/// entry holds the same origin value.
class DiscreteFunction {
public:
    DiscreteFunction(const Grid& grid, OriginMode mode);
    DiscreteFunction(const Grid& grid, OriginMode mode, std::vector<double> values);

    /// Samples fn(ray, r). In Shared mode fn(ray, 0) must agree across rays
    /// (ShapeError otherwise).
    static DiscreteFunction sample(const Grid& grid, OriginMode mode,
                                   const std::function<double(std::size_t, double)>& fn);
    static DiscreteFunction constant(const Grid& grid, OriginMode mode, double value);

    const Grid& grid() const noexcept { return grid_; }
    OriginMode mode() const noexcept { return mode_; }

    double operator()(std::size_t ray, std::size_t node) const noexcept {
        return values_[ray * grid_.nodes + node];
    }
    double& operator()(std::size_t ray, std::size_t node) noexcept {
        return values_[ray * grid_.nodes + node];
    }

    double origin(std::size_t ray) const noexcept { return (*this)(ray, 0); }
    /// Shared mode: writes the value on every ray.
    void set_origin(double value) noexcept;

    const std::vector<double>& values() const noexcept { return values_; }

    /// Throws ShapeError if the Shared-mode invariant is broken.
    void check_invariants() const;

    /// Shared mode copy with origin value sum_j w_j f(0, j).
    DiscreteFunction to_shared(const AngularMeasure& measure) const;
    /// PerRay mode copy (values unchanged).
    DiscreteFunction to_per_ray() const;

    /// Degrees of freedom in the form's ordering (see dof_count).
    std::vector<double> to_dofs() const;
    static DiscreteFunction from_dofs(const Grid& grid, OriginMode mode,
                                      const std::vector<double>& dofs);

private:
    Grid grid_;
    OriginMode mode_;
    std::vector<double> values_;
};

/// Shared: 1 + M (N - 1) unknowns (origin first, then rays without origin).
/// PerRay: M N unknowns, ray-major.
std::size_t dof_count(const Grid& grid, OriginMode mode) noexcept;
std::size_t dof_index(const Grid& grid, OriginMode mode, std::size_t ray,
                      std::size_t node) noexcept;

/// E (reflecting), E^s (snapping out, coupling kappa), E^W (Walsh),
/// E^eps (barrier with profile b).
struct FormKind {
    enum class Type { Reflecting, Snapping, Walsh, Barrier };

    Type type = Type::Walsh;
    double kappa = 0.0;
    std::optional<BarrierProfile> profile;

    static FormKind reflecting() { return {Type::Reflecting, 0.0, std::nullopt}; }
    static FormKind snapping(double kappa);
    static FormKind walsh() { return {Type::Walsh, 0.0, std::nullopt}; }
    static FormKind barrier(BarrierProfile profile);

    OriginMode origin_mode() const noexcept {
        return (type == Type::Reflecting || type == Type::Snapping) ? OriginMode::PerRay
                                                                    : OriginMode::Shared;
    }
    std::string name() const;
};

/// Conductivity of cell [r_i, r_{i+1}) for the kind: b inside a barrier, 1 elsewhere.
/// AlignmentError if a barrier breakpoint is not a node.
std::vector<double> cell_conductivities(const FormKind& kind, const Grid& grid);

}  // namespace walsh
