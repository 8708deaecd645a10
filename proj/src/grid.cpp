#include "walsh/grid.hpp"

#include <cmath>
#include <sstream>
#include <utility>

namespace walsh {

Grid::Grid(std::size_t rays_, std::size_t nodes_, double h_) : rays(rays_), nodes(nodes_), h(h_) {
    if (rays < 2) throw ConfigError("grid: at least 2 rays required");
    if (nodes < 2) throw ConfigError("grid: at least 2 nodes per ray required");
    if (!(h > 0.0) || !std::isfinite(h)) throw ConfigError("grid: spacing must be positive");
}

std::size_t Grid::node_at(double r) const {
    const double q = r / h;
    const double k = std::round(q);
    if (std::abs(q - k) > 1e-9 * std::max(1.0, std::abs(q)) || k < 0.0 ||
        k > static_cast<double>(nodes - 1)) {
        std::ostringstream os;
        os << "grid: r = " << r << " is not a node of a grid with h = " << h << " and "
           << nodes << " nodes";
        throw AlignmentError(os.str());
    }
    return static_cast<std::size_t>(k);
}

void Grid::require_trace_room(double trace_radius) const {
    if (length() < 10.0 * trace_radius) {
        std::ostringstream os;
        os << "grid: truncation length " << length() << " is below 10 x trace radius "
           << trace_radius;
        throw ConfigError(os.str());
    }
}

DiscreteFunction::DiscreteFunction(const Grid& grid, OriginMode mode)
    : grid_(grid), mode_(mode), values_(grid.rays * grid.nodes, 0.0) {}

DiscreteFunction::DiscreteFunction(const Grid& grid, OriginMode mode, std::vector<double> values)
    : grid_(grid), mode_(mode), values_(std::move(values)) {
    if (values_.size() != grid.rays * grid.nodes)
        throw ShapeError("discrete function: expected " + std::to_string(grid.rays * grid.nodes) +
                         " values, got " + std::to_string(values_.size()));
    check_invariants();
}

DiscreteFunction DiscreteFunction::sample(const Grid& grid, OriginMode mode,
                                          const std::function<double(std::size_t, double)>& fn) {
    DiscreteFunction f(grid, mode);
    for (std::size_t j = 0; j < grid.rays; ++j)
        for (std::size_t i = 0; i < grid.nodes; ++i) f(j, i) = fn(j, grid.radius(i));
    f.check_invariants();
    return f;
}

DiscreteFunction DiscreteFunction::constant(const Grid& grid, OriginMode mode, double value) {
    return DiscreteFunction(grid, mode, std::vector<double>(grid.rays * grid.nodes, value));
}

void DiscreteFunction::set_origin(double value) noexcept {
    for (std::size_t j = 0; j < grid_.rays; ++j) (*this)(j, 0) = value;
}

void DiscreteFunction::check_invariants() const {
    if (mode_ != OriginMode::Shared) return;
    for (std::size_t j = 1; j < grid_.rays; ++j)
        if ((*this)(j, 0) != (*this)(0, 0))
            throw ShapeError("discrete function: shared-origin function has differing origin "
                             "values on rays 0 and " + std::to_string(j));
}

DiscreteFunction DiscreteFunction::to_shared(const AngularMeasure& measure) const {
    if (measure.size() != grid_.rays) throw ShapeError("to_shared: measure/grid ray mismatch");
    std::vector<double> origins(grid_.rays);
    for (std::size_t j = 0; j < grid_.rays; ++j) origins[j] = origin(j);
    const double mean = measure.average(origins);
    std::vector<double> values = values_;
    for (std::size_t j = 0; j < grid_.rays; ++j) values[j * grid_.nodes] = mean;
    return DiscreteFunction(grid_, OriginMode::Shared, std::move(values));
}

DiscreteFunction DiscreteFunction::to_per_ray() const {
    return DiscreteFunction(grid_, OriginMode::PerRay, values_);
}

std::size_t dof_count(const Grid& grid, OriginMode mode) noexcept {
    return mode == OriginMode::PerRay ? grid.rays * grid.nodes
                                      : 1 + grid.rays * (grid.nodes - 1);
}

std::size_t dof_index(const Grid& grid, OriginMode mode, std::size_t ray,
                      std::size_t node) noexcept {
    if (mode == OriginMode::PerRay) return ray * grid.nodes + node;
    return node == 0 ? 0 : 1 + ray * (grid.nodes - 1) + (node - 1);
}

std::vector<double> DiscreteFunction::to_dofs() const {
    std::vector<double> x(dof_count(grid_, mode_));
    for (std::size_t j = 0; j < grid_.rays; ++j)
        for (std::size_t i = 0; i < grid_.nodes; ++i)
            x[dof_index(grid_, mode_, j, i)] = (*this)(j, i);
    return x;
}

DiscreteFunction DiscreteFunction::from_dofs(const Grid& grid, OriginMode mode,
                                             const std::vector<double>& dofs) {
    if (dofs.size() != dof_count(grid, mode)) throw ShapeError("from_dofs: length mismatch");
    DiscreteFunction f(grid, mode);
    for (std::size_t j = 0; j < grid.rays; ++j)
        for (std::size_t i = 0; i < grid.nodes; ++i) f(j, i) = dofs[dof_index(grid, mode, j, i)];
    return f;
}

FormKind FormKind::snapping(double kappa) {
    if (!(kappa > 0.0) || !std::isfinite(kappa))
        throw ConfigError("snapping form: kappa must be positive and finite");
    return {Type::Snapping, kappa, std::nullopt};
}

FormKind FormKind::barrier(BarrierProfile profile) {
    return {Type::Barrier, 0.0, std::move(profile)};
}

std::string FormKind::name() const {
    switch (type) {
        case Type::Reflecting: return "reflecting";
        case Type::Snapping: return "snapping";
        case Type::Walsh: return "walsh";
        case Type::Barrier: return "barrier";
    }
    return "unknown";
}

std::vector<double> cell_conductivities(const FormKind& kind, const Grid& grid) {
    std::vector<double> a(grid.nodes - 1, 1.0);
    if (kind.type != FormKind::Type::Barrier) return a;
    const BarrierProfile& p = *kind.profile;
    const auto bp = p.breakpoints();
    const auto vals = p.values();
    for (std::size_t k = 0; k < vals.size(); ++k) {
        const std::size_t lo = grid.node_at(bp[k]);
        const std::size_t hi = grid.node_at(bp[k + 1]);
        for (std::size_t i = lo; i < hi; ++i) a[i] = vals[k];
    }
    return a;
}

}  // namespace walsh
