#include "walsh/discrete_forms.hpp"

#include <cmath>
#include <functional>
#include <ostream>
#include <sstream>

#include "walsh/errors.hpp"

namespace walsh {

FormMatrix assemble(const FormKind& kind, const Grid& grid, const AngularMeasure& eta) {
    if (grid.rays != eta.size())
        throw ShapeError("assemble: grid has " + std::to_string(grid.rays) + " rays, measure has " +
                         std::to_string(eta.size()));
    FormMatrix form;
    form.kind = kind;
    form.grid = grid;
    form.mode = kind.origin_mode();
    const std::size_t n = dof_count(grid, form.mode);
    const std::vector<double> a = cell_conductivities(kind, grid);

    std::vector<Eigen::Triplet<double>> triplets;
    triplets.reserve(4 * grid.rays * grid.nodes + 2 * grid.rays * grid.rays);
    const auto edge = [&](std::size_t p, std::size_t q, double c) {
        triplets.emplace_back(p, p, c);
        triplets.emplace_back(q, q, c);
        triplets.emplace_back(p, q, -c);
        triplets.emplace_back(q, p, -c);
    };
    for (std::size_t j = 0; j < grid.rays; ++j) {
        const double scale = 0.5 * eta.weight(j) / grid.h;
        for (std::size_t i = 0; i + 1 < grid.nodes; ++i)
            edge(dof_index(grid, form.mode, j, i), dof_index(grid, form.mode, j, i + 1),
                 scale * a[i]);
    }
    if (kind.type == FormKind::Type::Snapping) {
        if (!(kind.kappa > 0.0)) throw ConfigError("assemble: snapping form needs kappa > 0");
        for (std::size_t j = 0; j < grid.rays; ++j)
            for (std::size_t k = j + 1; k < grid.rays; ++k)
                edge(dof_index(grid, form.mode, j, 0), dof_index(grid, form.mode, k, 0),
                     kind.kappa * eta.weight(j) * eta.weight(k));
    }
    form.stiffness.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    form.stiffness.setFromTriplets(triplets.begin(), triplets.end());
    form.stiffness.makeCompressed();

    form.mass = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n));
    for (std::size_t j = 0; j < grid.rays; ++j)
        for (std::size_t i = 0; i < grid.nodes; ++i) {
            const bool end = i == 0 || i + 1 == grid.nodes;
            form.mass[static_cast<Eigen::Index>(dof_index(grid, form.mode, j, i))] +=
                eta.weight(j) * grid.h * (end ? 0.5 : 1.0);
        }
    return form;
}

// ---------------------------------------------------------------------------

ResolventSolver::ResolventSolver(const FormMatrix& form, double lambda)
    : form_(&form), lambda_(lambda) {
    if (!(lambda > 0.0) || !std::isfinite(lambda))
        throw ConfigError("resolvent: lambda must be positive");
    SparseMatrix m(form.stiffness.rows(), form.stiffness.cols());
    m.reserve(Eigen::VectorXi::Constant(m.cols(), 1));
    for (Eigen::Index i = 0; i < m.rows(); ++i) m.insert(i, i) = lambda * form.mass[i];
    system_ = form.stiffness + m;
    ldlt_.compute(system_);
    if (ldlt_.info() != Eigen::Success)
        throw SolverError("resolvent: factorization of lambda M + A failed (" + form.kind.name() +
                          ")");
}

DiscreteFunction ResolventSolver::solve(const DiscreteFunction& g,
                                        const AngularMeasure& eta) const {
    const FormMatrix& form = *form_;
    if (!(g.grid() == form.grid)) throw ShapeError("resolvent: g lives on a different grid");
    const DiscreteFunction gm = form.mode == g.mode() ? g
                                : form.mode == OriginMode::Shared ? g.to_shared(eta)
                                                                  : g.to_per_ray();
    const std::vector<double> gd = gm.to_dofs();
    const Eigen::Map<const Eigen::VectorXd> gv(gd.data(), static_cast<Eigen::Index>(gd.size()));
    const Eigen::VectorXd rhs = form.mass.cwiseProduct(gv);
    Eigen::VectorXd f = ldlt_.solve(rhs);
    if (ldlt_.info() != Eigen::Success) throw SolverError("resolvent: back-substitution failed");
    const double rn = rhs.norm();
    if (rn > 0.0) {
        f += ldlt_.solve(rhs - system_ * f);
        // Normwise backward error |r| / (|A| |f| + |b|) in the infinity norm.
        double a_norm = 0.0;
        for (Eigen::Index k = 0; k < system_.outerSize(); ++k) {
            double row = 0.0;
            for (SparseMatrix::InnerIterator it(system_, k); it; ++it) row += std::abs(it.value());
            a_norm = std::max(a_norm, row);  // symmetric: column sums equal row sums
        }
        const double res = (system_ * f - rhs).lpNorm<Eigen::Infinity>() /
                           (a_norm * f.lpNorm<Eigen::Infinity>() + rhs.lpNorm<Eigen::Infinity>());
        if (!(res <= 1e-10)) {
            std::ostringstream os;
            os << "resolvent: backward error " << res << " exceeds 1e-10 (" << form.kind.name()
               << ", lambda = " << lambda_ << ")";
            throw SolverError(os.str());
        }
    }
    return DiscreteFunction::from_dofs(form.grid, form.mode,
                                       std::vector<double>(f.data(), f.data() + f.size()));
}

DiscreteFunction resolvent(const FormMatrix& form, double lambda, const DiscreteFunction& g,
                           const AngularMeasure& eta) {
    return ResolventSolver(form, lambda).solve(g, eta);
}

// ---------------------------------------------------------------------------

namespace {

double l2_sq(const Grid& grid, const AngularMeasure& eta, bool exclude_origin,
             const std::function<double(std::size_t, std::size_t)>& value) {
    double total = 0.0;
    for (std::size_t j = 0; j < grid.rays; ++j) {
        double ray = 0.0;
        for (std::size_t i = exclude_origin ? 1 : 0; i < grid.nodes; ++i) {
            const double v = value(j, i);
            const bool end = i == 0 || i + 1 == grid.nodes;
            ray += (end ? 0.5 : 1.0) * v * v;
        }
        total += eta.weight(j) * grid.h * ray;
    }
    return total;
}

}  // namespace

double l2_norm(const DiscreteFunction& f, const AngularMeasure& eta, bool exclude_origin) {
    return std::sqrt(l2_sq(f.grid(), eta, exclude_origin,
                           [&](std::size_t j, std::size_t i) { return f(j, i); }));
}

double l2_distance(const DiscreteFunction& f, const DiscreteFunction& g, const AngularMeasure& eta,
                   bool exclude_origin) {
    if (!(f.grid() == g.grid())) throw ShapeError("l2_distance: grids differ");
    return std::sqrt(l2_sq(f.grid(), eta, exclude_origin,
                           [&](std::size_t j, std::size_t i) { return f(j, i) - g(j, i); }));
}

// ---------------------------------------------------------------------------

SweepResult mosco_sweep(const std::vector<BarrierProfile>& profiles, const FormKind& target,
                        double lambda, const DiscreteFunction& g, const Grid& grid,
                        const AngularMeasure& eta) {
    if (target.type == FormKind::Type::Barrier)
        throw ConfigError("mosco_sweep: target must be reflecting, snapping or walsh");
    SweepResult out;
    const FormMatrix limit = assemble(target, grid, eta);
    const DiscreteFunction reference = resolvent(limit, lambda, g, eta);
    const double ref_norm = l2_norm(reference, eta, true);

    for (const BarrierProfile& p : profiles) {
        const FormMatrix form = assemble(FormKind::barrier(p), grid, eta);
        const DiscreteFunction f = resolvent(form, lambda, g, eta);
        SweepRow row;
        row.epsilon = p.epsilon();
        row.gamma_bar = resistance(p);
        row.norm = l2_distance(f, reference, eta, true);
        row.relative_norm = ref_norm > 0.0 ? row.norm / ref_norm : row.norm;
        row.lambda = lambda;
        row.grid_h = grid.h;
        row.grid_L = grid.length();
        row.rays = grid.rays;
        out.rows.push_back(row);
    }

    for (std::size_t k = 1; k < out.rows.size(); ++k) {
        const double prev = out.rows[k - 1].gamma_bar;
        const double cur = out.rows[k].gamma_bar;
        bool contradicts = false;
        switch (target.type) {
            case FormKind::Type::Reflecting: contradicts = cur < prev; break;
            case FormKind::Type::Walsh: contradicts = cur > prev; break;
            case FormKind::Type::Snapping: {
                const double goal = 0.5 / target.kappa;
                contradicts = std::abs(cur - goal) > std::abs(prev - goal) * (1.0 + 1e-12) + 1e-15;
                break;
            }
            case FormKind::Type::Barrier: break;
        }
        if (contradicts) {
            std::ostringstream os;
            os << "phase mismatch: resistance moves from " << prev << " to " << cur
               << ", away from the " << target.name() << " limit";
            out.warnings.push_back(os.str());
        }
    }
    return out;
}

bool strictly_decreasing(const std::vector<SweepRow>& rows, double floor) {
    for (std::size_t k = 0; k < rows.size(); ++k) {
        if (!(rows[k].norm > floor)) return false;
        if (k > 0 && !(rows[k].norm < rows[k - 1].norm)) return false;
    }
    return true;
}

FormKind snapping_for_resistance(double gamma_bar) {
    if (std::isinf(gamma_bar) && gamma_bar > 0.0) return FormKind::reflecting();
    if (!(gamma_bar > 0.0)) throw ConfigError("resistance must lie in (0, inf]");
    return FormKind::snapping(0.5 / gamma_bar);
}

SweepResult gamma_continuity_sweep(const std::vector<double>& gammas, double gamma_limit,
                                   double lambda, const DiscreteFunction& g, const Grid& grid,
                                   const AngularMeasure& eta) {
    SweepResult out;
    const FormMatrix limit = assemble(snapping_for_resistance(gamma_limit), grid, eta);
    const DiscreteFunction reference = resolvent(limit, lambda, g, eta);
    const double ref_norm = l2_norm(reference, eta);
    for (double gamma : gammas) {
        if (!(gamma > 0.0) || !std::isfinite(gamma))
            throw ConfigError("gamma_continuity_sweep: each resistance must lie in (0, inf)");
        const FormMatrix form = assemble(FormKind::snapping(0.5 / gamma), grid, eta);
        const DiscreteFunction f = resolvent(form, lambda, g, eta);
        SweepRow row;
        row.gamma_bar = gamma;
        row.norm = l2_distance(f, reference, eta);
        row.relative_norm = ref_norm > 0.0 ? row.norm / ref_norm : row.norm;
        row.lambda = lambda;
        row.grid_h = grid.h;
        row.grid_L = grid.length();
        row.rays = grid.rays;
        out.rows.push_back(row);
    }
    return out;
}

// ---------------------------------------------------------------------------

DiscreteFunction recovery_sequence(const DiscreteFunction& g, const BarrierProfile& profile,
                                   const AngularMeasure& eta) {
    const Grid& grid = g.grid();
    if (grid.rays != eta.size()) throw ShapeError("recovery_sequence: ray count mismatch");
    for (double bp : profile.breakpoints()) grid.node_at(bp);
    const std::size_t k = grid.node_at(profile.epsilon());
    const double gamma = resistance(profile);

    std::vector<double> origins(grid.rays);
    for (std::size_t j = 0; j < grid.rays; ++j) origins[j] = g.origin(j);
    const double c = eta.average(origins);

    std::vector<double> s(k);
    for (std::size_t i = 0; i < k; ++i) s[i] = profile.scale(grid.radius(i)) / gamma;

    DiscreteFunction out(grid, OriginMode::Shared);
    for (std::size_t j = 0; j < grid.rays; ++j) {
        for (std::size_t i = 0; i < k && i < grid.nodes; ++i)
            out(j, i) = c + (origins[j] - c) * s[i];
        for (std::size_t i = k; i < grid.nodes; ++i) out(j, i) = g(j, i - k);
    }
    out.set_origin(c);
    return out;
}

double recovery_energy_target(double dirichlet, const std::vector<double>& origin_values,
                              const BarrierProfile& profile, const AngularMeasure& eta) {
    if (origin_values.size() != eta.size())
        throw ShapeError("recovery_energy_target: one origin value per ray expected");
    const double c = eta.average(origin_values);
    double spread = 0.0;
    for (std::size_t j = 0; j < eta.size(); ++j)
        spread += eta.weight(j) * (origin_values[j] - c) * (origin_values[j] - c);
    return dirichlet + spread / (2.0 * resistance(profile));
}

// ---------------------------------------------------------------------------

void export_matrix(const FormMatrix& form, std::ostream& out) {
    const SparseMatrix& a = form.stiffness;
    out << "%%MatrixMarket matrix coordinate real general\n";
    out << "% form=" << form.kind.name() << " rays=" << form.grid.rays
        << " nodes=" << form.grid.nodes << " h=" << form.grid.h << "\n";
    out << a.rows() << ' ' << a.cols() << ' ' << a.nonZeros() << '\n';
    out.precision(17);
    for (Eigen::Index c = 0; c < a.outerSize(); ++c)
        for (SparseMatrix::InnerIterator it(a, c); it; ++it)
            out << it.row() + 1 << ' ' << it.col() + 1 << ' ' << it.value() << '\n';
}

}  // namespace walsh
