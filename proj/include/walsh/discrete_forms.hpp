#pragma once

// Sparse assembly of the reflecting, snapping-out, Walsh and barrier forms on
// a truncated star grid, their resolvents, and the convergence sweeps.

#include <iosfwd>
#include <limits>
#include <string>
#include <vector>

#include <Eigen/SparseCholesky>
#include <Eigen/SparseCore>

#include "walsh/domain.hpp"
#include "walsh/grid.hpp"

namespace walsh {

using SparseMatrix = Eigen::SparseMatrix<double>;

/// Stiffness A with E(f, f) = f^T A f and the diagonal trapezoid mass of
/// dr x eta, both in the degree-of-freedom order of dof_index.
struct FormMatrix {
    FormKind kind;
    Grid grid;
    OriginMode mode = OriginMode::Shared;
    SparseMatrix stiffness;
    Eigen::VectorXd mass;
};

/// Assembles the form from an edge list (each edge adds the same value to
/// the mirrored off-diagonal pair, so A is bitwise symmetric). Neumann at
/// r = L. Snapping couples the per-ray origin values by kappa(diag(w) - w w^T).
/// AlignmentError if a barrier breakpoint is not a node; ShapeError if the
/// grid and the measure disagree on the number of rays.
FormMatrix assemble(const FormKind& kind, const Grid& grid, const AngularMeasure& eta);

/// Factorization of lambda M + A for repeated solves.
class ResolventSolver {
public:
    ResolventSolver(const FormMatrix& form, double lambda);

    /// Solves (lambda M + A) f = M g. g is converted to the form's origin
    /// mode first (eta average at the origin when going to Shared).
    /// SolverError if the normwise backward error exceeds 1e-10.
    DiscreteFunction solve(const DiscreteFunction& g, const AngularMeasure& eta) const;

    double lambda() const noexcept { return lambda_; }

private:
    const FormMatrix* form_;
    double lambda_;
    SparseMatrix system_;
    Eigen::SimplicialLDLT<SparseMatrix> ldlt_;
};

DiscreteFunction resolvent(const FormMatrix& form, double lambda, const DiscreteFunction& g,
                           const AngularMeasure& eta);

/// Trapezoid L^2(dr x eta) norm. With `exclude_origin` the r = 0 nodes are
/// dropped, which makes shared and per-ray functions comparable.
double l2_norm(const DiscreteFunction& f, const AngularMeasure& eta, bool exclude_origin = false);
double l2_distance(const DiscreteFunction& f, const DiscreteFunction& g, const AngularMeasure& eta,
                   bool exclude_origin = false);

struct SweepRow {
    double epsilon = 0.0;
    double gamma_bar = 0.0;
    double norm = 0.0;           // absolute L^2 distance of the resolvents
    double relative_norm = 0.0;  // norm / ||target resolvent||
    double lambda = 0.0;
    double grid_h = 0.0;
    double grid_L = 0.0;
    std::size_t rays = 0;
};

struct SweepResult {
    std::vector<SweepRow> rows;
    std::vector<std::string> warnings;
};

/// For each barrier profile, ||G^eps_lambda g - G^target_lambda g|| with the
/// origin nodes excluded. Warns when the resistance trend contradicts the
/// target phase (increasing for Reflecting, toward 1/(2 kappa) for
/// Snapping(kappa), decreasing for Walsh).
SweepResult mosco_sweep(const std::vector<BarrierProfile>& profiles, const FormKind& target,
                        double lambda, const DiscreteFunction& g, const Grid& grid,
                        const AngularMeasure& eta);

/// Strictly decreasing norms, each above `floor`.
bool strictly_decreasing(const std::vector<SweepRow>& rows, double floor = 0.0);

/// Snapping form with kappa = 1/(2 gamma_bar); gamma_bar = inf is Reflecting.
FormKind snapping_for_resistance(double gamma_bar);

/// Rows (gamma_n, ||G^{gamma_n} g - G^{gamma} g||) for Snapping forms.
/// gamma may be infinity. Epsilon is reported as 0.
SweepResult gamma_continuity_sweep(const std::vector<double>& gammas, double gamma_limit,
                                   double lambda, const DiscreteFunction& g, const Grid& grid,
                                   const AngularMeasure& eta);

/// Barrier-domain approximant of g (per-ray origin values):
///   c + (g(0, j) - c) s(r) / gamma_bar   on r < eps,  c = sum_j w_j g(0, j),
///   g(r - eps, j)                         on r >= eps,
/// with s the barrier scale function. Shared origin value c.
/// AlignmentError unless eps and the breakpoints are nodes.
DiscreteFunction recovery_sequence(const DiscreteFunction& g, const BarrierProfile& profile,
                                   const AngularMeasure& eta);

/// Right-hand side of the recovery energy identity:
/// dirichlet + (1/(2 gamma_bar)) sum_j w_j (g(0, j) - c)^2, where
/// `dirichlet` is 1/2 sum_j w_j int g_j'^2.
double recovery_energy_target(double dirichlet, const std::vector<double>& origin_values,
                              const BarrierProfile& profile, const AngularMeasure& eta);

struct KernelOptions {
    double zero_tolerance = 1e-10;
    double shift = 1.0;
    std::size_t block = 0;  // 0: rays + 4
    std::size_t max_iterations = 500;
};

/// Number of generalized eigenvalues of A x = mu M x below the tolerance,
/// found by shift-invert subspace iteration with Rayleigh-Ritz projection.
/// SolverError if the factorization fails or the iteration does not settle.
std::size_t kernel_dimension(const FormMatrix& form, const KernelOptions& options = {});

/// Smallest generalized eigenvalues (ascending), same method.
std::vector<double> smallest_eigenvalues(const FormMatrix& form, std::size_t count,
                                         const KernelOptions& options = {});

/// Writes A in MatrixMarket coordinate format (1-based row, column, value;
/// every stored entry, both triangles).
void export_matrix(const FormMatrix& form, std::ostream& out);

}  // namespace walsh
