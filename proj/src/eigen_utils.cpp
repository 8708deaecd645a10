#include <algorithm>
#include <cmath>

#include <Eigen/Dense>

#include "walsh/discrete_forms.hpp"
#include "walsh/errors.hpp"
#include "walsh/random.hpp"

namespace walsh {

namespace {

// Ritz values of A x = mu M x on the dominant invariant subspace of
// (A + sigma M)^{-1} M.
Eigen::VectorXd ritz_values(const FormMatrix& form, std::size_t block,
                            const KernelOptions& options) {
    const SparseMatrix& a = form.stiffness;
    const Eigen::VectorXd& m = form.mass;
    const Eigen::Index n = a.rows();
    const auto p = static_cast<Eigen::Index>(std::min<std::size_t>(block, n));

    SparseMatrix shifted = a;
    for (Eigen::Index i = 0; i < n; ++i) shifted.coeffRef(i, i) += options.shift * m[i];
    Eigen::SimplicialLDLT<SparseMatrix> ldlt(shifted);
    if (ldlt.info() != Eigen::Success)
        throw SolverError("kernel_dimension: factorization of A + sigma M failed");

    RandomStream rng(0x6b65726e656cULL);
    Eigen::MatrixXd x(n, p);
    for (Eigen::Index j = 0; j < p; ++j)
        for (Eigen::Index i = 0; i < n; ++i) x(i, j) = rng.normal();

    Eigen::VectorXd previous = Eigen::VectorXd::Constant(p, -1.0);
    for (std::size_t it = 0; it < options.max_iterations; ++it) {
        const Eigen::MatrixXd y = ldlt.solve(m.asDiagonal() * x);
        const Eigen::MatrixXd q = Eigen::HouseholderQR<Eigen::MatrixXd>(y).householderQ() *
                                  Eigen::MatrixXd::Identity(n, p);
        Eigen::MatrixXd ap = q.transpose() * (a * q);
        Eigen::MatrixXd bp = q.transpose() * m.asDiagonal() * q;
        ap = 0.5 * (ap + ap.transpose()).eval();
        bp = 0.5 * (bp + bp.transpose()).eval();
        Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(ap, bp);
        if (es.info() != Eigen::Success)
            throw SolverError("kernel_dimension: projected eigenproblem failed");
        const Eigen::VectorXd values = es.eigenvalues();
        x = q * es.eigenvectors();

        // Settled when every Ritz value below the first non-null one, and that
        // one, have stopped moving.
        Eigen::Index watch = 0;
        while (watch < p && values[watch] < options.zero_tolerance) ++watch;
        watch = std::min<Eigen::Index>(watch + 1, p - 1);
        bool settled = it >= 2;
        for (Eigen::Index k = 0; k <= watch && settled; ++k)
            settled = std::abs(values[k] - previous[k]) <= 1e-10 * std::abs(values[k]) + 1e-14;
        previous = values;
        if (settled) return values;
    }
    throw SolverError("kernel_dimension: subspace iteration did not settle");
}

}  // namespace

std::vector<double> smallest_eigenvalues(const FormMatrix& form, std::size_t count,
                                         const KernelOptions& options) {
    const std::size_t block = std::max(count + 4, options.block);
    const Eigen::VectorXd values = ritz_values(form, block, options);
    std::vector<double> out(values.data(), values.data() + std::min<Eigen::Index>(
                                                               values.size(), count));
    return out;
}

std::size_t kernel_dimension(const FormMatrix& form, const KernelOptions& options) {
    const std::size_t block = options.block ? options.block : form.grid.rays + 4;
    const Eigen::VectorXd values = ritz_values(form, block, options);
    std::size_t count = 0;
    for (Eigen::Index k = 0; k < values.size(); ++k) count += values[k] < options.zero_tolerance;
    return count;
}

}  // namespace walsh
