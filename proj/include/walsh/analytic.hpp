#pragma once

// Closed-form hitting kernels, exit Laplace transforms, the Feller measure of
// the trace on {|x| >= a}, and quadrature values of the four forms.

#include <span>
#include <vector>

#include "walsh/domain.hpp"
#include "walsh/grid.hpp"

namespace walsh {

/// Laplace functionals of a 1D Brownian motion B started at r in [0, a]:
///   outer     = E_r[exp(-lambda tau_a); tau_a < tau_0]
///   origin    = E_r[exp(-lambda tau_0); tau_0 < tau_a]
///   symmetric = E_0[exp(-lambda (tau_{-a} ^ tau_a))]
struct ExitLaplace {
    double outer = 0.0;
    double origin = 0.0;
    double symmetric = 0.0;
};

/// sinh(k r)/sinh(k a), sinh(k (a - r))/sinh(k a), 1/cosh(k a) with
/// k = sqrt(2 lambda), evaluated through exp/expm1 of non-positive arguments
/// so that k a up to 700 (and beyond) neither overflows nor loses precision.
/// DomainError unless 0 <= r <= a, a > 0, lambda > 0.
ExitLaplace bm_exit_laplace(double r, double a, double lambda);

/// Hitting distribution of F = {|x| >= a} for WBM started at (r, theta):
/// mass r/a on (a, theta) and 1 - r/a spread over the circle as eta.
struct HittingKernel {
    double same_ray_mass = 0.0;
    double eta_mixture_mass = 0.0;
    double radius = 0.0;

    /// Applies the kernel to boundary data phi(a, .).
    double apply(std::span<const double> phi, std::size_t ray, const AngularMeasure& eta) const;
};

HittingKernel hitting_kernel(double r, double a);

/// lambda-resolvent hitting kernel: E[exp(-lambda sigma_F) phi(W_sigma_F)]
/// = same_ray_coeff phi(a, theta) + eta_coeff phi_bar(a).
struct LambdaKernel {
    double same_ray_coeff = 0.0;
    double eta_coeff = 0.0;
    double lambda = 0.0;
    double radius = 0.0;

    double apply(std::span<const double> phi, std::size_t ray, const AngularMeasure& eta) const;
};

/// eta_coeff is the product (origin) x (symmetric) of bm_exit_laplace.
LambdaKernel lambda_kernel(double r, double a, double lambda);

/// Coupling strength kappa of the snapping-out form and the radius
/// a = 1/(2 kappa) of the set the snapping-out motion is the trace on.
class SnappingParameter {
public:
    explicit SnappingParameter(double kappa);
    /// kappa = 1/(2 gamma_bar) for thermal resistance gamma_bar in (0, inf).
    static SnappingParameter from_resistance(double gamma_bar);
    static SnappingParameter from_trace_radius(double a);

    double kappa() const noexcept { return kappa_; }
    double trace_radius() const noexcept { return 0.5 / kappa_; }

private:
    double kappa_;
};

/// Density 1/(2a) of the Feller measure with respect to eta x eta on the
/// circle of radius a.
double feller_pair_weight(double a);

/// Coefficient of the jump part of the trace form on {|x| >= a}:
/// U/2 = 1/(4a). Under a = 1/(2 kappa) this is kappa/2, the coupling
/// coefficient of the snapping-out form, so the trace form is the
/// snapping-out form composed with the shift by a.
double trace_jump_coefficient(double a);

/// lambda (H^lambda_F phi, H_F psi) over the ball {|x| < a}, computed by
/// adaptive Gauss-Kronrod quadrature in r of the kernel products. For phi
/// and psi with disjoint supports this increases to U(phi x psi) as
/// lambda -> infinity.
double feller_functional(std::span<const double> phi, std::span<const double> psi,
                         const AngularMeasure& eta, double a, double lambda);

/// Quadrature value of the form on a grid function:
///   1/2 sum_j w_j sum_i a_i (f[j][i+1] - f[j][i])^2 / h
/// plus, for Snapping, kappa/2 sum_{j,k} w_j w_k (f(0,j) - f(0,k))^2.
/// Walsh/Barrier require a single origin value (ShapeError otherwise).
double form_energy(const FormKind& kind, const DiscreteFunction& f, const AngularMeasure& eta);

/// Per-cell energy density u'^2 (finite differences), indexed [ray][cell].
/// sum_j w_j sum_i h density[j][i] = 2 E^W(f).
std::vector<std::vector<double>> energy_measure_density(const DiscreteFunction& f);

}  // namespace walsh
