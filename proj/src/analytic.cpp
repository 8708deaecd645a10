#include "walsh/analytic.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <boost/math/quadrature/gauss_kronrod.hpp>

namespace walsh {

namespace {

void check_radius(double r, double a, const char* who) {
    if (!(a > 0.0) || !std::isfinite(a)) {
        std::ostringstream os;
        os << who << ": radius a must be positive, got " << a;
        throw DomainError(os.str());
    }
    if (!(r >= 0.0 && r <= a)) {
        std::ostringstream os;
        os << who << ": r = " << r << " outside [0, " << a << "]";
        throw DomainError(os.str());
    }
}

void check_lambda(double lambda, const char* who) {
    if (!(lambda > 0.0) || !std::isfinite(lambda)) {
        std::ostringstream os;
        os << who << ": lambda must be positive, got " << lambda;
        throw DomainError(os.str());
    }
}

// sinh(x)/sinh(y) for 0 <= x <= y, y > 0, without forming sinh of large arguments.
double sinh_ratio(double x, double y) {
    if (x <= 0.0) return 0.0;
    if (x == y) return 1.0;
    return std::exp(x - y) * (std::expm1(-2.0 * x) / std::expm1(-2.0 * y));
}

// 1/cosh(y), y >= 0.
double sech(double y) {
    const double e = std::exp(-y);
    return 2.0 * e / (1.0 + e * e);
}

}  // namespace

ExitLaplace bm_exit_laplace(double r, double a, double lambda) {
    check_radius(r, a, "bm_exit_laplace");
    check_lambda(lambda, "bm_exit_laplace");
    const double k = std::sqrt(2.0 * lambda);
    return {sinh_ratio(k * r, k * a), sinh_ratio(k * (a - r), k * a), sech(k * a)};
}

double HittingKernel::apply(std::span<const double> phi, std::size_t ray,
                            const AngularMeasure& eta) const {
    return same_ray_mass * phi[ray] + eta_mixture_mass * eta.average(phi);
}

HittingKernel hitting_kernel(double r, double a) {
    check_radius(r, a, "hitting_kernel");
    const double same = r / a;
    return {same, 1.0 - same, a};
}

double LambdaKernel::apply(std::span<const double> phi, std::size_t ray,
                           const AngularMeasure& eta) const {
    return same_ray_coeff * phi[ray] + eta_coeff * eta.average(phi);
}

LambdaKernel lambda_kernel(double r, double a, double lambda) {
    const ExitLaplace e = bm_exit_laplace(r, a, lambda);
    return {e.outer, e.origin * e.symmetric, lambda, a};
}

SnappingParameter::SnappingParameter(double kappa) : kappa_(kappa) {
    if (!(kappa > 0.0) || !std::isfinite(kappa))
        throw ConfigError("snapping parameter: kappa must be positive and finite");
}

SnappingParameter SnappingParameter::from_resistance(double gamma_bar) {
    if (!(gamma_bar > 0.0) || !std::isfinite(gamma_bar))
        throw ConfigError("snapping parameter: resistance must lie in (0, inf)");
    return SnappingParameter(0.5 / gamma_bar);
}

SnappingParameter SnappingParameter::from_trace_radius(double a) {
    if (!(a > 0.0) || !std::isfinite(a))
        throw ConfigError("snapping parameter: trace radius must be positive");
    return SnappingParameter(0.5 / a);
}

double feller_pair_weight(double a) {
    if (!(a > 0.0)) throw DomainError("feller_pair_weight: a must be positive");
    return 0.5 / a;
}

double trace_jump_coefficient(double a) { return 0.5 * feller_pair_weight(a); }

double feller_functional(std::span<const double> phi, std::span<const double> psi,
                         const AngularMeasure& eta, double a, double lambda) {
    if (phi.size() != eta.size() || psi.size() != eta.size())
        throw ShapeError("feller_functional: boundary data must have one value per ray");
    check_lambda(lambda, "feller_functional");
    if (!(a > 0.0)) throw DomainError("feller_functional: a must be positive");

    const auto integrand = [&](double r) {
        r = std::clamp(r, 0.0, a);
        const LambdaKernel hl = lambda_kernel(r, a, lambda);
        const HittingKernel h0 = hitting_kernel(r, a);
        double sum = 0.0;
        for (std::size_t j = 0; j < eta.size(); ++j)
            sum += eta.weight(j) * hl.apply(phi, j, eta) * h0.apply(psi, j, eta);
        return sum;
    };

    // The lambda-kernel concentrates in a boundary layer of width
    // 1/sqrt(2 lambda) below r = a; integrate it separately.
    using boost::math::quadrature::gauss_kronrod;
    const double layer = std::min(a, 40.0 / std::sqrt(2.0 * lambda));
    const double split = a - layer;
    double total = gauss_kronrod<double, 61>::integrate(integrand, split, a, 8, 1e-13);
    if (split > 0.0) total += gauss_kronrod<double, 61>::integrate(integrand, 0.0, split, 8, 1e-13);
    return lambda * total;
}

double form_energy(const FormKind& kind, const DiscreteFunction& f, const AngularMeasure& eta) {
    const Grid& grid = f.grid();
    if (grid.rays != eta.size())
        throw ShapeError("form_energy: grid has " + std::to_string(grid.rays) +
                         " rays, measure has " + std::to_string(eta.size()));
    if (kind.origin_mode() == OriginMode::Shared) {
        for (std::size_t j = 1; j < grid.rays; ++j)
            if (f.origin(j) != f.origin(0))
                throw ShapeError("form_energy: " + kind.name() +
                                 " form needs a single origin value; function has per-ray "
                                 "origin values");
    }
    const std::vector<double> a = cell_conductivities(kind, grid);

    double dirichlet = 0.0;
    for (std::size_t j = 0; j < grid.rays; ++j) {
        double ray_sum = 0.0;
        for (std::size_t i = 0; i + 1 < grid.nodes; ++i) {
            const double d = f(j, i + 1) - f(j, i);
            ray_sum += a[i] * d * d;
        }
        dirichlet += eta.weight(j) * ray_sum / grid.h;
    }
    double energy = 0.5 * dirichlet;

    if (kind.type == FormKind::Type::Snapping) {
        double coupling = 0.0;
        for (std::size_t j = 0; j < grid.rays; ++j)
            for (std::size_t k = 0; k < grid.rays; ++k) {
                const double d = f.origin(j) - f.origin(k);
                coupling += eta.weight(j) * eta.weight(k) * d * d;
            }
        energy += 0.5 * kind.kappa * coupling;
    }
    return energy;
}

std::vector<std::vector<double>> energy_measure_density(const DiscreteFunction& f) {
    const Grid& grid = f.grid();
    std::vector<std::vector<double>> density(grid.rays, std::vector<double>(grid.nodes - 1));
    for (std::size_t j = 0; j < grid.rays; ++j)
        for (std::size_t i = 0; i + 1 < grid.nodes; ++i) {
            const double d = (f(j, i + 1) - f(j, i)) / grid.h;
            density[j][i] = d * d;
        }
    return density;
}

}  // namespace walsh
