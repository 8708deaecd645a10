#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/multiprecision/cpp_dec_float.hpp>

#include "walsh/analytic.hpp"
#include "walsh/errors.hpp"

using namespace walsh;
using Big = boost::multiprecision::cpp_dec_float_50;

namespace {

// 50-digit reference values of the exit functionals, straight from sinh/cosh.
ExitLaplace reference_laplace(double r, double a, double lambda) {
    const Big k = sqrt(Big(2) * Big(lambda));
    const Big sa = sinh(k * Big(a));
    return {static_cast<double>(sinh(k * Big(r)) / sa),
            static_cast<double>(sinh(k * (Big(a) - Big(r))) / sa),
            static_cast<double>(Big(1) / cosh(k * Big(a)))};
}

// lambda int_0^a [S (1 - r/a) + E] dr per unit phi_bar psi_bar, by
// 50-digit quadrature of the reference kernels.
double reference_feller(double a, double lambda) {
    const Big k = sqrt(Big(2) * Big(lambda));
    const auto f = [&](Big r) {
        const Big sa = sinh(k * Big(a));
        const Big s = sinh(k * r) / sa;
        const Big e = sinh(k * (Big(a) - r)) / sa / cosh(k * Big(a));
        return s * (Big(1) - r / Big(a)) + e;
    };
    using boost::math::quadrature::gauss_kronrod;
    const Big v = gauss_kronrod<Big, 61>::integrate(f, Big(0), Big(a), 15, Big(1e-30));
    return static_cast<double>(Big(lambda) * v);
}

}  // namespace

TEST_CASE("exit Laplace transforms match 50-digit references") {
    for (double lambda : {1e-3, 0.5, 2.0, 50.0})
        for (double r : {0.0, 0.1, 0.3, 0.77, 1.0}) {
            const ExitLaplace got = bm_exit_laplace(r, 1.0, lambda);
            const ExitLaplace ref = reference_laplace(r, 1.0, lambda);
            CHECK(got.outer == doctest::Approx(ref.outer).epsilon(1e-13));
            CHECK(got.origin == doctest::Approx(ref.origin).epsilon(1e-13));
            CHECK(got.symmetric == doctest::Approx(ref.symmetric).epsilon(1e-13));
        }
    CHECK(bm_exit_laplace(0.3, 1.0, 0.5).symmetric == doctest::Approx(0.648054273663885));
}

TEST_CASE("exit Laplace transforms stay finite for huge k a") {
    const ExitLaplace e = bm_exit_laplace(0.5, 1.0, 5e5);
    CHECK(std::isfinite(e.outer));
    CHECK(e.outer >= 0.0);
    CHECK(e.symmetric >= 0.0);
    CHECK(bm_exit_laplace(1.0, 1.0, 5e5).outer == 1.0);
    CHECK(bm_exit_laplace(0.0, 1.0, 5e5).origin == 1.0);
}

TEST_CASE("exit Laplace transforms: boundary values and errors") {
    const ExitLaplace at0 = bm_exit_laplace(0.0, 2.0, 1.0);
    CHECK(at0.outer == 0.0);
    CHECK(at0.origin == doctest::Approx(1.0));
    CHECK_THROWS_AS(bm_exit_laplace(1.5, 1.0, 1.0), DomainError);
    CHECK_THROWS_AS(bm_exit_laplace(0.5, 1.0, 0.0), DomainError);
    CHECK_THROWS_AS(bm_exit_laplace(0.5, -1.0, 1.0), DomainError);
}

TEST_CASE("hitting kernel: masses, constants, start at origin") {
    const AngularMeasure eta = AngularMeasure::with_weights({0.1, 0.2, 0.3, 0.4});
    const std::vector<double> phi{1.0, -2.0, 0.5, 3.0};
    for (double r : {0.0, 0.25, 0.6, 1.0}) {
        const HittingKernel k = hitting_kernel(r, 1.0);
        CHECK(k.same_ray_mass + k.eta_mixture_mass == doctest::Approx(1.0));
        const std::vector<double> one(4, 2.5);
        CHECK(k.apply(one, 2, eta) == doctest::Approx(2.5));
    }
    const HittingKernel z = hitting_kernel(0.0, 1.0);
    CHECK(z.same_ray_mass == 0.0);
    CHECK(z.apply(phi, 3, eta) == doctest::Approx(eta.average(phi)));
    CHECK(hitting_kernel(0.3, 1.0).same_ray_mass == doctest::Approx(0.3));
}

TEST_CASE("lambda kernel is built from the exit transforms") {
    for (double r : {0.0, 0.2, 0.9}) {
        const ExitLaplace e = bm_exit_laplace(r, 1.0, 0.7);
        const LambdaKernel k = lambda_kernel(r, 1.0, 0.7);
        CHECK(k.same_ray_coeff == e.outer);
        CHECK(k.eta_coeff == e.origin * e.symmetric);
    }
    // lambda -> 0 recovers the hitting kernel.
    const LambdaKernel k = lambda_kernel(0.3, 1.0, 1e-12);
    CHECK(k.same_ray_coeff == doctest::Approx(0.3).epsilon(1e-9));
    CHECK(k.eta_coeff == doctest::Approx(0.7).epsilon(1e-9));
}

TEST_CASE("snapping parameter conversions") {
    CHECK(SnappingParameter::from_resistance(0.25).kappa() == doctest::Approx(2.0));
    CHECK(SnappingParameter::from_trace_radius(0.5).kappa() == doctest::Approx(1.0));
    CHECK(SnappingParameter(4.0).trace_radius() == doctest::Approx(0.125));
    CHECK_THROWS_AS(SnappingParameter(0.0), ConfigError);
    CHECK_THROWS_AS(SnappingParameter::from_resistance(std::numeric_limits<double>::infinity()),
                    ConfigError);
    for (double kappa : {0.1, 1.0, 7.0}) {
        const SnappingParameter p(kappa);
        CHECK(trace_jump_coefficient(p.trace_radius()) == doctest::Approx(kappa / 2.0));
    }
}

TEST_CASE("Feller functional: quadrature against 50-digit reference") {
    const AngularMeasure eta = AngularMeasure::uniform(4);
    const std::vector<double> phi{1.0, 2.0, 0.0, 0.0};
    const std::vector<double> psi{0.0, 0.0, 3.0, -1.0};
    const double pq = eta.average(phi) * eta.average(psi);
    for (double lambda : {10.0, 100.0, 1e3, 1e4}) {
        const double got = feller_functional(phi, psi, eta, 1.0, lambda);
        CHECK(got == doctest::Approx(reference_feller(1.0, lambda) * pq).epsilon(1e-10));
    }
    CHECK(reference_feller(1.0, 10.0) == doctest::Approx(0.49883).epsilon(1e-5));
    const double top = feller_functional(phi, psi, eta, 1.0, 1e4);
    CHECK(std::abs(top - feller_pair_weight(1.0) * pq) < 1e-4);
    CHECK_THROWS_AS(feller_functional(std::vector<double>{1.0}, psi, eta, 1.0, 1.0), ShapeError);
}

TEST_CASE("form energies of piecewise-linear functions") {
    const Grid g(3, 11, 0.1);
    const AngularMeasure eta = AngularMeasure::with_weights({0.2, 0.3, 0.5});
    const std::vector<double> c{1.0, -2.0, 0.5};
    const DiscreteFunction f = DiscreteFunction::sample(
        g, OriginMode::PerRay, [&](std::size_t j, double r) { return c[j] * r + double(j); });
    double dir = 0.0;
    for (std::size_t j = 0; j < 3; ++j) dir += eta.weight(j) * c[j] * c[j];
    dir *= 0.5 * g.length();
    CHECK(form_energy(FormKind::reflecting(), f, eta) == doctest::Approx(dir));
    double coupling = 0.0;
    for (std::size_t j = 0; j < 3; ++j)
        for (std::size_t k = 0; k < 3; ++k)
            coupling += eta.weight(j) * eta.weight(k) * (double(j) - double(k)) * (double(j) - double(k));
    CHECK(form_energy(FormKind::snapping(2.0), f, eta) == doctest::Approx(dir + coupling));
    CHECK_THROWS_AS(form_energy(FormKind::walsh(), f, eta), ShapeError);

    const DiscreteFunction s = f.to_shared(eta);
    const double walsh = form_energy(FormKind::walsh(), s, eta);
    // Barrier with b = 1 is the Walsh form.
    CHECK(form_energy(FormKind::barrier(BarrierProfile::constant(0.2, 1.0)), s, eta) ==
          doctest::Approx(walsh));

    const auto density = energy_measure_density(s);
    double total = 0.0;
    for (std::size_t j = 0; j < 3; ++j)
        for (double d : density[j]) total += eta.weight(j) * g.h * d;
    CHECK(total == doctest::Approx(2.0 * walsh));
}
