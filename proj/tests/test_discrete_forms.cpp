#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <limits>
#include <sstream>

#include "walsh/analytic.hpp"
#include "walsh/discrete_forms.hpp"
#include "walsh/errors.hpp"
#include "walsh/random.hpp"

using namespace walsh;

namespace {

std::vector<FormKind> all_kinds() {
    return {FormKind::reflecting(), FormKind::snapping(1.5), FormKind::walsh(),
            FormKind::barrier(BarrierProfile({0.0, 0.05, 0.1}, {0.2, 3.0}))};
}

DiscreteFunction random_function(const Grid& g, OriginMode mode, std::uint64_t seed) {
    RandomStream rng(seed);
    std::vector<double> v(dof_count(g, mode));
    for (double& x : v) x = 2.0 * rng.uniform() - 1.0;
    return DiscreteFunction::from_dofs(g, mode, v);
}

Eigen::VectorXd dofs(const DiscreteFunction& f) {
    const auto d = f.to_dofs();
    return Eigen::Map<const Eigen::VectorXd>(d.data(), Eigen::Index(d.size()));
}

}  // namespace

TEST_CASE("stiffness matrices are bitwise symmetric and reproduce the energy") {
    const Grid g(4, 101, 0.01);
    const AngularMeasure eta = AngularMeasure::with_weights({0.1, 0.2, 0.3, 0.4});
    std::uint64_t seed = 1;
    for (const FormKind& kind : all_kinds()) {
        const FormMatrix m = assemble(kind, g, eta);
        const SparseMatrix t = m.stiffness.transpose();
        CHECK((m.stiffness - t).norm() == 0.0);
        CHECK(m.mass.size() == Eigen::Index(dof_count(g, kind.origin_mode())));
        CHECK(m.mass.minCoeff() > 0.0);
        // Trapezoid mass integrates 1 to L.
        CHECK(m.mass.sum() == doctest::Approx(g.length()));
        for (int rep = 0; rep < 3; ++rep) {
            const DiscreteFunction f = random_function(g, kind.origin_mode(), seed++);
            const Eigen::VectorXd x = dofs(f);
            const double quad = x.dot(m.stiffness * x);
            CHECK(quad == doctest::Approx(form_energy(kind, f, eta)).epsilon(1e-12));
            CHECK(quad >= 0.0);
        }
    }
}

TEST_CASE("constants are in every kernel; per-ray constants only for reflecting") {
    const Grid g(3, 101, 0.01);
    const AngularMeasure eta = AngularMeasure::uniform(3);
    for (const FormKind& kind : all_kinds()) {
        const FormMatrix m = assemble(kind, g, eta);
        const Eigen::VectorXd one = Eigen::VectorXd::Ones(m.mass.size());
        CHECK((m.stiffness * one).norm() < 1e-12);
    }
    const DiscreteFunction step = DiscreteFunction::sample(
        g, OriginMode::PerRay, [](std::size_t j, double) { return double(j); });
    CHECK(form_energy(FormKind::reflecting(), step, eta) == 0.0);
    CHECK(form_energy(FormKind::snapping(1.0), step, eta) > 0.0);
}

TEST_CASE("kernel dimensions") {
    for (std::size_t rays : {2u, 3u, 4u, 6u}) {
        const Grid g(rays, 200, 5e-3);
        const AngularMeasure eta = AngularMeasure::uniform(rays);
        CHECK(kernel_dimension(assemble(FormKind::reflecting(), g, eta)) == rays);
        CHECK(kernel_dimension(assemble(FormKind::snapping(0.01), g, eta)) == 1);
        CHECK(kernel_dimension(assemble(FormKind::walsh(), g, eta)) == 1);
        CHECK(kernel_dimension(assemble(FormKind::barrier(BarrierProfile::constant(0.1, 1e-3)), g, eta)) == 1);
    }
    // First nonzero eigenvalue of the Neumann problem on [0, L]: (pi / L)^2 / 2.
    const Grid g(2, 401, 2.5e-3);
    const auto ev = smallest_eigenvalues(assemble(FormKind::reflecting(), g, AngularMeasure::uniform(2)), 3);
    CHECK(std::abs(ev[0]) < 1e-10);
    CHECK(std::abs(ev[1]) < 1e-10);
    const double mu = 0.5 * std::pow(std::acos(-1.0) / g.length(), 2);
    CHECK(ev[2] == doctest::Approx(mu).epsilon(1e-4));
}

TEST_CASE("resolvent: constants, positivity, contraction") {
    const Grid g(4, 201, 5e-3);
    const AngularMeasure eta = AngularMeasure::uniform(4);
    const double lambda = 2.0;
    const DiscreteFunction c = DiscreteFunction::constant(g, OriginMode::PerRay, 3.0);
    const DiscreteFunction bump = DiscreteFunction::sample(
        g, OriginMode::PerRay, [](std::size_t j, double r) { return (j + 1.0) * std::exp(-5.0 * r); });
    for (const FormKind& kind : all_kinds()) {
        const FormMatrix m = assemble(kind, g, eta);
        const DiscreteFunction f = resolvent(m, lambda, c, eta);
        for (std::size_t j = 0; j < 4; ++j)
            for (std::size_t i = 0; i < g.nodes; i += 20) CHECK(f(j, i) == doctest::Approx(1.5));
        const DiscreteFunction u = resolvent(m, lambda, bump, eta);
        for (std::size_t j = 0; j < 4; ++j)
            for (std::size_t i = 0; i < g.nodes; ++i) {
                CHECK(u(j, i) >= 0.0);
                CHECK(lambda * u(j, i) <= 4.0 + 1e-12);
            }
    }
    CHECK_THROWS_AS(ResolventSolver(assemble(FormKind::walsh(), g, eta), 0.0), ConfigError);
}

TEST_CASE("barrier with unit conductivity equals the Walsh form exactly") {
    const Grid g(4, 101, 0.01);
    const AngularMeasure eta = AngularMeasure::uniform(4);
    const FormMatrix w = assemble(FormKind::walsh(), g, eta);
    const FormMatrix b = assemble(FormKind::barrier(power_law_profile(3.0, 0.0, 0.1)), g, eta);
    CHECK((w.stiffness - b.stiffness).norm() == 0.0);
    CHECK(w.mass == b.mass);
}

TEST_CASE("assembly errors") {
    const Grid g(4, 101, 0.01);
    CHECK_THROWS_AS(assemble(FormKind::barrier(BarrierProfile::constant(0.015, 1.0)), g,
                             AngularMeasure::uniform(4)),
                    AlignmentError);
    CHECK_THROWS_AS(assemble(FormKind::walsh(), g, AngularMeasure::uniform(3)), ShapeError);
    CHECK_THROWS_AS(FormKind::snapping(0.0), ConfigError);
}

TEST_CASE("snapping form for a resistance; infinite resistance is reflecting") {
    CHECK(snapping_for_resistance(0.25).kappa == doctest::Approx(2.0));
    CHECK(snapping_for_resistance(std::numeric_limits<double>::infinity()).type ==
          FormKind::Type::Reflecting);
    CHECK_THROWS_AS(snapping_for_resistance(0.0), ConfigError);
}

TEST_CASE("norm with and without the origin nodes") {
    const Grid g(2, 3, 0.5);
    const AngularMeasure eta = AngularMeasure::uniform(2);
    const DiscreteFunction one = DiscreteFunction::constant(g, OriginMode::PerRay, 1.0);
    CHECK(l2_norm(one, eta) == doctest::Approx(1.0));
    CHECK(l2_norm(one, eta, true) == doctest::Approx(std::sqrt(0.75)));
}

TEST_CASE("alpha = -1 sweep approaches the snapping resolvent") {
    const Grid g(4, 1001, 1e-3);
    const AngularMeasure eta = AngularMeasure::uniform(4);
    const DiscreteFunction gf = DiscreteFunction::sample(
        g, OriginMode::PerRay, [](std::size_t j, double r) { return (1.0 + 0.5 * j) * std::exp(-r); });
    std::vector<BarrierProfile> ps;
    for (double e : {0.1, 0.05, 0.025}) ps.push_back(power_law_profile(2.0, -1.0, e));
    const SweepResult s = mosco_sweep(ps, FormKind::snapping(1.0), 1.0, gf, g, eta);
    CHECK(s.warnings.empty());
    CHECK(strictly_decreasing(s.rows));
    CHECK(s.rows[0].gamma_bar == doctest::Approx(0.5));
    CHECK(s.rows.back().norm < 0.5 * s.rows.front().norm);
}

TEST_CASE("phase mismatch is reported") {
    const Grid g(2, 201, 5e-3);
    const AngularMeasure eta = AngularMeasure::uniform(2);
    const DiscreteFunction gf = DiscreteFunction::constant(g, OriginMode::PerRay, 1.0);
    // Resistance grows as eps shrinks (alpha < -1) but the target is Walsh.
    std::vector<BarrierProfile> ps{power_law_profile(1.0, -2.0, 0.1), power_law_profile(1.0, -2.0, 0.05)};
    const SweepResult s = mosco_sweep(ps, FormKind::walsh(), 1.0, gf, g, eta);
    CHECK(s.warnings.size() == 1);
    CHECK_THROWS_AS(mosco_sweep(ps, FormKind::barrier(ps[0]), 1.0, gf, g, eta), ConfigError);
}

TEST_CASE("continuity in the resistance") {
    const Grid g(4, 1001, 1e-3);
    const AngularMeasure eta = AngularMeasure::uniform(4);
    const DiscreteFunction gf = DiscreteFunction::sample(
        g, OriginMode::PerRay, [](std::size_t j, double r) { return std::cos(double(j) + r); });
    const SweepResult s = gamma_continuity_sweep({1.5, 1.25, 1.125}, 1.0, 1.0, gf, g, eta);
    CHECK(strictly_decreasing(s.rows));
    const SweepResult inf = gamma_continuity_sweep({50.0, 5e3, 5e5}, std::numeric_limits<double>::infinity(),
                                                   1.0, gf, g, eta);
    CHECK(strictly_decreasing(inf.rows));
    CHECK(inf.rows.back().relative_norm < 1e-5);
}

TEST_CASE("recovery sequence: shape and energy identity") {
    const AngularMeasure eta = AngularMeasure::with_weights({0.2, 0.3, 0.5});
    const BarrierProfile profile({0.0, 0.01, 0.02}, {0.05, 0.2});
    const std::vector<double> c{1.0, -0.5, 2.0};
    const auto smooth = [&](std::size_t j, double r) { return c[j] * std::cos(2.0 * r); };
    // 1/2 int_0^L (2 c sin 2r)^2 dr = c^2 (L/2 - sin(4L)/8) ... times 2 -> c^2 (L - sin(4L)/4).
    const double L = 1.0;
    double dir = 0.0;
    for (std::size_t j = 0; j < 3; ++j) dir += eta.weight(j) * c[j] * c[j];
    dir *= L - std::sin(4.0 * L) / 4.0;
    const double target = recovery_energy_target(dir, c, profile, eta);

    std::vector<double> err;
    for (double h : {1e-3, 5e-4}) {
        const auto nodes = std::size_t(std::llround((L + profile.epsilon()) / h)) + 1;
        const Grid g(3, nodes, h);
        const DiscreteFunction f = DiscreteFunction::sample(g, OriginMode::PerRay, smooth);
        const DiscreteFunction gn = recovery_sequence(f, profile, eta);
        CHECK(gn.mode() == OriginMode::Shared);
        CHECK(gn.origin(0) == doctest::Approx(eta.average(c)));
        // Beyond the barrier the function is g shifted outward.
        const std::size_t k = g.node_at(profile.epsilon());
        CHECK(gn(2, k + 7) == f(2, 7));
        CHECK(gn(1, k) == doctest::Approx(c[1]));
        // Energy over the truncated shifted part [eps, L + eps] equals the Dirichlet part on [0, L].
        err.push_back(std::abs(form_energy(FormKind::barrier(profile), gn, eta) - target) / target);
    }
    // Smooth g: midpoint-type error, second order.
    CHECK(err[0] < 1e-5);
    CHECK(err[1] / err[0] == doctest::Approx(0.25).epsilon(0.05));
}

TEST_CASE("matrix export") {
    const Grid g(2, 4, 0.5);
    const FormMatrix m = assemble(FormKind::snapping(1.0), g, AngularMeasure::uniform(2));
    std::ostringstream os;
    export_matrix(m, os);
    const std::string s = os.str();
    CHECK(s.rfind("%%MatrixMarket matrix coordinate real", 0) == 0);
    CHECK(s.find("\n8 8 ") != std::string::npos);
}
