#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>

#include "walsh/errors.hpp"
#include "walsh/random.hpp"
#include "walsh/stats.hpp"

using namespace walsh;

TEST_CASE("normal and half-normal distribution functions") {
    CHECK(normal_cdf(0.0) == doctest::Approx(0.5));
    CHECK(normal_cdf(1.959963984540054) == doctest::Approx(0.975).epsilon(1e-12));
    CHECK(normal_cdf(-40.0) >= 0.0);
    CHECK(half_normal_cdf(0.0, 1.0) == 0.0);
    CHECK(half_normal_cdf(-1.0, 1.0) == 0.0);
    CHECK(half_normal_cdf(1.0, 1.0) == doctest::Approx(0.6826894921370859));
    CHECK(half_normal_cdf(2.0, 4.0) == doctest::Approx(half_normal_cdf(1.0, 1.0)));
    // Reflected from 0 is half-normal.
    CHECK(reflected_bm_cdf(0.7, 0.0, 0.5) == doctest::Approx(half_normal_cdf(0.7, 0.5)));
    // Far from the wall it is a shifted normal.
    CHECK(reflected_bm_cdf(10.5, 10.0, 0.25) == doctest::Approx(normal_cdf(1.0)).epsilon(1e-12));
}

TEST_CASE("KS distances") {
    std::vector<double> q(1000);
    for (std::size_t i = 0; i < q.size(); ++i) q[i] = (double(i) + 0.5) / double(q.size());
    CHECK(ks_distance(q, [](double x) { return std::clamp(x, 0.0, 1.0); }) ==
          doctest::Approx(0.5 / 1000.0));
    CHECK(ks_two_sample(q, q) == 0.0);
    std::vector<double> shifted = q;
    for (double& x : shifted) x += 0.1;
    CHECK(ks_two_sample(q, shifted) == doctest::Approx(0.1).epsilon(0.02));
    CHECK(ks_discrete(std::vector<double>{0.5, 0.5}, std::vector<double>{0.2, 0.8}) ==
          doctest::Approx(0.3));
}

TEST_CASE("chi-square statistic and p-value") {
    // Two degrees of freedom: survival is exp(-x/2).
    const ChiSquareResult r = chi_square(std::vector<double>{10, 20, 30}, std::vector<double>{20, 20, 20});
    CHECK(r.statistic == doctest::Approx(10.0));
    CHECK(r.dof == 2);
    CHECK(r.p_value == doctest::Approx(std::exp(-5.0)));
    CHECK_THROWS_AS(chi_square(std::vector<double>{1, 2}, std::vector<double>{1}), ShapeError);
    CHECK_THROWS_AS(chi_square(std::vector<double>{1, 2}, std::vector<double>{1, 0}), DomainError);
    const ChiSquareResult p =
        chi_square_probabilities(std::vector<std::uint64_t>{25, 25, 50}, std::vector<double>{0.25, 0.25, 0.5});
    CHECK(p.statistic == doctest::Approx(0.0));
    CHECK(p.p_value == doctest::Approx(1.0));
}

TEST_CASE("mean estimate") {
    const MeanEstimate m = mean_estimate(std::vector<double>{1.0, 2.0, 3.0, 4.0});
    CHECK(m.mean == doctest::Approx(2.5));
    CHECK(m.standard_error == doctest::Approx(std::sqrt(5.0 / 3.0 / 4.0)));
    CHECK(m.n == 4);
}

TEST_CASE("random streams: reproducible, independent per path") {
    RandomStream a = RandomStream::for_path(1, 5), b = RandomStream::for_path(1, 5);
    RandomStream c = RandomStream::for_path(1, 6), d = RandomStream::for_path(2, 5);
    const auto x = a();
    CHECK(x == b());
    CHECK(x != c());
    CHECK(x != d());

    RandomStream rng(3);
    std::vector<double> u(100000), e(100000);
    for (double& v : u) v = rng.uniform_open0();
    for (double& v : e) v = rng.exponential(2.0);
    CHECK(*std::min_element(u.begin(), u.end()) > 0.0);
    CHECK(*std::max_element(u.begin(), u.end()) <= 1.0);
    std::sort(e.begin(), e.end());
    CHECK(ks_distance(e, [](double t) { return 1.0 - std::exp(-2.0 * t); }) < 0.006);
}
