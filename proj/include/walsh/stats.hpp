#pragma once

// Goodness-of-fit statistics used to compare simulated laws with closed forms.

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

namespace walsh {

/// Standard normal CDF.
double normal_cdf(double x) noexcept;

/// CDF of |N(0, t)|.
double half_normal_cdf(double x, double t) noexcept;

/// Transition CDF of reflected Brownian motion started at r after time t:
/// Phi((x - r)/sqrt t) + Phi((x + r)/sqrt t) - 1 for x >= 0.
double reflected_bm_cdf(double x, double r, double t) noexcept;

/// sup_x |F_n(x) - F(x)| for `sorted` ascending samples and a continuous
/// reference CDF. ShapeError on unsorted input, EmptyInputError on none.
double ks_distance(std::span<const double> sorted, const std::function<double(double)>& cdf);

/// Two-sample Kolmogorov-Smirnov distance between ascending samples.
double ks_two_sample(std::span<const double> a, std::span<const double> b);

/// KS distance between two discrete distributions on {0, ..., k-1}
/// (max absolute difference of cumulative sums).
double ks_discrete(std::span<const double> p, std::span<const double> q);

struct ChiSquareResult {
    double statistic = 0.0;
    int dof = 0;
    double p_value = 1.0;
};

/// Pearson chi-square of observed counts against expected counts, k - 1
/// degrees of freedom. ShapeError on length mismatch, DomainError on a
/// non-positive expectation.
ChiSquareResult chi_square(std::span<const double> counts, std::span<const double> expected);

/// Convenience: counts against probabilities summing to one.
ChiSquareResult chi_square_probabilities(std::span<const std::uint64_t> counts,
                                         std::span<const double> probabilities);

/// Mean and standard error of the mean.
struct MeanEstimate {
    double mean = 0.0;
    double standard_error = 0.0;
    std::size_t n = 0;
};

MeanEstimate mean_estimate(std::span<const double> values);

}  // namespace walsh
