#include "walsh/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <boost/math/distributions/chi_squared.hpp>

#include "walsh/errors.hpp"

namespace walsh {

double normal_cdf(double x) noexcept { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

double half_normal_cdf(double x, double t) noexcept {
    if (x <= 0.0) return 0.0;
    return std::erf(x / std::sqrt(2.0 * t));
}

double reflected_bm_cdf(double x, double r, double t) noexcept {
    if (x < 0.0) return 0.0;
    const double s = std::sqrt(t);
    return normal_cdf((x - r) / s) + normal_cdf((x + r) / s) - 1.0;
}

double ks_distance(std::span<const double> sorted, const std::function<double(double)>& cdf) {
    if (sorted.empty()) throw EmptyInputError("ks_distance: no samples");
    if (!std::is_sorted(sorted.begin(), sorted.end()))
        throw ShapeError("ks_distance: samples must be sorted ascending");
    const double n = static_cast<double>(sorted.size());
    double d = 0.0;
    for (std::size_t i = 0; i < sorted.size(); ++i) {
        const double f = cdf(sorted[i]);
        d = std::max({d, static_cast<double>(i + 1) / n - f, f - static_cast<double>(i) / n});
    }
    return d;
}

double ks_two_sample(std::span<const double> a, std::span<const double> b) {
    if (a.empty() || b.empty()) throw EmptyInputError("ks_two_sample: empty sample");
    if (!std::is_sorted(a.begin(), a.end()) || !std::is_sorted(b.begin(), b.end()))
        throw ShapeError("ks_two_sample: samples must be sorted ascending");
    const double na = static_cast<double>(a.size());
    const double nb = static_cast<double>(b.size());
    std::size_t i = 0;
    std::size_t j = 0;
    double d = 0.0;
    while (i < a.size() && j < b.size()) {
        const double x = std::min(a[i], b[j]);
        while (i < a.size() && a[i] == x) ++i;
        while (j < b.size() && b[j] == x) ++j;
        d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
    }
    return d;
}

double ks_discrete(std::span<const double> p, std::span<const double> q) {
    if (p.size() != q.size()) throw ShapeError("ks_discrete: length mismatch");
    double cp = 0.0;
    double cq = 0.0;
    double d = 0.0;
    for (std::size_t k = 0; k < p.size(); ++k) {
        cp += p[k];
        cq += q[k];
        d = std::max(d, std::abs(cp - cq));
    }
    return d;
}

ChiSquareResult chi_square(std::span<const double> counts, std::span<const double> expected) {
    if (counts.size() != expected.size())
        throw ShapeError("chi_square: counts and expectations differ in length");
    if (counts.size() < 2) throw ShapeError("chi_square: need at least two categories");
    ChiSquareResult out;
    for (std::size_t k = 0; k < counts.size(); ++k) {
        if (!(expected[k] > 0.0)) throw DomainError("chi_square: expected counts must be positive");
        const double d = counts[k] - expected[k];
        out.statistic += d * d / expected[k];
    }
    out.dof = static_cast<int>(counts.size()) - 1;
    const boost::math::chi_squared_distribution<double> dist(out.dof);
    out.p_value = boost::math::cdf(boost::math::complement(dist, out.statistic));
    return out;
}

ChiSquareResult chi_square_probabilities(std::span<const std::uint64_t> counts,
                                         std::span<const double> probabilities) {
    if (counts.size() != probabilities.size())
        throw ShapeError("chi_square: counts and probabilities differ in length");
    double n = 0.0;
    for (auto c : counts) n += static_cast<double>(c);
    std::vector<double> obs(counts.size());
    std::vector<double> exp(counts.size());
    for (std::size_t k = 0; k < counts.size(); ++k) {
        obs[k] = static_cast<double>(counts[k]);
        exp[k] = n * probabilities[k];
    }
    return chi_square(obs, exp);
}

MeanEstimate mean_estimate(std::span<const double> values) {
    if (values.empty()) throw EmptyInputError("mean_estimate: no values");
    MeanEstimate m;
    m.n = values.size();
    double sum = 0.0;
    for (double v : values) sum += v;
    m.mean = sum / static_cast<double>(m.n);
    if (m.n > 1) {
        double ss = 0.0;
        for (double v : values) ss += (v - m.mean) * (v - m.mean);
        m.standard_error = std::sqrt(ss / static_cast<double>(m.n - 1) / static_cast<double>(m.n));
    }
    return m;
}

}  // namespace walsh
