#include "walsh/domain.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <string>

namespace walsh {

AngularMeasure::AngularMeasure(std::vector<double> angles, std::vector<double> weights)
    : angles_(std::move(angles)), weights_(std::move(weights)) {
    if (angles_.size() != weights_.size())
        throw ConfigError("angular measure: " + std::to_string(angles_.size()) + " angles but " +
                          std::to_string(weights_.size()) + " weights");
    if (weights_.size() < 2)
        throw ConfigError("angular measure: at least 2 rays required, got " +
                          std::to_string(weights_.size()));
    for (std::size_t j = 0; j < angles_.size(); ++j) {
        if (!(angles_[j] >= 0.0 && angles_[j] < 2.0 * std::numbers::pi))
            throw ConfigError("angular measure: angle " + std::to_string(j) + " outside [0, 2pi)");
        if (j > 0 && !(angles_[j] > angles_[j - 1]))
            throw ConfigError("angular measure: angles must be strictly increasing");
        if (!(weights_[j] > 0.0) || !std::isfinite(weights_[j]))
            throw ConfigError("angular measure: weight " + std::to_string(j) +
                              " must be strictly positive");
    }
    const double total = std::accumulate(weights_.begin(), weights_.end(), 0.0);
    if (std::abs(total - 1.0) > 1e-12)
        throw ConfigError("angular measure: weights sum to " + std::to_string(total) +
                          ", expected 1");
    cumulative_.resize(weights_.size());
    std::partial_sum(weights_.begin(), weights_.end(), cumulative_.begin());
    cumulative_.back() = 1.0;
}

AngularMeasure AngularMeasure::uniform(std::size_t rays) {
    if (rays < 2) throw ConfigError("angular measure: at least 2 rays required");
    return with_weights(std::vector<double>(rays, 1.0 / static_cast<double>(rays)));
}

AngularMeasure AngularMeasure::with_weights(std::vector<double> weights) {
    std::vector<double> angles(weights.size());
    for (std::size_t j = 0; j < angles.size(); ++j)
        angles[j] = 2.0 * std::numbers::pi * static_cast<double>(j) /
                    static_cast<double>(angles.size());
    return AngularMeasure(std::move(angles), std::move(weights));
}

std::size_t AngularMeasure::sample(RandomStream& rng) const noexcept {
    const double u = rng.uniform();
    const auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), u);
    const auto j = static_cast<std::size_t>(it - cumulative_.begin());
    return std::min(j, cumulative_.size() - 1);
}

double AngularMeasure::average(std::span<const double> per_ray) const {
    if (per_ray.size() != weights_.size())
        throw ShapeError("angular average: expected " + std::to_string(weights_.size()) +
                         " values, got " + std::to_string(per_ray.size()));
    double sum = 0.0;
    for (std::size_t j = 0; j < per_ray.size(); ++j) sum += weights_[j] * per_ray[j];
    return sum;
}

void validate_point(const StarPoint& point, std::size_t rays) {
    if (!(point.r >= 0.0) || !std::isfinite(point.r))
        throw ConfigError("star point: radial coordinate must be finite and >= 0");
    if (point.ray >= rays)
        throw ConfigError("star point: ray " + std::to_string(point.ray) + " out of range (" +
                          std::to_string(rays) + " rays)");
}

bool same_point(const StarPoint& a, const StarPoint& b, Topology topology) noexcept {
    if (a.r != b.r) return false;
    if (topology == Topology::Glued && a.r == 0.0) return true;
    return a.ray == b.ray;
}

StarPoint shift(const StarPoint& point, double beta) {
    if (!(beta >= 0.0)) throw DomainError("shift: beta must be >= 0");
    return {point.ray, point.r + beta};
}

StarPoint unshift(const StarPoint& point, double beta) {
    if (!(beta >= 0.0)) throw DomainError("unshift: beta must be >= 0");
    if (point.r < beta) throw DomainError("unshift: point lies inside the removed ball");
    return {point.ray, point.r - beta};
}

PlacedPoint darning_project(const StarPoint& point) noexcept {
    return {point, Topology::Glued};
}

PlacedPoint darning_project(const PlacedPoint& point) noexcept {
    return {point.point, Topology::Glued};
}

BarrierProfile::BarrierProfile(std::vector<double> breakpoints, std::vector<double> values)
    : breakpoints_(std::move(breakpoints)), values_(std::move(values)) {
    if (values_.empty()) throw ConfigError("barrier profile: no pieces");
    if (breakpoints_.size() != values_.size() + 1)
        throw ConfigError("barrier profile: need one more breakpoint than values");
    if (breakpoints_.front() != 0.0) throw ConfigError("barrier profile: breakpoints must start at 0");
    for (std::size_t k = 1; k < breakpoints_.size(); ++k)
        if (!(breakpoints_[k] > breakpoints_[k - 1]) || !std::isfinite(breakpoints_[k]))
            throw ConfigError("barrier profile: breakpoints must be strictly increasing");
    for (double b : values_)
        if (!(b > 0.0) || !std::isfinite(b))
            throw ConfigError("barrier profile: conductivities must be finite and positive");
    const auto [lo, hi] = std::minmax_element(values_.begin(), values_.end());
    lower_ = *lo;
    upper_ = *hi;
}

BarrierProfile BarrierProfile::constant(double epsilon, double conductivity) {
    if (!(epsilon > 0.0)) throw ConfigError("barrier profile: epsilon must be positive");
    return BarrierProfile({0.0, epsilon}, {conductivity});
}

double BarrierProfile::conductivity(double r) const noexcept {
    if (r >= epsilon()) return 1.0;
    const auto it = std::upper_bound(breakpoints_.begin(), breakpoints_.end(), r);
    const auto k = static_cast<std::size_t>(it - breakpoints_.begin()) - 1;
    return values_[std::min(k, values_.size() - 1)];
}

double BarrierProfile::scale(double r) const noexcept {
    double s = 0.0;
    for (std::size_t k = 0; k < values_.size(); ++k) {
        const double lo = breakpoints_[k];
        const double hi = breakpoints_[k + 1];
        if (r <= lo) return s;
        s += (std::min(r, hi) - lo) / values_[k];
    }
    if (r > epsilon()) s += r - epsilon();
    return s;
}

double resistance(const BarrierProfile& profile) noexcept {
    double gamma = 0.0;
    const auto bp = profile.breakpoints();
    const auto b = profile.values();
    for (std::size_t k = 0; k < b.size(); ++k) gamma += (bp[k + 1] - bp[k]) / b[k];
    return gamma;
}

BarrierProfile power_law_profile(double kappa, double alpha, double epsilon) {
    if (!(kappa > 0.0)) throw ConfigError("power law profile: kappa must be positive");
    if (!(epsilon > 0.0)) throw ConfigError("power law profile: epsilon must be positive");
    return BarrierProfile::constant(epsilon, std::pow(kappa * epsilon, -alpha));
}

BarrierProfile concatenate(const BarrierProfile& inner, const BarrierProfile& outer) {
    std::vector<double> bp(inner.breakpoints().begin(), inner.breakpoints().end());
    std::vector<double> vals(inner.values().begin(), inner.values().end());
    const double offset = inner.epsilon();
    for (std::size_t k = 1; k < outer.breakpoints().size(); ++k)
        bp.push_back(offset + outer.breakpoints()[k]);
    vals.insert(vals.end(), outer.values().begin(), outer.values().end());
    return BarrierProfile(std::move(bp), std::move(vals));
}

}  // namespace walsh
