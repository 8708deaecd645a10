#include <cmath>
#include <sstream>

#include "walsh/errors.hpp"
#include "walsh/montecarlo.hpp"

namespace walsh {

namespace {

std::size_t aligned_count(double length, double h, const char* what) {
    const double q = length / h;
    const double k = std::round(q);
    if (k < 1.0 || std::abs(q - k) > 1e-9 * std::max(1.0, q)) {
        std::ostringstream os;
        os << "barrier_walk: " << what << " = " << length << " is not a multiple of spacing " << h;
        throw AlignmentError(os.str());
    }
    return static_cast<std::size_t>(k);
}

}  // namespace

BarrierWalkScheme::BarrierWalkScheme(const BarrierProfile& profile, double grid_h,
                                     const SimConfig& config) {
    if (!(grid_h > 0.0)) throw ConfigError("barrier_walk: grid_h must be positive");
    const double eps = profile.epsilon();
    const double outer = config.outer_h > 0.0 ? config.outer_h : grid_h;
    const double R = config.outer_radius;
    if (!(R > eps)) throw ConfigError("barrier_walk: outer radius must exceed the barrier width");

    const auto bp = profile.breakpoints();
    for (std::size_t k = 1; k < bp.size(); ++k) aligned_count(bp[k], grid_h, "breakpoint");
    const std::size_t inner = aligned_count(eps, grid_h, "epsilon");
    const std::size_t beyond = aligned_count(R - eps, outer, "R - epsilon");

    nodes_.reserve(inner + beyond + 1);
    for (std::size_t i = 0; i <= inner; ++i) nodes_.push_back(static_cast<double>(i) * grid_h);
    nodes_.back() = eps;
    for (std::size_t i = 1; i <= beyond; ++i)
        nodes_.push_back(eps + static_cast<double>(i) * outer);
    nodes_.back() = R;

    const std::size_t n = nodes_.size();
    left_.assign(n, 0.0);
    duration_.assign(n, 0.0);
    const auto cell = [&](std::size_t i) {
        return profile.conductivity(0.5 * (nodes_[i] + nodes_[i + 1]));
    };
    {
        const double h = nodes_[1];
        duration_[0] = h * h / cell(0);
    }
    for (std::size_t i = 1; i + 1 < n; ++i) {
        const double h1 = nodes_[i] - nodes_[i - 1];
        const double h2 = nodes_[i + 1] - nodes_[i];
        const double a1 = cell(i - 1);
        const double a2 = cell(i);
        const double s1 = h1 / a1;
        const double s2 = h2 / a2;
        left_[i] = s2 / (s1 + s2);
        duration_[i] = (h1 * h1 * s2 / a1 + h2 * h2 * s1 / a2) / (s1 + s2);
    }
}

std::size_t BarrierWalkScheme::node_of(double r) const {
    const auto it = std::lower_bound(nodes_.begin(), nodes_.end(), r - 1e-12 * (1.0 + r));
    if (it == nodes_.end() || std::abs(*it - r) > 1e-9 * (1.0 + r)) {
        std::ostringstream os;
        os << "barrier_walk: start radius " << r << " is not a walk node";
        throw AlignmentError(os.str());
    }
    return static_cast<std::size_t>(it - nodes_.begin());
}

JumpChainSample BarrierWalkScheme::sample(const StarPoint& start, const AngularMeasure& eta,
                                          double horizon, RandomStream& rng) const {
    validate_point(start, eta.size());
    std::size_t i = node_of(start.r);
    const std::size_t last = nodes_.size() - 1;
    std::size_t ray = start.ray;
    if (i == 0) ray = eta.sample(rng);
    double t = 0.0;
    bool touched = false;
    JumpChainSample out;
    for (;;) {
        if (i == last) {
            out.records.push_back(
                {{ray, nodes_[last]}, touched ? ExitKind::OuterBoundary : ExitKind::SameRay, t});
            return out;
        }
        if (t >= horizon) {
            out.records.push_back({{ray, nodes_[i]}, ExitKind::Horizon, t});
            return out;
        }
        t += duration_[i];
        if (i == 0) {
            i = 1;
            continue;
        }
        i = rng.uniform() < left_[i] ? i - 1 : i + 1;
        if (i == 0) {
            ray = eta.sample(rng);
            touched = true;
            out.records.push_back({{ray, 0.0}, ExitKind::Rebirth, t});
        }
    }
}

JumpChainSample barrier_walk(const StarPoint& start, const BarrierProfile& profile, double grid_h,
                             const AngularMeasure& eta, const SimConfig& config,
                             RandomStream& rng) {
    return BarrierWalkScheme(profile, grid_h, config).sample(start, eta, config.horizon, rng);
}

}  // namespace walsh
