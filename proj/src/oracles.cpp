#include "walsh/oracles.hpp"

#include <cmath>
#include <numbers>
#include <vector>

#include "walsh/errors.hpp"
#include "walsh/random.hpp"

namespace walsh {

MeanEstimate random_walk_local_time(double r, double T, double h, std::uint64_t replications,
                                    std::uint64_t seed) {
    if (!(h > 0.0) || !(T > 0.0) || !(r >= 0.0) || replications == 0)
        throw ConfigError("random_walk_local_time: need h, T > 0, r >= 0, replications > 0");
    const double q = r / h;
    if (std::abs(q - std::round(q)) > 1e-9 * std::max(1.0, q))
        throw AlignmentError("random_walk_local_time: start is not a lattice point");
    const auto start = static_cast<std::int64_t>(std::round(q));
    const auto steps = static_cast<std::uint64_t>(std::llround(T / (h * h)));

    std::vector<double> values(replications);
    for (std::uint64_t n = 0; n < replications; ++n) {
        RandomStream rng = RandomStream::for_path(seed, n);
        std::int64_t pos = start;
        std::uint64_t visits = 0;
        std::uint64_t k = 0;
        while (k < steps) {
            std::uint64_t bits = rng();
            const std::uint64_t chunk = std::min<std::uint64_t>(64, steps - k);
            for (std::uint64_t b = 0; b < chunk; ++b) {
                visits += pos == 0;
                pos += static_cast<std::int64_t>(bits & 1u) * 2 - 1;
                bits >>= 1;
            }
            k += chunk;
        }
        values[n] = 2.0 * h * static_cast<double>(visits);
    }
    return mean_estimate(values);
}

double expected_local_time(double r, double T) {
    if (!(T > 0.0) || !(r >= 0.0)) throw DomainError("expected_local_time: need T > 0, r >= 0");
    const double s = std::sqrt(T);
    const double z = r / s;
    const double phi = std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi);
    const double abs_mean = r * std::erf(z / std::numbers::sqrt2) + 2.0 * s * phi;
    return 2.0 * (abs_mean - r);
}

}  // namespace walsh
