#pragma once

// Reference values computed independently of the path samplers.

#include <cstdint>

#include "walsh/stats.hpp"

namespace walsh {

/// Mean local time at 0 (occupation density normalization) of reflected
/// Brownian motion over [0, T], estimated from a simple symmetric random
/// walk on hZ with time step h^2: l_T ~ 2 h * #{k < T/h^2 : S_k = 0}.
/// The start r must be a multiple of h. Steps are taken from raw random
/// bits, 64 per draw.
MeanEstimate random_walk_local_time(double r, double T, double h, std::uint64_t replications,
                                    std::uint64_t seed);

/// Exact E_r[l_T] = 2 (E|r + B_T| - r).
double expected_local_time(double r, double T);

}  // namespace walsh
