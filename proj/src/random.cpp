#include "walsh/random.hpp"

#include <cmath>

namespace walsh {

RandomStream::RandomStream(std::uint64_t seed) noexcept {
    std::uint64_t sm = seed;
    for (auto& word : s_) word = splitmix64(sm);
}

RandomStream RandomStream::for_path(std::uint64_t master_seed, std::uint64_t index) noexcept {
    // Counter-based split: hash (seed, index) into a fresh 64-bit seed.
    std::uint64_t mix = master_seed;
    const std::uint64_t a = splitmix64(mix);
    std::uint64_t idx = index ^ a;
    return RandomStream(splitmix64(idx) ^ (a << 1));
}

double RandomStream::exponential(double rate) noexcept {
    return -std::log(uniform_open0()) / rate;
}

}  // namespace walsh
