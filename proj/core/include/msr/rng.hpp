#pragma once

#include <cstdint>
#include <random>
#include <vector>

namespace msr {

/// splitmix64 finalizer; used to derive child seeds from a master seed.
inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t salt) {
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (salt + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/// Seeded random stream with a fixed mapping from raw mt19937_64 output
/// to doubles, so the draw order is the same on every platform with the
/// same standard mt19937_64 engine.
///
/// Draw order inside generate_observations: for each segment k, one
/// uniform for the shift, then m gaussians for the noise. Gaussians come
/// from a Box-Muller stream with one cached spare carried across calls.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : gen_(seed) {}

    /// Uniform double in [0, 1) with 53 random bits.
    double uniform() {
        return static_cast<double>(gen_() >> 11) * 0x1.0p-53;
    }

    /// Standard normal deviate.
    double gaussian();

    /// Exponential deviate with unit rate.
    double exponential();

    /// Index drawn from a pmf by inverse CDF walk.
    int categorical(const std::vector<double>& pmf);

private:
    std::mt19937_64 gen_;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

}  // namespace msr
