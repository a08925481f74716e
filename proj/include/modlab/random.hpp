#pragma once

#include <cstdint>
#include <random>

namespace modlab {

/// Uniform double in [0, 1) from the top 53 bits; identical on every standard library.
double uniform01(std::mt19937_64& rng);
double uniform(std::mt19937_64& rng, double lo, double hi);
/// Box-Muller normal draw built on uniform01.
double normal(std::mt19937_64& rng, double stddev);

/// Independent stream seed for (seed, stream) via SplitMix64.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream);

}  // namespace modlab
