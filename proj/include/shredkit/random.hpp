#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace shredkit {

// Fixed engine; the draws below avoid the implementation-defined standard
// distributions so sequences match across standard libraries.
using Rng = std::mt19937_64;

// Uniform double in [0, 1) from 53 random bits.
double uniform01(Rng& rng);

// Uniform integer in [0, bound) by rejection sampling; bound > 0.
std::uint64_t uniform_below(Rng& rng, std::uint64_t bound);

std::uint64_t splitmix64(std::uint64_t x);

// Seed for one unit of work, from a base seed, a key (FNV-1a) and an index.
std::uint64_t derive_seed(std::uint64_t base, std::string_view key, std::uint64_t index);

}  // namespace shredkit
