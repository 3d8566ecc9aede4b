#pragma once

#include <array>
#include <cstdint>

namespace somqe {

/// Portable seeded generator: xoshiro256** with its state filled by four
/// successive SplitMix64 outputs starting from the 64-bit seed.
///
/// Only integer arithmetic is used, so a given seed produces the same stream
/// on every platform and compiler. Derived draws:
///  - uniform_index(n): Lemire multiply-shift with rejection, unbiased.
///  - uniform01(): top 53 bits of next() scaled by 2^-53, in [0, 1).
class Rng {
public:
    explicit Rng(std::uint64_t seed);

    std::uint64_t next();
    std::uint64_t uniform_index(std::uint64_t n);
    double uniform01();

private:
    std::array<std::uint64_t, 4> s_{};
};

// SplitMix64 step; also used to derive independent sub-seeds.
std::uint64_t splitmix64(std::uint64_t& state);

}  // namespace somqe
