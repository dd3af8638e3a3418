#pragma once

#include <cstdint>
#include <random>

namespace sustain {

/// Seedable generator with portable derived distributions.
///
/// The engine is std::mt19937_64, whose output sequence is fixed by the
/// standard. The standard library distributions are not portable across
/// implementations, so bounded integers, uniform reals and Poisson draws are
/// derived here from raw engine output.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next_u64() { return engine_(); }

    /// Uniform integer in [0, n). n must be positive.
    std::uint64_t uniform_index(std::uint64_t n);

    /// Uniform integer in [lo, hi].
    std::int64_t uniform_int(std::int64_t lo, std::int64_t hi);

    /// Uniform double in [0, 1) with 53 random bits.
    double uniform_real();

    /// Poisson(mean) by inversion; mean must be finite and < 700.
    std::int64_t poisson(double mean);

    /// Independent child stream, for runs that must not share state.
    static std::uint64_t derive_seed(std::uint64_t base, std::uint64_t a, std::uint64_t b = 0);

private:
    std::mt19937_64 engine_;
};

} // namespace sustain
