#include "sustain/rng.hpp"

#include <cmath>

#include "sustain/error.hpp"

namespace sustain {

std::uint64_t Rng::uniform_index(std::uint64_t n) {
    if (n == 0) throw NumericError("Rng::uniform_index: empty range");
    // Rejection sampling on the largest multiple of n below 2^64.
    const std::uint64_t limit = (~std::uint64_t{0}) - ((~std::uint64_t{0}) % n + 1) % n;
    std::uint64_t x = engine_();
    while (x > limit) x = engine_();
    return x % n;
}

std::int64_t Rng::uniform_int(std::int64_t lo, std::int64_t hi) {
    if (hi < lo) throw NumericError("Rng::uniform_int: empty range");
    const auto span = static_cast<std::uint64_t>(hi) - static_cast<std::uint64_t>(lo);
    if (span == ~std::uint64_t{0}) return static_cast<std::int64_t>(engine_());
    return lo + static_cast<std::int64_t>(uniform_index(span + 1));
}

double Rng::uniform_real() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

std::int64_t Rng::poisson(double mean) {
    if (!(mean >= 0.0) || mean >= 700.0) throw NumericError("Rng::poisson: mean out of range");
    if (mean == 0.0) return 0;
    const double u = uniform_real();
    double p = std::exp(-mean);
    double cdf = p;
    std::int64_t k = 0;
    while (u >= cdf) {
        ++k;
        p *= mean / static_cast<double>(k);
        cdf += p;
        if (p == 0.0) break;
    }
    return k;
}

std::uint64_t Rng::derive_seed(std::uint64_t base, std::uint64_t a, std::uint64_t b) {
    // splitmix64 finalizer over the combined words.
    auto mix = [](std::uint64_t z) {
        z += 0x9e3779b97f4a7c15ULL;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    };
    return mix(mix(mix(base) ^ a) ^ b);
}

} // namespace sustain
