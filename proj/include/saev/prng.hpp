#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>

namespace saev {

// Counter-based generator: every draw is a pure function of (seed, counter),
// so sampling the same cell of a demand table gives the same value no matter
// how many other cells were sampled before it, on any platform. The mixer is
// splitmix64 (Steele et al. 2014), applied twice to decorrelate seed and
// counter.
inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

inline std::uint64_t counter_hash(std::uint64_t seed, std::uint64_t counter) {
    return splitmix64(splitmix64(seed) ^ counter);
}

// Uniform draw in [0, 1) with 53 random bits, exact on any IEEE double.
inline double counter_uniform(std::uint64_t seed, std::uint64_t counter) {
    return static_cast<double>(counter_hash(seed, counter) >> 11) * 0x1.0p-53;
}

// Poisson sample by CDF inversion of the uniform above. Exact for the small
// rates this project uses (per-cell, per-step arrival rates well below 1);
// the guard keeps the loop honest if a scenario ever scales rates absurdly.
inline int counter_poisson(double lambda, std::uint64_t seed, std::uint64_t counter) {
    if (lambda < 0.0)
        throw std::invalid_argument("counter_poisson: negative rate");
    if (lambda == 0.0)
        return 0;
    if (lambda > 100.0)
        throw std::invalid_argument("counter_poisson: rate too large for inversion sampling");
    const double u = counter_uniform(seed, counter);
    double p = std::exp(-lambda);
    double cdf = p;
    int k = 0;
    while (u >= cdf && k < 1000) {
        ++k;
        p *= lambda / k;
        cdf += p;
    }
    return k;
}

// Uniform integer in [0, n) by scaling; bias is below 2^-53 * n, irrelevant
// for the fleet sizes and node counts involved.
inline int counter_uniform_int(int n, std::uint64_t seed, std::uint64_t counter) {
    if (n <= 0)
        throw std::invalid_argument("counter_uniform_int: empty range");
    return static_cast<int>(counter_uniform(seed, counter) * n);
}

} // namespace saev
