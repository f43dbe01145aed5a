#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace fdsim {

// splitmix64 finalizer. Stable across platforms, used for stream seeding
// and for hashing small integer tuples where std::hash would not be
// reproducible between standard libraries.
constexpr std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

constexpr std::uint64_t mix_u64(std::uint64_t a, std::uint64_t b) {
    return splitmix64(a ^ splitmix64(b));
}

// FNV-1a over raw bytes, for wire-format and path hashing.
constexpr std::uint64_t fnv1a64(const std::uint8_t* data, std::size_t n,
                                std::uint64_t h = 0xcbf29ce484222325ULL) {
    for (std::size_t i = 0; i < n; ++i) {
        h ^= data[i];
        h *= 0x100000001b3ULL;
    }
    return h;
}

constexpr std::uint64_t fnv1a64_u32(std::uint32_t v, std::uint64_t h) {
    std::uint8_t b[4] = {static_cast<std::uint8_t>(v >> 24),
                         static_cast<std::uint8_t>(v >> 16),
                         static_cast<std::uint8_t>(v >> 8),
                         static_cast<std::uint8_t>(v)};
    return fnv1a64(b, 4, h);
}

// Deterministic RNG stream. mt19937_64 has a standard-mandated sequence;
// variates are derived by hand because std::*_distribution output is
// implementation-defined and would break cross-toolchain reproducibility.
class Rng {
  public:
    explicit Rng(std::uint64_t seed) : gen_(splitmix64(seed)) {}

    std::uint64_t next_u64() { return gen_(); }

    // Uniform in [0,1) with 53 significant bits.
    double next_double() {
        return static_cast<double>(gen_() >> 11) * 0x1.0p-53;
    }

    // Uniform integer in [0,n). Lemire multiply-shift, bias rejected.
    std::uint64_t next_below(std::uint64_t n) {
        if (n <= 1) return 0;
        const std::uint64_t reject_below = (0 - n) % n;
        while (true) {
            __uint128_t m = static_cast<__uint128_t>(gen_()) * n;
            if (static_cast<std::uint64_t>(m) >= reject_below)
                return static_cast<std::uint64_t>(m >> 64);
        }
    }

    // Exponential with the given mean via inverse transform.
    double next_exponential(double mean) {
        return -mean * std::log1p(-next_double());
    }

  private:
    std::mt19937_64 gen_;
};

}  // namespace fdsim
