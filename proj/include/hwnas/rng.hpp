#pragma once

#include <cstdint>
#include <random>

namespace hwnas {

/// splitmix64 step; used to whiten seeds before feeding std::mt19937_64.
inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
}

/// Combine a base seed with stream tags into an independent child seed.
/// Used wherever work is split across individuals, rows or runs so that
/// concurrent workers never share a generator.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0) {
    return splitmix64(splitmix64(seed ^ splitmix64(a)) ^ splitmix64(b ^ 0x517cc1b727220a95ull));
}

/// Seeded generator handle. All randomized operators take one of these;
/// given the same state they produce the same result.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : gen_(splitmix64(seed)) {}

    /// Uniform integer in [0, n).
    std::uint64_t below(std::uint64_t n) {
        std::uniform_int_distribution<std::uint64_t> d(0, n - 1);
        return d(gen_);
    }

    /// Uniform real in [0, 1).
    double real() {
        std::uniform_real_distribution<double> d(0.0, 1.0);
        return d(gen_);
    }

    /// Uniform real in [lo, hi).
    double real(double lo, double hi) {
        std::uniform_real_distribution<double> d(lo, hi);
        return d(gen_);
    }

    /// Standard normal draw.
    double normal() {
        std::normal_distribution<double> d(0.0, 1.0);
        return d(gen_);
    }

    std::mt19937_64& raw() { return gen_; }

private:
    std::mt19937_64 gen_;
};

}  // namespace hwnas
