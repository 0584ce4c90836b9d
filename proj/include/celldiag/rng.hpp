#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <vector>

namespace celldiag {

/// Seeded generator used by every randomized operation. Distribution
/// sampling is implemented here (not via <random> distributions, whose
/// output is implementation-defined) so the same seed yields the same
/// stream on every platform.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed) {
        // splitmix64 warm-up so small seeds diverge immediately
        next_u64();
    }

    std::uint64_t next_u64() {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    /// Uniform in [0, 1).
    double next_unit() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    /// Uniform in [lo, hi).
    double uniform(double lo, double hi) {
        return lo + (hi - lo) * next_unit();
    }

    /// Uniform integer in [0, n).
    std::uint64_t below(std::uint64_t n) {
        // modulo bias is irrelevant at the dataset sizes used here
        return next_u64() % n;
    }

    /// Box-Muller; one value per call, deterministic stream.
    double gaussian(double mean, double std_dev) {
        if (std_dev <= 0.0) return mean;
        double u1 = next_unit();
        double u2 = next_unit();
        while (u1 <= 0.0) u1 = next_unit();
        double r = std::sqrt(-2.0 * std::log(u1));
        return mean + std_dev * r * std::cos(2.0 * std::numbers::pi * u2);
    }

    /// Fisher-Yates, deterministic across platforms.
    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) {
            std::size_t j = static_cast<std::size_t>(below(i));
            std::swap(v[i - 1], v[j]);
        }
    }

    /// Derive an independent stream (used for per-restart seeding).
    std::uint64_t fork_seed(std::uint64_t salt) {
        std::uint64_t z = state_ ^ (0x9e3779b97f4a7c15ULL * (salt + 1));
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        return z ^ (z >> 27);
    }

private:
    std::uint64_t state_;
};

} // namespace celldiag
