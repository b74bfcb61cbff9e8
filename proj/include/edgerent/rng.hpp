#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace edgerent {

/// SplitMix64 mixing step. Used to whiten seeds and derive sub-stream seeds.
[[nodiscard]] constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Seed for sub-stream `stream` of a master seed. Distinct streams
/// (replications, generator roles) get decorrelated engines while staying
/// fully reproducible.
[[nodiscard]] constexpr std::uint64_t derive_seed(std::uint64_t master,
                                                  std::uint64_t stream) noexcept {
    return splitmix64(master ^ splitmix64(stream + 0x517cc1b727220a95ULL));
}

/// Seeded random source with portable sampling.
///
/// std::mt19937_64 is fully specified by the standard, but the
/// std::*_distribution adaptors are not, so every distribution here is
/// hand-rolled: a given seed yields the same stream on every platform and
/// standard library.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : eng_(splitmix64(seed)) {}

    /// 64 raw random bits.
    std::uint64_t bits() { return eng_(); }

    /// Uniform double in [0, 1) with 53-bit resolution.
    double uniform01() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

    /// Uniform double in [lo, hi).
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

    /// Uniform integer in [lo, hi] (inclusive); no modulo bias worth worrying
    /// about at the range sizes used here, but use rejection anyway.
    std::int64_t uniform_int(std::int64_t lo, std::int64_t hi) {
        const auto span = static_cast<std::uint64_t>(hi - lo) + 1;
        const std::uint64_t limit = std::uint64_t(-1) - std::uint64_t(-1) % span;
        std::uint64_t r;
        do {
            r = eng_();
        } while (r >= limit);
        return lo + static_cast<std::int64_t>(r % span);
    }

    bool bernoulli(double p) { return uniform01() < p; }

    /// Poisson sample: Knuth's product method for small means; larger means
    /// are split in half recursively (sums of independent Poissons are
    /// Poisson), which stays exact and avoids exp(-mean) underflow.
    std::int64_t poisson(double mean) {
        if (!(mean > 0.0)) return 0;
        if (mean > kPoissonSplit) {
            const double half = mean / 2.0;
            return poisson(half) + poisson(mean - half);
        }
        const double limit = std::exp(-mean);
        std::int64_t k = 0;
        double prod = uniform01();
        while (prod > limit) {
            ++k;
            prod *= uniform01();
        }
        return k;
    }

    /// Standard normal via Box-Muller; both values of each pair are used.
    double normal() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u1;
        do {
            u1 = uniform01();
        } while (u1 <= 0.0);
        const double u2 = uniform01();
        const double radius = std::sqrt(-2.0 * std::log(u1));
        const double angle = 2.0 * kPi * u2;
        spare_ = radius * std::sin(angle);
        have_spare_ = true;
        return radius * std::cos(angle);
    }

private:
    static constexpr double kPoissonSplit = 30.0;
    static constexpr double kPi = 3.14159265358979323846;

    std::mt19937_64 eng_;
    bool have_spare_ = false;
    double spare_ = 0.0;
};

}  // namespace edgerent
