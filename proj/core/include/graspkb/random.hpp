#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace graspkb {

/// SplitMix64 finalizer; used to derive independent stream seeds.
[[nodiscard]] constexpr std::uint64_t mix_seed(std::uint64_t x) noexcept
{
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

[[nodiscard]] constexpr std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) noexcept
{
    return mix_seed(mix_seed(seed) ^ mix_seed(stream + 0x632be59bd9b4e019ULL));
}

/// Deterministic random source. Draws are defined bit-for-bit (no reliance
/// on implementation-defined std distributions) so traces reproduce across
/// standard libraries.
class Rng {
  public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next() { return engine_(); }

    /// Uniform on [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// Uniform integer on [0, n).
    std::uint64_t below(std::uint64_t n)
    {
        // Lemire-style rejection keeps the draw unbiased.
        std::uint64_t const limit = -n % n;
        for (;;) {
            std::uint64_t const r = engine_();
            if (r >= limit) {
                return r % n;
            }
        }
    }

    bool bernoulli(double p) { return uniform() < p; }

    /// Standard normal via Box-Muller (one value per call, spare discarded).
    double normal()
    {
        double u1 = uniform();
        while (u1 <= 0.0) {
            u1 = uniform();
        }
        double const u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
    }

  private:
    std::mt19937_64 engine_;
};

} // namespace graspkb
