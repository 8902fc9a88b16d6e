#ifndef MORPHFORGE_RNG_HPP
#define MORPHFORGE_RNG_HPP

#include <cmath>
#include <cstdint>
#include <numbers>

namespace morphforge {

/// Deterministic pseudo-random generator (SplitMix64 core).
///
/// std::shuffle / std::uniform_int_distribution are implementation-defined,
/// so every piece of randomness in the toolkit flows through this generator
/// to keep outputs bit-identical across platforms for a given seed.
class Rng {
public:
    explicit Rng(uint64_t seed) : state_(seed) {}

    uint64_t next_u64() {
        uint64_t z = (state_ += 0x9e3779b97f4a7c15ull);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    }

    /// Uniform in [0, n). n must be > 0. Unbiased via rejection.
    uint64_t next_below(uint64_t n) {
        const uint64_t limit = n * (UINT64_MAX / n);
        uint64_t v = next_u64();
        while (v >= limit) v = next_u64();
        return v % n;
    }

    /// Uniform double in [0, 1).
    double next_unit() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    /// Uniform double in [lo, hi).
    double uniform(double lo, double hi) { return lo + (hi - lo) * next_unit(); }

    /// Standard normal via Box-Muller.
    double normal() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u1 = next_unit();
        double u2 = next_unit();
        while (u1 <= 0.0) u1 = next_unit();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double a = 2.0 * std::numbers::pi * u2;
        spare_ = r * std::sin(a);
        have_spare_ = true;
        return r * std::cos(a);
    }

    /// In-place Fisher-Yates shuffle.
    template <typename Container>
    void shuffle(Container& c) {
        for (size_t i = c.size(); i > 1; --i) {
            const size_t j = static_cast<size_t>(next_below(i));
            std::swap(c[i - 1], c[j]);
        }
    }

    /// Derive an independent child stream (for per-stage seeding).
    Rng fork(uint64_t salt) {
        return Rng(next_u64() ^ (salt * 0x9e3779b97f4a7c15ull));
    }

private:
    uint64_t state_;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

} // namespace morphforge

#endif
