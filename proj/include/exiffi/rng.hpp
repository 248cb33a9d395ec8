#pragma once

#include <bit>
#include <cmath>
#include <cstdint>
#include <random>

namespace exiffi {

// splitmix64 finisher; bijective 64-bit mixer.
inline std::uint64_t mix64(std::uint64_t z) {
    z += 0x9E3779B97F4A7C15ULL;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

// Seed for a named sub-stream (tree index, refit index, ...) of a root seed.
// Streams are independent of thread scheduling, so any piece of work seeded
// this way can run on any thread without changing results.
inline std::uint64_t derive_seed(std::uint64_t root, std::uint64_t stream) {
    return mix64(root ^ mix64(stream));
}

// mt19937_64 with the sampling transforms implemented here rather than via
// std distributions, whose output is not pinned down by the standard.  All
// randomized results in this project are therefore reproducible from seeds
// alone, independent of the standard library in use.
class SplitRng {
  public:
    explicit SplitRng(std::uint64_t seed) : eng_(seed) {}

    std::uint64_t next() { return eng_(); }

    // Uniform in [0, 1) with 53 random bits.
    double uniform01() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    // Uniform in [lo, hi); requires lo < hi.
    double uniform(double lo, double hi) {
        double v = lo + uniform01() * (hi - lo);
        if (v >= hi) v = std::nextafter(hi, lo);
        if (v < lo) v = lo;
        return v;
    }

    // Standard normal, Marsaglia polar method with a cached spare.
    double normal() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        double u, v, s;
        do {
            u = 2.0 * uniform01() - 1.0;
            v = 2.0 * uniform01() - 1.0;
            s = u * u + v * v;
        } while (s >= 1.0 || s == 0.0);
        double m = std::sqrt(-2.0 * std::log(s) / s);
        spare_ = v * m;
        has_spare_ = true;
        return u * m;
    }

    // Uniform integer in [0, n); bitmask rejection, no modulo bias.
    std::size_t index(std::size_t n) {
        if (n <= 1) return 0;
        const int bits = std::bit_width(n - 1);
        const std::uint64_t mask = (bits >= 64) ? ~0ULL : ((1ULL << bits) - 1);
        std::uint64_t v;
        do {
            v = next() & mask;
        } while (v >= n);
        return static_cast<std::size_t>(v);
    }

  private:
    std::mt19937_64 eng_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

}  // namespace exiffi
