#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

namespace pro_ood {

// Deterministic PRNG with explicitly implemented algorithms. std::shuffle and
// std::normal_distribution are implementation-defined, so everything that has
// to be reproducible byte-for-byte across platforms goes through this.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    // Derive an independent stream keyed on (seed, stream ids). Used to key
    // batch shuffles on (seed, epoch) and dataset generators on (seed, class).
    static Rng keyed(std::uint64_t seed, std::uint64_t k1, std::uint64_t k2 = 0) {
        Rng r(seed);
        r.state_ = r.next_u64() ^ (0x9e3779b97f4a7c15ULL * (k1 + 1));
        r.state_ = r.next_u64() ^ (0xbf58476d1ce4e5b9ULL * (k2 + 1));
        return r;
    }

    // splitmix64
    std::uint64_t next_u64() {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    // Uniform in [0, 1) with 53-bit resolution.
    double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

    // Uniform integer in [0, n).
    std::uint64_t below(std::uint64_t n) { return next_u64() % n; }

    // Standard normal via Box-Muller; caches the second variate.
    double normal() {
        if (has_cached_) {
            has_cached_ = false;
            return cached_;
        }
        double u1 = uniform01();
        double u2 = uniform01();
        while (u1 <= 0.0) u1 = uniform01();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double theta = 2.0 * M_PI * u2;
        cached_ = r * std::sin(theta);
        has_cached_ = true;
        return r * std::cos(theta);
    }

    // Fisher-Yates.
    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) {
            std::size_t j = static_cast<std::size_t>(below(i));
            std::swap(v[i - 1], v[j]);
        }
    }

private:
    std::uint64_t state_;
    double cached_ = 0.0;
    bool has_cached_ = false;
};

}  // namespace pro_ood
