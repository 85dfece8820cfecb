#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

namespace teleop {

// Seeded generator with fixed sampling algorithms so that traces are
// bit-identical for a given seed regardless of the standard library's
// distribution implementations.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next_u64() { return engine_(); }

    // Uniform in [0, 1) with 53-bit resolution.
    double uniform() {
        return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // Uniform integer in [0, n).
    std::size_t uniform_index(std::size_t n) {
        return static_cast<std::size_t>(uniform() * static_cast<double>(n)) % n;
    }

    // Marsaglia polar method; one cached value.
    double gaussian() {
        if (has_cache_) {
            has_cache_ = false;
            return cache_;
        }
        double u, v, s;
        do {
            u = 2.0 * uniform() - 1.0;
            v = 2.0 * uniform() - 1.0;
            s = u * u + v * v;
        } while (s >= 1.0 || s == 0.0);
        const double m = std::sqrt(-2.0 * std::log(s) / s);
        cache_ = v * m;
        has_cache_ = true;
        return u * m;
    }

    double gaussian(double mean, double stddev) { return mean + stddev * gaussian(); }

    template <typename T>
    void shuffle(std::vector<T>& items) {
        for (std::size_t i = items.size(); i > 1; --i) {
            std::swap(items[i - 1], items[uniform_index(i)]);
        }
    }

    // Derive an independent stream (e.g., per scenario or per fold).
    std::uint64_t derive(std::uint64_t salt) {
        std::uint64_t x = engine_() ^ (salt * 0x9e3779b97f4a7c15ull);
        x ^= x >> 30;
        x *= 0xbf58476d1ce4e5b9ull;
        x ^= x >> 27;
        return x;
    }

private:
    std::mt19937_64 engine_;
    double cache_ = 0.0;
    bool has_cache_ = false;
};

}  // namespace teleop
