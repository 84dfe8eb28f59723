#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string_view>
#include <vector>

namespace prft {

// splitmix64 finalizer, used for seed derivation. Output sequence is fixed
// by construction, so derived streams are stable across platforms.
inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

inline std::uint64_t fnv1a64(std::string_view s) {
    std::uint64_t h = 0xCBF29CE484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001B3ULL;
    }
    return h;
}

// Derive an independent stream seed from a master seed and a label. Labels
// keep the call sites honest about which stream they are consuming.
inline std::uint64_t derive_seed(std::uint64_t seed, std::string_view tag) {
    return splitmix64(seed ^ fnv1a64(tag));
}

inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index) {
    return splitmix64(seed ^ (0x9E3779B97F4A7C15ULL * (index + 1)));
}

// Deterministic RNG. The engine is std::mt19937_64, whose raw output is
// pinned by the standard; the distributions are hand-rolled on top because
// the standard library distribution objects are not bitwise portable.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next_u64() { return engine_(); }

    // Uniform in [0, 1) with 53 bits of mantissa.
    double uniform01() {
        return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) {
        if (!(lo <= hi)) throw std::invalid_argument("Rng::uniform: lo > hi");
        return lo + (hi - lo) * uniform01();
    }

    // Unbiased integer in [0, n).
    std::uint64_t uniform_int(std::uint64_t n) {
        if (n == 0) throw std::invalid_argument("Rng::uniform_int: n == 0");
        const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
        std::uint64_t x;
        do {
            x = engine_();
        } while (x >= limit);
        return x % n;
    }

    // Box-Muller, consuming exactly two uniforms per call. No cached spare:
    // draw count stays a pure function of call count.
    double normal(double mean = 0.0, double stddev = 1.0) {
        double u1 = uniform01();
        double u2 = uniform01();
        if (u1 <= 0.0) u1 = 0x1.0p-53;
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double theta = 2.0 * 3.14159265358979323846 * u2;
        return mean + stddev * r * std::cos(theta);
    }

    template <typename T>
    void shuffle(std::vector<T>& v) {
        if (v.size() < 2) return;
        for (std::size_t i = v.size() - 1; i > 0; --i) {
            const std::size_t j = static_cast<std::size_t>(uniform_int(i + 1));
            std::swap(v[i], v[j]);
        }
    }

    // k distinct values from [0, n), order randomized (partial Fisher-Yates).
    std::vector<std::size_t> sample_without_replacement(std::size_t n, std::size_t k) {
        if (k > n) throw std::invalid_argument("Rng::sample_without_replacement: k > n");
        std::vector<std::size_t> pool(n);
        for (std::size_t i = 0; i < n; ++i) pool[i] = i;
        for (std::size_t i = 0; i < k; ++i) {
            const std::size_t j = i + static_cast<std::size_t>(uniform_int(n - i));
            std::swap(pool[i], pool[j]);
        }
        pool.resize(k);
        return pool;
    }

private:
    std::mt19937_64 engine_;
};

} // namespace prft
