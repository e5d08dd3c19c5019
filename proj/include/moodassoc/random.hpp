#pragma once

// Deterministic randomness. All stochastic behavior in the artifact (splits,
// weight init, simulation) flows from one top-level seed through named
// substreams, so components reproduce independently of each other.

#include <cmath>
#include <cstdint>
#include <string_view>
#include <vector>

#include "moodassoc/errors.hpp"

namespace moodassoc {

inline uint64_t splitmix64(uint64_t& state) {
    uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// FNV-1a mixed with the seed, finalized through one splitmix round. Stable
// across platforms and runs; the train/test split depends on it.
inline uint64_t stable_hash64(std::string_view bytes, uint64_t seed = 0) {
    uint64_t h = 1469598103934665603ULL ^ seed;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    uint64_t s = h;
    return splitmix64(s);
}

inline double unit_interval(uint64_t h) {
    return static_cast<double>(h >> 11) * 0x1.0p-53;  // [0,1)
}

class Rng {
public:
    explicit Rng(uint64_t seed) : state_(seed) {}

    // Named substream: e.g. Rng(seed, "playlist", i) gives playlist i its own
    // counter-based stream, so generation parallelizes reproducibly.
    Rng(uint64_t seed, std::string_view stream, uint64_t index = 0) {
        state_ = stable_hash64(stream, seed) + 0x9e3779b97f4a7c15ULL * (index + 1);
    }

    uint64_t next() { return splitmix64(state_); }

    double uniform() { return unit_interval(next()); }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    uint64_t uniform_int(uint64_t n) {
        if (n == 0) throw InternalError("uniform_int(0)");
        uint64_t bound = UINT64_MAX - UINT64_MAX % n;
        uint64_t h;
        do {
            h = next();
        } while (h >= bound);
        return h % n;
    }

    bool bernoulli(double p) { return uniform() < p; }

    double normal() {
        double u1 = 1.0 - uniform();  // (0,1]
        double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
    }

    // Marsaglia-Tsang; shape < 1 handled by the boost trick.
    double gamma(double shape) {
        if (shape <= 0.0) throw InternalError("gamma shape must be positive");
        if (shape < 1.0) {
            double u = uniform();
            while (u == 0.0) u = uniform();
            return gamma(shape + 1.0) * std::pow(u, 1.0 / shape);
        }
        double d = shape - 1.0 / 3.0;
        double c = 1.0 / std::sqrt(9.0 * d);
        for (;;) {
            double x = normal();
            double t = 1.0 + c * x;
            if (t <= 0.0) continue;
            double v = t * t * t;
            double u = uniform();
            if (u < 1.0 - 0.0331 * x * x * x * x) return d * v;
            if (u > 0.0 && std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v;
        }
    }

    uint64_t binomial(uint64_t n, double p) {
        uint64_t k = 0;
        for (uint64_t i = 0; i < n; ++i) {
            if (bernoulli(p)) ++k;
        }
        return k;
    }

private:
    uint64_t state_;
};

}  // namespace moodassoc
