#pragma once

// Counter-based random streams.
//
// Every stream is keyed by (seed, stream, slot); the key is
//   mix(seed ^ mix(stream ^ mix(slot)))
// with mix the splitmix64 finalizer, and draws advance a splitmix64 counter
// from that key. Trainers use stream = iteration and slot = sample index, so
// any draw can be reproduced without replaying earlier ones.

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numbers>

namespace lincore {

inline std::uint64_t mix64(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

inline std::uint64_t stream_key(std::uint64_t seed, std::uint64_t stream, std::uint64_t slot) {
    return mix64(seed ^ mix64(stream ^ mix64(slot)));
}

class Rng {
public:
    explicit Rng(std::uint64_t seed, std::uint64_t stream = 0, std::uint64_t slot = 0)
        : state_(stream_key(seed, stream, slot)) {}

    std::uint64_t next() {
        state_ += 0x9e3779b97f4a7c15ULL;
        return mix64(state_);
    }

    /// Uniform on [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    /// Uniform integer in [0, n), n >= 1 (rejection, no modulo bias).
    std::size_t below(std::size_t n) {
        const std::uint64_t bound = static_cast<std::uint64_t>(n);
        const std::uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
        std::uint64_t r;
        do {
            r = next();
        } while (r >= limit);
        return static_cast<std::size_t>(r % bound);
    }

    bool bernoulli(double p) { return uniform() < p; }

    /// Standard normal via Box-Muller; the second variate is cached.
    double normal() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        double u1;
        do {
            u1 = uniform();
        } while (u1 <= 0.0);
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        spare_ = r * std::sin(2.0 * std::numbers::pi * u2);
        has_spare_ = true;
        return r * std::cos(2.0 * std::numbers::pi * u2);
    }

private:
    std::uint64_t state_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

}  // namespace lincore
