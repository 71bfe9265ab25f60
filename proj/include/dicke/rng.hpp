// Counter-based splittable random streams. Every trajectory derives its own
// generator from (base_seed, stream_index), so results do not depend on how
// work is scheduled across threads.

#pragma once

#include <cmath>
#include <complex>
#include <cstdint>

namespace dicke {

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

// Deterministic stream seed for worker/trajectory `index` under `base_seed`.
inline std::uint64_t derive_stream_seed(std::uint64_t base_seed, std::uint64_t index) {
    return splitmix64(splitmix64(base_seed ^ 0x6A09E667F3BCC909ull) + index);
}

// xoshiro256** with a fixed, portable Gaussian transform (Box-Muller).
// std::normal_distribution is implementation-defined, which would break
// byte-identical reproducibility across toolchains.
class Rng {
public:
    explicit Rng(std::uint64_t seed) {
        std::uint64_t s = seed;
        for (auto& w : state_) {
            s = splitmix64(s);
            w = s;
        }
        have_spare_ = false;
    }

    Rng(std::uint64_t base_seed, std::uint64_t stream_index)
        : Rng(derive_stream_seed(base_seed, stream_index)) {}

    std::uint64_t next_u64() {
        const std::uint64_t result = rotl(state_[1] * 5, 7) * 9;
        const std::uint64_t t = state_[1] << 17;
        state_[2] ^= state_[0];
        state_[3] ^= state_[1];
        state_[1] ^= state_[2];
        state_[0] ^= state_[3];
        state_[2] ^= t;
        state_[3] = rotl(state_[3], 45);
        return result;
    }

    // Uniform in (0, 1]; never returns 0, so log() below is safe.
    double next_uniform() {
        return (static_cast<double>(next_u64() >> 11) + 1.0) * 0x1.0p-53;
    }

    double next_gaussian() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        const double u1 = next_uniform();
        const double u2 = next_uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double phi = 2.0 * M_PI * u2;
        spare_ = r * std::sin(phi);
        have_spare_ = true;
        return r * std::cos(phi);
    }

    // Circularly symmetric complex Gaussian with E[|z|^2] = variance.
    std::complex<double> next_complex_gaussian(double variance) {
        const double s = std::sqrt(0.5 * variance);
        const double re = next_gaussian();
        const double im = next_gaussian();
        return {s * re, s * im};
    }

private:
    static std::uint64_t rotl(std::uint64_t x, int k) {
        return (x << k) | (x >> (64 - k));
    }

    std::uint64_t state_[4];
    double spare_ = 0.0;
    bool have_spare_;
};

}  // namespace dicke
