// SPDX-License-Identifier: MIT

#ifndef IMCAP_RNG_HPP
#define IMCAP_RNG_HPP

#include <array>
#include <cmath>
#include <complex>
#include <cstdint>
#include <stdexcept>

namespace imcap {

inline std::uint64_t splitmix64(std::uint64_t &state) {
    state += 0x9E3779B97F4A7C15ull;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

// Derives an independent stream seed from (seed, tag, index). Used to give
// every draw / sample block its own substream so results do not depend on
// how work is split across workers.
inline std::uint64_t derive_stream(std::uint64_t seed, std::uint64_t tag, std::uint64_t index) {
    std::uint64_t s = seed;
    (void)splitmix64(s);
    s ^= 0xD1B54A32D192ED03ull * (tag + 1);
    (void)splitmix64(s);
    s ^= 0x8CB92BA72F3D8DD7ull * (index + 1);
    return splitmix64(s);
}

// Deterministic xoshiro256++ generator with hand-rolled samplers.
// The standard library distributions are implementation-defined, which would
// break byte-reproducibility of anything stochastic, so everything random in
// this library flows through this class.
class Rng {
  public:
    explicit Rng(std::uint64_t seed) {
        std::uint64_t s = seed;
        for (auto &w : st_) w = splitmix64(s);
        if (!(st_[0] | st_[1] | st_[2] | st_[3])) st_[0] = 1;
    }
    Rng(std::uint64_t seed, std::uint64_t tag, std::uint64_t index) : Rng(derive_stream(seed, tag, index)) {}

    std::uint64_t next_u64() {
        auto rotl = [](std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); };
        const std::uint64_t result = rotl(st_[0] + st_[3], 23) + st_[0];
        const std::uint64_t t = st_[1] << 17;
        st_[2] ^= st_[0];
        st_[3] ^= st_[1];
        st_[1] ^= st_[2];
        st_[0] ^= st_[3];
        st_[2] ^= t;
        st_[3] = rotl(st_[3], 45);
        return result;
    }

    // [0, 1)
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }
    // (0, 1]
    double uniform_pos() { return (static_cast<double>(next_u64() >> 11) + 1.0) * 0x1.0p-53; }

    // uniform integer in [0, n)
    std::int64_t uniform_index(std::int64_t n) {
        if (n <= 0) throw std::domain_error("Rng::uniform_index: n must be positive");
        std::int64_t k = static_cast<std::int64_t>(uniform() * static_cast<double>(n));
        return k < n ? k : n - 1;
    }

    // standard normal, Box-Muller (second value cached)
    double normal() {
        if (has_cached_) {
            has_cached_ = false;
            return cached_;
        }
        const double u1 = uniform_pos();
        const double u2 = uniform();
        const double rad = std::sqrt(-2.0 * std::log(u1));
        const double ang = 6.283185307179586476925286766559 * u2;
        cached_ = rad * std::sin(ang);
        has_cached_ = true;
        return rad * std::cos(ang);
    }

    double exponential(double scale) { return -scale * std::log(uniform_pos()); }

    // Gamma(shape, scale), Marsaglia-Tsang
    double gamma(double shape, double scale) {
        if (!(shape > 0.0) || !(scale > 0.0)) throw std::domain_error("Rng::gamma: shape and scale must be positive");
        if (shape < 1.0) {
            const double u = uniform_pos();
            return gamma(shape + 1.0, scale) * std::pow(u, 1.0 / shape);
        }
        const double d = shape - 1.0 / 3.0;
        const double c = 1.0 / std::sqrt(9.0 * d);
        for (;;) {
            double x, v;
            do {
                x = normal();
                v = 1.0 + c * x;
            } while (v <= 0.0);
            v = v * v * v;
            const double u = uniform_pos();
            if (u < 1.0 - 0.0331 * x * x * x * x) return d * v * scale;
            if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v * scale;
        }
    }

    // complex Gaussian with independent N(mean, comp_sd^2) real and imaginary parts
    std::complex<double> cnormal(double comp_sd, double mean = 0.0) {
        const double re = mean + comp_sd * normal();
        const double im = mean + comp_sd * normal();
        return {re, im};
    }

  private:
    std::array<std::uint64_t, 4> st_{};
    double cached_ = 0.0;
    bool has_cached_ = false;
};

// Stream tags: keep sampling domains disjoint.
namespace stream_tag {
inline constexpr std::uint64_t channel = 1;  // channel realizations, keyed by draw index
inline constexpr std::uint64_t mi_mc = 2;    // index mutual information sampling, keyed by block
inline constexpr std::uint64_t generic = 3;  // anything else
} // namespace stream_tag

} // namespace imcap

#endif
