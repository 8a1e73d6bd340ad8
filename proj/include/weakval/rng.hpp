#pragma once

#include <complex>
#include <cstdint>
#include <random>

namespace weakval {

/// Deterministic random stream: mt19937_64 with explicit uniform and
/// Box-Muller normal mappings, so a given seed reproduces the same sequence
/// on every build of this library (the std distributions are
/// implementation-defined and are deliberately not used).
///
/// Parallel work is partitioned into chunks; chunk k of a job seeded with s
/// draws from substream(s, k). Results merged in chunk order are therefore
/// independent of the thread count.
class RngStream {
  public:
    explicit RngStream(std::uint64_t seed) : gen_(seed) {}

    /// Stream for an independent sub-task (SplitMix64 finalizer on
    /// seed + golden-ratio stride).
    static RngStream substream(std::uint64_t seed, std::uint64_t index) {
        return RngStream(mix64(seed + 0x9E3779B97F4A7C15ull * (index + 1)));
    }

    std::uint64_t raw() { return gen_(); }

    /// Uniform on [0, 1) with 53-bit resolution.
    double uniform() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

    /// Standard normal via Box-Muller (second value cached).
    double normal() {
        if (have_cached_) {
            have_cached_ = false;
            return cached_;
        }
        constexpr double two_pi = 6.283185307179586476925286766559;
        double u1 = 1.0 - uniform();  // (0, 1]
        double u2 = uniform();
        double r = std::sqrt(-2.0 * std::log(u1));
        cached_ = r * std::sin(two_pi * u2);
        have_cached_ = true;
        return r * std::cos(two_pi * u2);
    }

    /// Complex with independent N(0,1) real and imaginary parts.
    std::complex<double> cnormal() {
        double re = normal();
        double im = normal();
        return {re, im};
    }

    static std::uint64_t mix64(std::uint64_t z) {
        z += 0x9E3779B97F4A7C15ull;
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
        return z ^ (z >> 31);
    }

  private:
    std::mt19937_64 gen_;
    double cached_ = 0.0;
    bool have_cached_ = false;
};

}  // namespace weakval
