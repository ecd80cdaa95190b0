#pragma once

#include <cmath>
#include <complex>
#include <cstdint>

namespace stbcmud {

/// Counter-based splittable stream.  A stream is keyed by up to three indices
/// on top of the master seed, so per-trial streams are independent of both
/// execution order and thread assignment.
class RngStream {
public:
    explicit RngStream(std::uint64_t seed, std::uint64_t k1 = 0, std::uint64_t k2 = 0,
                       std::uint64_t k3 = 0) {
        state_ = mix(seed ^ 0x6a09e667f3bcc908ULL);
        state_ = mix(state_ ^ mix(k1 ^ 0xbb67ae8584caa73bULL));
        state_ = mix(state_ ^ mix(k2 ^ 0x3c6ef372fe94f82bULL));
        state_ = mix(state_ ^ mix(k3 ^ 0xa54ff53a5f1d36f1ULL));
    }

    std::uint64_t next_u64() {
        state_ += 0x9e3779b97f4a7c15ULL;
        return mix(state_);
    }

    /// Uniform on (0, 1).
    double uniform() {
        const std::uint64_t bits = next_u64() >> 11;
        return (static_cast<double>(bits) + 0.5) * 0x1.0p-53;
    }

    /// Standard normal, Box-Muller with one cached deviate.
    double gaussian() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        const double u1 = uniform();
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double t = 6.283185307179586476925286766559 * u2;
        spare_ = r * std::sin(t);
        have_spare_ = true;
        return r * std::cos(t);
    }

    /// Circularly symmetric complex normal with unit variance (CN(0,1)).
    std::complex<double> cnormal() {
        const double g1 = gaussian();
        const double g2 = gaussian();
        return {g1 * 0.70710678118654752440, g2 * 0.70710678118654752440};
    }

private:
    static std::uint64_t mix(std::uint64_t z) {
        z ^= z >> 30;
        z *= 0xbf58476d1ce4e5b9ULL;
        z ^= z >> 27;
        z *= 0x94d049bb133111ebULL;
        z ^= z >> 31;
        return z;
    }

    std::uint64_t state_ = 0;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

}  // namespace stbcmud
