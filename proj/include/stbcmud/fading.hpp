#pragma once

#include <cstddef>
#include <vector>

#include "stbcmud/cxmat.hpp"
#include "stbcmud/rng.hpp"

namespace stbcmud {

/// Flat-fading coefficients indexed (user, transmit antenna, receive antenna).
struct ChannelRealization {
    std::size_t users = 0;
    std::size_t tx = 0;
    std::size_t rx = 0;
    std::vector<cx> coeffs;

    cx& at(std::size_t j, std::size_t n, std::size_t m) {
        return coeffs[(j * tx + n) * rx + m];
    }
    const cx& at(std::size_t j, std::size_t n, std::size_t m) const {
        return coeffs[(j * tx + n) * rx + m];
    }

    /// Per-antenna Alamouti blocks (h1m, h2m) for a 2-transmit-antenna user.
    std::vector<AlamoutiBlock> user_blocks(std::size_t j) const;
};

/// Additive-noise convention: per complex received sample the variance is
/// 2/snr (linear snr, unit-energy symbols).  `noiseless` disables noise
/// entirely for structural tests.
struct NoiseModel {
    double snr = 1.0;
    bool noiseless = false;

    double per_sample_variance() const { return 2.0 / snr; }
};

/// Real/imaginary unpacking of one user-pair's coefficients, following a
/// fixed sign and conjugation table (first antenna and later antennas use
/// different sign patterns).
struct RealChannelDecomposition {
    std::vector<double> a;
    std::vector<double> b;
};

/// i.i.d. CN(0,1) coefficients, deterministic given the stream.
ChannelRealization sample_channel(std::size_t users, std::size_t tx, std::size_t rx,
                                  RngStream& rng);

/// Superimposes every user's codeword (T x N each) through the channel and
/// adds noise of variance 2/snr per complex sample.  Returns T x M samples.
ComplexMat transmit(const std::vector<ComplexMat>& codewords, const ChannelRealization& channel,
                    const NoiseModel& noise, RngStream& rng);

/// Unpacks the per-antenna blocks of two users into real coordinates.
/// For the first antenna: h.a = a1 - j a2, h.b = -a3 + j a4,
/// g.a = b1 + j b2, g.b = b3 + j b4.  For antenna m >= 2:
/// h.a = -a(4m-3) - j a(4m-2), h.b = -a(4m-1) - j a(4m),
/// g.a = b(4m-3) + j b(4m-2), g.b = b(4m-1) - j b(4m).
RealChannelDecomposition decompose_real(const std::vector<AlamoutiBlock>& h_blocks,
                                        const std::vector<AlamoutiBlock>& g_blocks);

/// Inverse of decompose_real; exact round trip.
std::pair<std::vector<AlamoutiBlock>, std::vector<AlamoutiBlock>> compose_real(
    const RealChannelDecomposition& d);

}  // namespace stbcmud
