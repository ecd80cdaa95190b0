#include "stbcmud/fading.hpp"

#include <stdexcept>

namespace stbcmud {

std::vector<AlamoutiBlock> ChannelRealization::user_blocks(std::size_t j) const {
    if (tx != 2) throw std::invalid_argument("user_blocks: defined for 2 transmit antennas");
    std::vector<AlamoutiBlock> blocks(rx);
    for (std::size_t m = 0; m < rx; ++m) blocks[m] = AlamoutiBlock{at(j, 0, m), at(j, 1, m)};
    return blocks;
}

ChannelRealization sample_channel(std::size_t users, std::size_t tx, std::size_t rx,
                                  RngStream& rng) {
    if (users < 1 || tx < 1 || rx < 1) {
        throw std::invalid_argument("sample_channel: dimensions must be positive");
    }
    ChannelRealization c;
    c.users = users;
    c.tx = tx;
    c.rx = rx;
    c.coeffs.resize(users * tx * rx);
    for (cx& v : c.coeffs) v = rng.cnormal();
    return c;
}

ComplexMat transmit(const std::vector<ComplexMat>& codewords, const ChannelRealization& channel,
                    const NoiseModel& noise, RngStream& rng) {
    if (codewords.size() != channel.users) {
        throw std::invalid_argument("transmit: codeword count does not match user count");
    }
    const std::size_t t_span = codewords.empty() ? 0 : codewords[0].rows();
    for (const ComplexMat& cw : codewords) {
        if (cw.rows() != t_span || cw.cols() != channel.tx) {
            throw std::invalid_argument("transmit: codeword shape mismatch");
        }
    }
    ComplexMat r(t_span, channel.rx);
    for (std::size_t j = 0; j < channel.users; ++j) {
        for (std::size_t t = 0; t < t_span; ++t) {
            for (std::size_t n = 0; n < channel.tx; ++n) {
                const cx sym = codewords[j](t, n);
                if (sym == cx{0.0, 0.0}) continue;
                for (std::size_t m = 0; m < channel.rx; ++m) {
                    r(t, m) += sym * channel.at(j, n, m);
                }
            }
        }
    }
    if (!noise.noiseless) {
        const double scale = std::sqrt(noise.per_sample_variance());
        for (std::size_t t = 0; t < t_span; ++t)
            for (std::size_t m = 0; m < channel.rx; ++m) r(t, m) += rng.cnormal() * scale;
    }
    return r;
}

RealChannelDecomposition decompose_real(const std::vector<AlamoutiBlock>& h_blocks,
                                        const std::vector<AlamoutiBlock>& g_blocks) {
    if (h_blocks.empty() || h_blocks.size() != g_blocks.size()) {
        throw std::invalid_argument("decompose_real: need equal nonzero antenna counts");
    }
    RealChannelDecomposition d;
    d.a.resize(4 * h_blocks.size());
    d.b.resize(4 * g_blocks.size());
    for (std::size_t m = 0; m < h_blocks.size(); ++m) {
        const AlamoutiBlock& h = h_blocks[m];
        const AlamoutiBlock& g = g_blocks[m];
        if (m == 0) {
            d.a[0] = h.a.real();
            d.a[1] = -h.a.imag();
            d.a[2] = -h.b.real();
            d.a[3] = h.b.imag();
            d.b[0] = g.a.real();
            d.b[1] = g.a.imag();
            d.b[2] = g.b.real();
            d.b[3] = g.b.imag();
        } else {
            d.a[4 * m + 0] = -h.a.real();
            d.a[4 * m + 1] = -h.a.imag();
            d.a[4 * m + 2] = -h.b.real();
            d.a[4 * m + 3] = -h.b.imag();
            d.b[4 * m + 0] = g.a.real();
            d.b[4 * m + 1] = g.a.imag();
            d.b[4 * m + 2] = g.b.real();
            d.b[4 * m + 3] = -g.b.imag();
        }
    }
    return d;
}

std::pair<std::vector<AlamoutiBlock>, std::vector<AlamoutiBlock>> compose_real(
    const RealChannelDecomposition& d) {
    if (d.a.size() != d.b.size() || d.a.size() % 4 != 0 || d.a.empty()) {
        throw std::invalid_argument("compose_real: coordinate lengths must match, multiple of 4");
    }
    const std::size_t antennas = d.a.size() / 4;
    std::vector<AlamoutiBlock> h(antennas), g(antennas);
    for (std::size_t m = 0; m < antennas; ++m) {
        if (m == 0) {
            h[0] = AlamoutiBlock{cx{d.a[0], -d.a[1]}, cx{-d.a[2], d.a[3]}};
            g[0] = AlamoutiBlock{cx{d.b[0], d.b[1]}, cx{d.b[2], d.b[3]}};
        } else {
            h[m] = AlamoutiBlock{cx{-d.a[4 * m + 0], -d.a[4 * m + 1]},
                                 cx{-d.a[4 * m + 2], -d.a[4 * m + 3]}};
            g[m] = AlamoutiBlock{cx{d.b[4 * m + 0], d.b[4 * m + 1]},
                                 cx{d.b[4 * m + 2], -d.b[4 * m + 3]}};
        }
    }
    return {h, g};
}

}  // namespace stbcmud
