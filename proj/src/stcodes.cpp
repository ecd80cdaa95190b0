#include "stbcmud/stcodes.hpp"

#include <cmath>
#include <stdexcept>

namespace stbcmud {

cx Constellation::rotated_point(std::size_t idx) const {
    return points.at(idx) * std::polar(1.0, rotation);
}

Constellation Constellation::by_name(const std::string& name, double rotation) {
    Constellation q;
    q.name = name;
    q.rotation = rotation;
    const double s = 1.0 / std::sqrt(2.0);
    if (name == "qpsk") {
        q.points = {cx{s, s}, cx{-s, s}, cx{-s, -s}, cx{s, -s}};
    } else if (name == "qam16") {
        const double g = 1.0 / std::sqrt(10.0);
        for (int re : {-3, -1, 1, 3})
            for (int im : {-3, -1, 1, 3}) q.points.push_back(cx{re * g, im * g});
    } else {
        throw std::invalid_argument("unknown constellation: " + name);
    }
    return q;
}

SymbolVector make_symbol_vector(const Constellation& q, const std::vector<std::size_t>& indices,
                                std::size_t user_id) {
    SymbolVector v;
    v.indices = indices;
    v.user_id = user_id;
    v.symbols.reserve(indices.size());
    for (std::size_t idx : indices) v.symbols.push_back(q.point(idx));
    return v;
}

SumDifferencePair sum_difference(const ComplexMat& v4) {
    if (v4.rows() != 4 || v4.cols() != 1) {
        throw std::invalid_argument("sum_difference: expected 4x1 vector");
    }
    SumDifferencePair p{ComplexMat(2, 1), ComplexMat(2, 1)};
    p.plus(0, 0) = v4(0, 0) + v4(2, 0);
    p.plus(1, 0) = v4(1, 0) + v4(3, 0);
    p.minus(0, 0) = v4(0, 0) - v4(2, 0);
    p.minus(1, 0) = v4(1, 0) - v4(3, 0);
    return p;
}

ComplexMat reconstruct(const SumDifferencePair& p) {
    ComplexMat v(4, 1);
    v(0, 0) = (p.plus(0, 0) + p.minus(0, 0)) * 0.5;
    v(1, 0) = (p.plus(1, 0) + p.minus(1, 0)) * 0.5;
    v(2, 0) = (p.plus(0, 0) - p.minus(0, 0)) * 0.5;
    v(3, 0) = (p.plus(1, 0) - p.minus(1, 0)) * 0.5;
    return v;
}

ComplexMat alamouti_encode(const SymbolVector& c) {
    if (c.symbols.size() != 2) throw std::invalid_argument("alamouti_encode: need 2 symbols");
    ComplexMat m(2, 2);
    m(0, 0) = c.symbols[0];
    m(0, 1) = c.symbols[1];
    m(1, 0) = -std::conj(c.symbols[1]);
    m(1, 1) = std::conj(c.symbols[0]);
    return m;
}

ComplexMat qostbc_encode(const SymbolVector& c, double rotation) {
    if (c.symbols.size() != 4) throw std::invalid_argument("qostbc_encode: need 4 symbols");
    const cx rot = std::polar(1.0, rotation);
    SymbolVector ab{{}, {c.symbols[0], c.symbols[1]}, c.user_id};
    SymbolVector bb{{}, {c.symbols[2] * rot, c.symbols[3] * rot}, c.user_id};
    return abba_construct(alamouti_encode(ab), alamouti_encode(bb));
}

ComplexMat abba_construct(const ComplexMat& sub_a, const ComplexMat& sub_b) {
    if (sub_a.rows() != sub_a.cols() || sub_b.rows() != sub_b.cols() ||
        sub_a.rows() != sub_b.rows()) {
        throw std::invalid_argument("abba_construct: blocks must be square and equal-sized");
    }
    const std::size_t n = sub_a.rows();
    ComplexMat m(2 * n, 2 * n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            m(i, j) = sub_a(i, j);
            m(i, j + n) = sub_b(i, j);
            m(i + n, j) = sub_b(i, j);
            m(i + n, j + n) = sub_a(i, j);
        }
    }
    return m;
}

ComplexMat equivalent_channel(const std::vector<std::array<cx, 2>>& h) {
    if (h.empty()) throw std::invalid_argument("equivalent_channel: need at least one antenna");
    ComplexMat m(2 * h.size(), 2);
    for (std::size_t i = 0; i < h.size(); ++i) {
        m(2 * i, 0) = h[i][0];
        m(2 * i, 1) = h[i][1];
        m(2 * i + 1, 0) = -std::conj(h[i][1]);
        m(2 * i + 1, 1) = std::conj(h[i][0]);
    }
    return m;
}

std::pair<QostbcBranch, QostbcBranch> qostbc_split(const std::array<cx, 4>& r,
                                                   const std::array<cx, 4>& h) {
    QostbcBranch plus;
    plus.obs = {r[0] + r[2], -std::conj(r[1]) - std::conj(r[3])};
    plus.chan = AlamoutiBlock{h[0] + h[2], h[1] + h[3]};
    QostbcBranch minus;
    minus.obs = {r[0] - r[2], -std::conj(r[1]) + std::conj(r[3])};
    minus.chan = AlamoutiBlock{h[0] - h[2], h[1] - h[3]};
    return {plus, minus};
}

ComplexMat qostbc_merge(const AlamoutiBlock& plus_channel, const AlamoutiBlock& minus_channel) {
    ComplexMat k(4, 1);
    k(0, 0) = (plus_channel.a + minus_channel.a) * 0.5;
    k(1, 0) = (plus_channel.b + minus_channel.b) * 0.5;
    k(2, 0) = (plus_channel.a - minus_channel.a) * 0.5;
    k(3, 0) = (plus_channel.b - minus_channel.b) * 0.5;
    return k;
}

}  // namespace stbcmud
