#pragma once

#include <array>
#include <cstddef>
#include <string>
#include <vector>

#include "stbcmud/cxmat.hpp"

namespace stbcmud {

/// Unit-average-energy signal set.  `rotation` is the angle applied to the
/// third and fourth symbols of a quasi-orthogonal codeword.
struct Constellation {
    std::string name;
    std::vector<cx> points;
    double rotation = 0.0;

    std::size_t size() const { return points.size(); }
    cx point(std::size_t idx) const { return points.at(idx); }
    cx rotated_point(std::size_t idx) const;

    static Constellation by_name(const std::string& name, double rotation);
};

/// Symbols carried together with their generating indices so decoder outputs
/// can be compared exactly.
struct SymbolVector {
    std::vector<std::size_t> indices;
    std::vector<cx> symbols;
    std::size_t user_id = 0;
};

SymbolVector make_symbol_vector(const Constellation& q, const std::vector<std::size_t>& indices,
                                std::size_t user_id);

/// Sum and difference halves of a length-4 vector: plus = (v1+v3, v2+v4),
/// minus = (v1-v3, v2-v4).
struct SumDifferencePair {
    ComplexMat plus;   // 2x1
    ComplexMat minus;  // 2x1
};

SumDifferencePair sum_difference(const ComplexMat& v4);
ComplexMat reconstruct(const SumDifferencePair& p);

/// [[c1, c2], [-c2*, c1*]] from a 2-symbol vector.
ComplexMat alamouti_encode(const SymbolVector& c);

/// 4x4 quasi-orthogonal codeword [[A, B], [B, A]] with A built from (c1, c2)
/// and B from the rotated (c3, c4).
ComplexMat qostbc_encode(const SymbolVector& c, double rotation);

/// Block matrix [[A, B], [B, A]].
ComplexMat abba_construct(const ComplexMat& sub_a, const ComplexMat& sub_b);

/// Stacked per-antenna Alamouti channel blocks: 2M x 2 matrix whose i-th
/// block is [[h1i, h2i], [-h2i*, h1i*]].  The matching receive-side vector is
/// (r1i, -r2i*) per antenna.
ComplexMat equivalent_channel(const std::vector<std::array<cx, 2>>& h);

/// One branch of the sum/difference conversion of a 4-antenna system: a
/// 2-dimensional observation with an Alamouti channel.
struct QostbcBranch {
    std::array<cx, 2> obs;
    AlamoutiBlock chan;
};

/// Converts one antenna's 4 received slots plus its 4 channel coefficients
/// into the plus branch (carrying c1+c3, c2+c4) and the minus branch
/// (carrying c1-c3, c2-c4).
std::pair<QostbcBranch, QostbcBranch> qostbc_split(const std::array<cx, 4>& r,
                                                   const std::array<cx, 4>& h);

/// Reverse conversion: 4-coefficient single-user channel vector
/// ((a1+a1')/2, (a2+a2')/2, (a1-a1')/2, (a2-a2')/2) from the plus and minus
/// branch channels.
ComplexMat qostbc_merge(const AlamoutiBlock& plus_channel, const AlamoutiBlock& minus_channel);

}  // namespace stbcmud
