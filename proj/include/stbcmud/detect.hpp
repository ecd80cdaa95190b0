#pragma once

#include <array>
#include <cstddef>
#include <string>
#include <vector>

#include "stbcmud/cxmat.hpp"
#include "stbcmud/stcodes.hpp"

namespace stbcmud {

/// Multi-user observation in the per-antenna Alamouti-equivalent form:
/// obs[m] = sum_j chan[j][m] * c_j + noise, where chan[j][m] is user j's
/// block at receive antenna m.
struct AlamoutiSystem {
    std::vector<std::array<cx, 2>> obs;
    std::vector<std::vector<AlamoutiBlock>> chan;
};

/// Single-user system left after interference cancellation.  Channel,
/// observations and noise covariance are kept in block form; the matrix
/// accessors materialize the ComplexMat views.
struct EquivalentSystem {
    std::vector<std::array<cx, 2>> obs;
    std::vector<AlamoutiBlock> chan;
    std::vector<std::vector<AlamoutiBlock>> noise_blocks;
    std::string meta;

    ComplexMat observations() const;
    ComplexMat channel_matrix() const;
    ComplexMat noise_cov() const;
};

/// Decoded symbol indices (into the constellation) plus the achieved metric.
struct Decision {
    std::vector<std::size_t> indices;
    double metric = 0.0;
};

/// Exhaustive joint maximum-likelihood search over all users' symbol pairs.
/// Throws std::invalid_argument when |constellation|^(2 users) exceeds cap.
/// Ties break toward the lowest lexicographic index tuple.  The returned
/// indices are user-major: (user0 c1, user0 c2, user1 c1, ...).
Decision ml_joint_detect(const AlamoutiSystem& sys, const Constellation& q,
                         std::size_t cap = 1 << 20);

/// One-round two-user cancellation with two receive antennas.  Returns the
/// system carrying only the first user's symbols and the system carrying
/// only the second user's.  Uses the normalized inverses K^-1 = K^H/|K|^2.
std::pair<EquivalentSystem, EquivalentSystem> ap_cancel_pair(
    const std::array<cx, 2>& r1, const std::array<cx, 2>& r2, const AlamoutiBlock& h1,
    const AlamoutiBlock& h2, const AlamoutiBlock& g1, const AlamoutiBlock& g2, double sigma_sq);

/// Recursive cancellation of all interferers of target_user, one user per
/// round (last listed user first).  Requires rx antennas >= users; leaves a
/// single-user system over rx - users + 1 block observations with the noise
/// covariance tracked through the applied linear maps.
EquivalentSystem ap_cancel_general(const AlamoutiSystem& sys, std::size_t target_user,
                                   double sigma_sq);

/// Closed-form covariance of the post-cancellation noise when antenna 1 is
/// the pivot: diagonal blocks (s2/|g_{i+1}|^2 + s2/|g_1|^2) I2, off-diagonal
/// blocks s2/|g_1|^2 I2.
ComplexMat noise_correlation(const std::vector<AlamoutiBlock>& g, double sigma_sq);

/// Inverse of a Hermitian positive definite matrix given as Alamouti blocks.
/// Throws std::domain_error when a pivot is not positive.
std::vector<std::vector<AlamoutiBlock>> block_inverse_hermitian(
    const std::vector<std::vector<AlamoutiBlock>>& c);

/// Joint two-symbol minimization of (r - Hc)^H C^-1 (r - Hc) by full
/// enumeration.  For these systems it provably coincides with
/// whitened_ml_decode_separate; the pair of entry points exists so tests can
/// assert that equality.
Decision whitened_ml_decode(const EquivalentSystem& sys, const Constellation& q);

/// Per-symbol minimization using the whitened matched-filter statistics
/// gamma = H^H C^-1 H (a real scalar times I2) and w = H^H C^-1 r.
Decision whitened_ml_decode_separate(const EquivalentSystem& sys, const Constellation& q);

/// Full quasi-orthogonal pipeline: per-antenna sum/difference split,
/// branch-wise cancellation, whitened combining, and pairwise (c1,c3) /
/// (c2,c4) searches.  received[m] holds antenna m's 4 time slots;
/// chan[j][m] holds user j's 4 coefficients toward antenna m.  Returned
/// indices are the target user's 4 symbol indices (rotation handled
/// internally for the last two).
Decision qostbc_ap_detect(const std::vector<std::array<cx, 4>>& received,
                          const std::vector<std::vector<std::array<cx, 4>>>& chan,
                          std::size_t target_user, const Constellation& q, double sigma_sq);

}  // namespace stbcmud
