#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "stbcmud/cxmat.hpp"
#include "stbcmud/fading.hpp"
#include "stbcmud/rng.hpp"

namespace stbcmud {

/// All channel norms here are per-block squared norms |a|^2 + |b|^2 summed
/// over antennas, i.e. half the Frobenius norm of the stacked 2Mx2 matrix.
/// This is the convention under which the cancellation SNR identity and the
/// Gamma(2,1) law hold exactly.

struct EffectiveSnrBreakdown {
    double snr_ap = 0.0;
    double h_norm_sq = 0.0;
    double g_norm_sq = 0.0;
    double lambda_norm_sq = 0.0;  // |H^H G|^2 / (|H|^2 |G|^2), in [0, 1]
    double sigma_sq = 0.0;
    double numerator_form = 0.0;  // (|H|^2 |G|^2 - |H^H G|^2) / (sigma^2 |G|^2)
};

/// Post-cancellation SNR of the target user: (|H|^2/sigma^2)(1 - |Lambda|^2),
/// also computed in numerator form; the two agree to roundoff.
EffectiveSnrBreakdown effective_snr_ap(const std::vector<AlamoutiBlock>& h,
                                       const std::vector<AlamoutiBlock>& g, double sigma_sq);

/// |H|^2 |G|^2 - |H^H G|^2 via generic matrix arithmetic on the stacked 4x2
/// channels (two antennas).
double lemma1_lhs(const RealChannelDecomposition& d);

/// The same quantity as a 32-term real expansion: sum over k of
/// (L_k - 2 s C_k / d)^2 in the unpacked coordinates.
double lemma1_rhs(const RealChannelDecomposition& d);

/// |lhs - rhs| / max(1, |lhs|) with the two sides computed independently.
double lemma1_residual(const RealChannelDecomposition& d);

/// (|H|^2 |G|^2 - |H^H G|^2) / |G|^2.  With i.i.d. CN(0,1) coefficients this
/// is Gamma(2,1)-distributed (density x e^-x).
double chi_square_statistic(const std::vector<AlamoutiBlock>& h,
                            const std::vector<AlamoutiBlock>& g);

/// Group energies beta_i = g_i / (d + g_i) of the interferer coordinate
/// vector, where d is the energy of the first (pivot) group of four.
std::vector<double> betas_from_b(const std::vector<double>& b_extended, std::size_t m_rx);

/// The structured 4x4 pattern matrix of one coordinate group.
ComplexMat b_pattern(const std::vector<double>& group);

/// Correlation matrix of the normalized post-cancellation channel
/// coordinates: 4(M-1) square, unit diagonal blocks, off-diagonal blocks
/// B_i B_j^T with B_i = pattern(group_i)/sqrt(d + g_i).
ComplexMat channel_correlation_C(const std::vector<double>& b_extended, std::size_t m_rx);

/// Closed form of det(C) for M = 3: (1 - beta1 beta2)^4.
double det_c_closed_form(const std::vector<double>& b_extended, std::size_t m_rx = 3);

/// The roots of sum_i beta_i/(lambda + beta_i - 1) = 1, one per monotonic
/// interval between consecutive poles plus one above the largest pole;
/// exactly len(betas) roots, returned ascending.
std::vector<double> lemma3_roots(const std::vector<double>& betas);

/// Eigenstructure evidence for the correlation matrix: roots, eigenvector
/// coefficients, orthogonality and diagonalization residuals, and the
/// minimum eigenvalue (full-rank witness).
struct SpectralCertificate {
    std::vector<double> betas;
    std::vector<double> lambda_stars;
    std::vector<std::vector<double>> coeffs;  // coeffs[i][m] = 1/(lambda*_i + beta_m - 1)
    std::vector<double> s_values;             // S_i = sum_m beta_m coeffs[i][m]^2
    double eig_residual = 0.0;   // max |C u_i - lambda*_i u_i| / |u_i|
    double orth_residual = 0.0;  // max scaled |u_i^T u_j| (i != j), |u_i^T u_i - S_i I| / S_i
    double diag_residual = 0.0;  // max scaled entry error of U^T C U vs diag(S_i lambda*_i)
    double min_eigenvalue = 0.0;
};

SpectralCertificate lemma2_verify(const std::vector<double>& b_extended, std::size_t m_rx);

struct SimPoint {
    double x = 0.0;
    double y = 0.0;
    std::uint64_t trials = 0;
    std::uint64_t errors = 0;
    bool low_confidence = false;
};

struct SimResult {
    std::vector<SimPoint> points;
    std::string label;
    std::uint64_t seed = 0;
};

/// Empirical CDF of a sampled statistic at each epsilon, plus the weighted
/// least-squares slope of log P versus log epsilon.  The sampler receives a
/// per-sample stream keyed (seed, sample index).  Throws when any epsilon
/// bin collects fewer than 100 events.
std::pair<double, SimResult> outage_diversity_estimate(
    const std::function<double(RngStream&)>& sampler, const std::vector<double>& eps_grid,
    std::uint64_t samples, std::uint64_t seed, unsigned threads = 1);

/// Negative slope of log10(rate) versus log10(snr linear) over the points of
/// the curve whose x (dB) lies in [window_lo_db, window_hi_db], weighted by
/// error counts.  Requires at least 3 points in the window, each with at
/// least 100 errors.
double ber_diversity_estimate(const SimResult& curve, double window_lo_db, double window_hi_db);

/// Kolmogorov-Smirnov distance of samples against the Gamma(2,1) CDF
/// 1 - (1+x) e^-x.
double ks_distance_gamma21(std::vector<double> samples);

}  // namespace stbcmud
