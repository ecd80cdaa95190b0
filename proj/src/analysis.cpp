#include "stbcmud/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <thread>

#include "stbcmud/stcodes.hpp"

namespace stbcmud {

namespace {

double sum_norm_sq(const std::vector<AlamoutiBlock>& blocks) {
    double s = 0.0;
    for (const AlamoutiBlock& b : blocks) s += b.norm_sq();
    return s;
}

AlamoutiBlock cross_product(const std::vector<AlamoutiBlock>& h,
                            const std::vector<AlamoutiBlock>& g) {
    AlamoutiBlock acc{cx{0.0, 0.0}, cx{0.0, 0.0}};
    for (std::size_t i = 0; i < h.size(); ++i) acc = acc + h[i].hermitian() * g[i];
    return acc;
}

double weighted_slope(const std::vector<double>& x, const std::vector<double>& y,
                      const std::vector<double>& w) {
    double wsum = 0.0, xbar = 0.0, ybar = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        wsum += w[i];
        xbar += w[i] * x[i];
        ybar += w[i] * y[i];
    }
    xbar /= wsum;
    ybar /= wsum;
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        num += w[i] * (x[i] - xbar) * (y[i] - ybar);
        den += w[i] * (x[i] - xbar) * (x[i] - xbar);
    }
    return num / den;
}

}  // namespace

EffectiveSnrBreakdown effective_snr_ap(const std::vector<AlamoutiBlock>& h,
                                       const std::vector<AlamoutiBlock>& g, double sigma_sq) {
    if (h.size() != g.size() || h.empty()) {
        throw std::invalid_argument("effective_snr_ap: channel block counts must match");
    }
    if (sigma_sq <= 0.0) throw std::invalid_argument("effective_snr_ap: sigma_sq must be positive");
    EffectiveSnrBreakdown out;
    out.sigma_sq = sigma_sq;
    out.h_norm_sq = sum_norm_sq(h);
    out.g_norm_sq = sum_norm_sq(g);
    if (out.h_norm_sq <= 0.0 || out.g_norm_sq <= 0.0) {
        throw std::domain_error("effective_snr_ap: zero channel");
    }
    const double cross = cross_product(h, g).norm_sq();
    out.lambda_norm_sq = cross / (out.h_norm_sq * out.g_norm_sq);
    out.snr_ap = out.h_norm_sq * (1.0 - out.lambda_norm_sq) / sigma_sq;
    out.numerator_form = (out.h_norm_sq * out.g_norm_sq - cross) / (sigma_sq * out.g_norm_sq);
    return out;
}

double lemma1_lhs(const RealChannelDecomposition& d) {
    if (d.a.size() != 8 || d.b.size() != 8) {
        throw std::invalid_argument("lemma1_lhs: expected the two-antenna decomposition");
    }
    auto [h, g] = compose_real(d);
    ComplexMat hm = equivalent_channel({{h[0].a, h[0].b}, {h[1].a, h[1].b}});
    ComplexMat gm = equivalent_channel({{g[0].a, g[0].b}, {g[1].a, g[1].b}});
    const double nh = frob_norm_sq(hm) * 0.5;
    const double ng = frob_norm_sq(gm) * 0.5;
    const double ncross = frob_norm_sq(matmul(hermitian(hm), gm)) * 0.5;
    return nh * ng - ncross;
}

double lemma1_rhs(const RealChannelDecomposition& dec) {
    if (dec.a.size() != 8 || dec.b.size() != 8) {
        throw std::invalid_argument("lemma1_rhs: expected the two-antenna decomposition");
    }
    const double a1 = dec.a[0], a2 = dec.a[1], a3 = dec.a[2], a4 = dec.a[3];
    const double a5 = dec.a[4], a6 = dec.a[5], a7 = dec.a[6], a8 = dec.a[7];
    const double b1 = dec.b[0], b2 = dec.b[1], b3 = dec.b[2], b4 = dec.b[3];
    const double b5 = dec.b[4], b6 = dec.b[5], b7 = dec.b[6], b8 = dec.b[7];
    const double d = b1 * b1 + b2 * b2 + b3 * b3 + b4 * b4;
    if (d <= 0.0) throw std::domain_error("lemma1_rhs: degenerate first coordinate group");
    const double s = b1 * b5 + b2 * b6 + b3 * b7 - b4 * b8;
    const double l1 =
        a1 * b5 - a2 * b6 - a3 * b7 - a4 * b8 - a5 * b1 - a6 * b2 - a7 * b3 - a8 * b4;
    const double c1 = a1 * b1 - a2 * b2 - a3 * b3 + a4 * b4;
    const double l2 =
        a1 * b6 + a2 * b5 - a3 * b8 + a4 * b7 - a5 * b2 + a6 * b1 + a7 * b4 - a8 * b3;
    const double c2 = a1 * b2 + a2 * b1 + a3 * b4 + a4 * b3;
    const double l3 =
        a1 * b7 + a2 * b8 + a3 * b5 - a4 * b6 - a5 * b3 - a6 * b4 + a7 * b1 + a8 * b2;
    const double c3 = a1 * b3 - a2 * b4 + a3 * b1 - a4 * b2;
    const double l4 =
        -a1 * b8 + a2 * b7 - a3 * b6 - a4 * b5 - a5 * b4 + a6 * b3 - a7 * b2 + a8 * b1;
    const double c4 = a1 * b4 + a2 * b3 - a3 * b2 - a4 * b1;
    const double f = 2.0 * s / d;
    const double t1 = l1 - f * c1;
    const double t2 = l2 - f * c2;
    const double t3 = l3 - f * c3;
    const double t4 = l4 - f * c4;
    return t1 * t1 + t2 * t2 + t3 * t3 + t4 * t4;
}

double lemma1_residual(const RealChannelDecomposition& d) {
    const double rhs = lemma1_rhs(d);
    const double lhs = lemma1_lhs(d);
    return std::abs(lhs - rhs) / std::max(1.0, std::abs(lhs));
}

double chi_square_statistic(const std::vector<AlamoutiBlock>& h,
                            const std::vector<AlamoutiBlock>& g) {
    if (h.size() != g.size() || h.empty()) {
        throw std::invalid_argument("chi_square_statistic: channel block counts must match");
    }
    const double ng = sum_norm_sq(g);
    if (ng <= 0.0) throw std::domain_error("chi_square_statistic: zero interferer channel");
    const double nh = sum_norm_sq(h);
    const double cross = cross_product(h, g).norm_sq();
    return (nh * ng - cross) / ng;
}

std::vector<double> betas_from_b(const std::vector<double>& b_extended, std::size_t m_rx) {
    if (m_rx < 2 || b_extended.size() != 4 * m_rx) {
        throw std::invalid_argument("betas_from_b: coordinate vector must have length 4M");
    }
    double d = 0.0;
    for (std::size_t i = 0; i < 4; ++i) d += b_extended[i] * b_extended[i];
    if (d <= 0.0) throw std::domain_error("betas_from_b: degenerate first coordinate group");
    std::vector<double> betas(m_rx - 1);
    for (std::size_t i = 0; i + 1 < m_rx; ++i) {
        double gi = 0.0;
        for (std::size_t k = 0; k < 4; ++k) {
            const double v = b_extended[4 * (i + 1) + k];
            gi += v * v;
        }
        betas[i] = gi / (d + gi);
    }
    return betas;
}

ComplexMat b_pattern(const std::vector<double>& group) {
    if (group.size() != 4) throw std::invalid_argument("b_pattern: group of four expected");
    const double c1 = group[0], c2 = group[1], c3 = group[2], c4 = group[3];
    ComplexMat m(4, 4);
    const double vals[4][4] = {{c1, c2, c3, c4},
                               {c2, -c1, c4, -c3},
                               {c3, -c4, -c1, c2},
                               {c4, c3, -c2, -c1}};
    for (std::size_t i = 0; i < 4; ++i)
        for (std::size_t j = 0; j < 4; ++j) m(i, j) = cx{vals[i][j], 0.0};
    return m;
}

namespace {

std::vector<ComplexMat> scaled_patterns(const std::vector<double>& b_extended, std::size_t m_rx) {
    double d = 0.0;
    for (std::size_t i = 0; i < 4; ++i) d += b_extended[i] * b_extended[i];
    std::vector<ComplexMat> bs;
    for (std::size_t i = 0; i + 1 < m_rx; ++i) {
        std::vector<double> group(b_extended.begin() + 4 * (i + 1),
                                  b_extended.begin() + 4 * (i + 2));
        double gi = 0.0;
        for (double v : group) gi += v * v;
        bs.push_back(b_pattern(group) * cx{1.0 / std::sqrt(d + gi), 0.0});
    }
    return bs;
}

}  // namespace

ComplexMat channel_correlation_C(const std::vector<double>& b_extended, std::size_t m_rx) {
    betas_from_b(b_extended, m_rx);  // validates shape and non-degeneracy
    const std::vector<ComplexMat> bs = scaled_patterns(b_extended, m_rx);
    const std::size_t blocks = m_rx - 1;
    ComplexMat c = ComplexMat::identity(4 * blocks);
    for (std::size_t i = 0; i < blocks; ++i) {
        for (std::size_t j = 0; j < blocks; ++j) {
            if (i == j) continue;
            ComplexMat x = matmul(bs[i], hermitian(bs[j]));
            for (std::size_t p = 0; p < 4; ++p)
                for (std::size_t s = 0; s < 4; ++s) c(4 * i + p, 4 * j + s) = x(p, s);
        }
    }
    return c;
}

double det_c_closed_form(const std::vector<double>& b_extended, std::size_t m_rx) {
    if (m_rx != 3) throw std::invalid_argument("det_c_closed_form: closed form covers M = 3");
    const std::vector<double> betas = betas_from_b(b_extended, m_rx);
    const double r = 1.0 - betas[0] * betas[1];
    return r * r * r * r;
}

std::vector<double> lemma3_roots(const std::vector<double>& betas) {
    if (betas.empty()) throw std::invalid_argument("lemma3_roots: need at least one beta");
    for (double b : betas) {
        if (!(b > 0.0 && b < 1.0)) {
            throw std::invalid_argument("lemma3_roots: betas must lie in (0, 1)");
        }
    }
    std::vector<double> bs = betas;
    std::sort(bs.begin(), bs.end(), std::greater<double>());
    for (std::size_t i = 0; i + 1 < bs.size(); ++i) {
        if (bs[i] - bs[i + 1] < 1e-12) {
            throw std::invalid_argument("lemma3_roots: betas must be distinct");
        }
    }
    double beta_sum = 0.0;
    for (double b : bs) beta_sum += b;
    const auto f = [&](double lam) {
        double s = 0.0;
        for (double b : bs) s += b / (lam + b - 1.0);
        return s;
    };
    const auto fprime = [&](double lam) {
        double s = 0.0;
        for (double b : bs) {
            const double t = lam + b - 1.0;
            s -= b / (t * t);
        }
        return s;
    };
    // Poles ascending; f decreases from +inf to -inf between consecutive
    // poles and from +inf to 0 above the last one, so each interval holds
    // exactly one root of f = 1.
    std::vector<double> poles;
    for (double b : bs) poles.push_back(1.0 - b);
    std::vector<double> roots;
    for (std::size_t k = 0; k < poles.size(); ++k) {
        double lo = poles[k];
        double hi = (k + 1 < poles.size()) ? poles[k + 1] : 1.0 + beta_sum;
        const double pad = 1e-14 * std::max(1.0, std::abs(hi - lo));
        lo += pad;
        if (k + 1 < poles.size()) hi -= pad;
        for (int it = 0; it < 200 && hi - lo > 1e-15 * std::max(1.0, std::abs(lo)); ++it) {
            const double mid = 0.5 * (lo + hi);
            if (f(mid) > 1.0) {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        double root = 0.5 * (lo + hi);
        for (int it = 0; it < 4; ++it) {
            const double fp = fprime(root);
            if (fp == 0.0) break;
            const double next = root - (f(root) - 1.0) / fp;
            if (std::isfinite(next) && next > poles[k] &&
                (k + 1 >= poles.size() || next < poles[k + 1])) {
                root = next;
            }
        }
        roots.push_back(root);
    }
    return roots;
}

SpectralCertificate lemma2_verify(const std::vector<double>& b_extended, std::size_t m_rx) {
    if (m_rx < 3) throw std::invalid_argument("lemma2_verify: needs at least 3 receive antennas");
    SpectralCertificate cert;
    cert.betas = betas_from_b(b_extended, m_rx);
    cert.lambda_stars = lemma3_roots(cert.betas);
    const ComplexMat c = channel_correlation_C(b_extended, m_rx);
    const std::vector<ComplexMat> bs = scaled_patterns(b_extended, m_rx);
    const std::size_t blocks = m_rx - 1;
    const std::size_t n = 4 * blocks;

    std::vector<ComplexMat> us;
    for (std::size_t i = 0; i < blocks; ++i) {
        const double lam = cert.lambda_stars[i];
        std::vector<double> am(blocks);
        for (std::size_t m = 0; m < blocks; ++m) am[m] = 1.0 / (lam + cert.betas[m] - 1.0);
        cert.coeffs.push_back(am);
        double si = 0.0;
        for (std::size_t m = 0; m < blocks; ++m) si += cert.betas[m] * am[m] * am[m];
        cert.s_values.push_back(si);
        ComplexMat u(n, 4);
        for (std::size_t m = 0; m < blocks; ++m) {
            for (std::size_t p = 0; p < 4; ++p)
                for (std::size_t s = 0; s < 4; ++s) u(4 * m + p, s) = bs[m](p, s) * am[m];
        }
        us.push_back(std::move(u));
    }

    // Near-pole roots make the coefficients (hence the unnormalized
    // eigenvectors) large, so all residuals are scaled by the vector norms
    // sqrt(S_i) per column.
    for (std::size_t i = 0; i < blocks; ++i) {
        ComplexMat resid = matmul(c, us[i]) - us[i] * cx{cert.lambda_stars[i], 0.0};
        cert.eig_residual = std::max(
            cert.eig_residual, std::sqrt(frob_norm_sq(resid) / frob_norm_sq(us[i])));
        for (std::size_t j = 0; j < blocks; ++j) {
            ComplexMat prod = matmul(hermitian(us[i]), us[j]);
            if (i == j) {
                for (std::size_t p = 0; p < 4; ++p) prod(p, p) -= cx{cert.s_values[i], 0.0};
            }
            double mx = 0.0;
            for (const cx& v : prod.entries()) mx = std::max(mx, std::abs(v));
            cert.orth_residual = std::max(
                cert.orth_residual, mx / std::sqrt(cert.s_values[i] * cert.s_values[j]));
        }
    }

    ComplexMat ufull(n, n);
    for (std::size_t i = 0; i < blocks; ++i)
        for (std::size_t r = 0; r < n; ++r)
            for (std::size_t s = 0; s < 4; ++s) ufull(r, 4 * i + s) = us[i](r, s);
    ComplexMat diag = matmul(hermitian(ufull), matmul(c, ufull));
    for (std::size_t r = 0; r < n; ++r) {
        for (std::size_t s = 0; s < n; ++s) {
            const double scale = std::sqrt(cert.s_values[r / 4] * cert.s_values[s / 4]);
            if (r == s) {
                const double expect = cert.s_values[r / 4] * cert.lambda_stars[r / 4];
                cert.diag_residual = std::max(cert.diag_residual,
                                              std::abs(diag(r, s) - cx{expect, 0.0}) / scale);
            } else {
                cert.diag_residual = std::max(cert.diag_residual, std::abs(diag(r, s)) / scale);
            }
        }
    }

    cert.min_eigenvalue = eig_real_sym(c).front().first;
    return cert;
}

std::pair<double, SimResult> outage_diversity_estimate(
    const std::function<double(RngStream&)>& sampler, const std::vector<double>& eps_grid,
    std::uint64_t samples, std::uint64_t seed, unsigned threads) {
    if (eps_grid.size() < 3 || !std::is_sorted(eps_grid.begin(), eps_grid.end())) {
        throw std::invalid_argument("outage_diversity_estimate: need an ascending grid, >= 3 points");
    }
    if (samples == 0) throw std::invalid_argument("outage_diversity_estimate: need samples");
    if (threads == 0) threads = 1;

    std::vector<std::vector<std::uint64_t>> counts(threads,
                                                   std::vector<std::uint64_t>(eps_grid.size(), 0));
    const double eps_max = eps_grid.back();
    auto worker = [&](unsigned t, std::uint64_t lo, std::uint64_t hi) {
        auto& local = counts[t];
        for (std::uint64_t i = lo; i < hi; ++i) {
            RngStream rng(seed, 1, i);
            const double x = sampler(rng);
            if (x >= eps_max) continue;
            for (std::size_t k = 0; k < eps_grid.size(); ++k) {
                if (x < eps_grid[k]) ++local[k];
            }
        }
    };
    if (threads == 1) {
        worker(0, 0, samples);
    } else {
        std::vector<std::thread> pool;
        const std::uint64_t chunk = (samples + threads - 1) / threads;
        for (unsigned t = 0; t < threads; ++t) {
            const std::uint64_t lo = t * chunk;
            const std::uint64_t hi = std::min<std::uint64_t>(samples, lo + chunk);
            if (lo >= hi) break;
            pool.emplace_back(worker, t, lo, hi);
        }
        for (auto& th : pool) th.join();
    }

    SimResult curve;
    curve.seed = seed;
    curve.label = "outage";
    std::vector<double> lx, ly, lw;
    for (std::size_t k = 0; k < eps_grid.size(); ++k) {
        std::uint64_t total = 0;
        for (unsigned t = 0; t < threads; ++t) total += counts[t][k];
        if (total < 100) {
            throw std::runtime_error("outage_diversity_estimate: fewer than 100 events at epsilon=" +
                                     std::to_string(eps_grid[k]));
        }
        SimPoint p;
        p.x = eps_grid[k];
        p.y = static_cast<double>(total) / static_cast<double>(samples);
        p.trials = samples;
        p.errors = total;
        curve.points.push_back(p);
        lx.push_back(std::log10(eps_grid[k]));
        ly.push_back(std::log10(p.y));
        lw.push_back(static_cast<double>(total));
    }
    return {weighted_slope(lx, ly, lw), curve};
}

double ber_diversity_estimate(const SimResult& curve, double window_lo_db, double window_hi_db) {
    std::vector<double> lx, ly, lw;
    for (const SimPoint& p : curve.points) {
        if (p.x < window_lo_db - 1e-9 || p.x > window_hi_db + 1e-9) continue;
        if (p.errors < 100) {
            throw std::runtime_error("ber_diversity_estimate: fewer than 100 errors at " +
                                     std::to_string(p.x) + " dB");
        }
        lx.push_back(p.x / 10.0);  // log10 of linear snr
        ly.push_back(std::log10(p.y));
        lw.push_back(static_cast<double>(p.errors));
    }
    if (lx.size() < 3) {
        throw std::runtime_error("ber_diversity_estimate: need at least 3 points in the window");
    }
    return -weighted_slope(lx, ly, lw);
}

double ks_distance_gamma21(std::vector<double> samples) {
    if (samples.empty()) throw std::invalid_argument("ks_distance_gamma21: no samples");
    std::sort(samples.begin(), samples.end());
    const double n = static_cast<double>(samples.size());
    double dist = 0.0;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const double x = samples[i];
        const double cdf = x <= 0.0 ? 0.0 : 1.0 - (1.0 + x) * std::exp(-x);
        const double hi = (static_cast<double>(i) + 1.0) / n;
        const double lo = static_cast<double>(i) / n;
        dist = std::max(dist, std::max(std::abs(cdf - hi), std::abs(cdf - lo)));
    }
    return dist;
}

}  // namespace stbcmud
