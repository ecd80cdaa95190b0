#include "stbcmud/detect.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace stbcmud {

namespace {

constexpr double kSingularTol = 1e-12;

AlamoutiBlock checked_inverse(const AlamoutiBlock& blk, const char* who) {
    if (blk.norm_sq() <= kSingularTol) {
        throw std::domain_error(std::string(who) + ": singular Alamouti block");
    }
    return alamouti_inverse(blk);
}

struct WhitenedStats {
    double gamma = 0.0;
    cx w1{0.0, 0.0};
    cx w2{0.0, 0.0};
};

WhitenedStats whitened_stats(const EquivalentSystem& sys,
                             const std::vector<std::vector<AlamoutiBlock>>& cinv) {
    const std::size_t m = sys.obs.size();
    WhitenedStats st;
    AlamoutiBlock acc{cx{0.0, 0.0}, cx{0.0, 0.0}};
    for (std::size_t i = 0; i < m; ++i) {
        cx v1{0.0, 0.0}, v2{0.0, 0.0};
        AlamoutiBlock t{cx{0.0, 0.0}, cx{0.0, 0.0}};
        for (std::size_t j = 0; j < m; ++j) {
            auto [x1, x2] = cinv[i][j].apply(sys.obs[j][0], sys.obs[j][1]);
            v1 += x1;
            v2 += x2;
            t = t + cinv[i][j] * sys.chan[j];
        }
        auto [w1, w2] = sys.chan[i].apply_hermitian(v1, v2);
        st.w1 += w1;
        st.w2 += w2;
        acc = acc + sys.chan[i].hermitian() * t;
    }
    st.gamma = acc.a.real();
    return st;
}

std::size_t argmin_point(const Constellation& q, double gamma, cx w) {
    std::size_t best = 0;
    double best_metric = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < q.size(); ++i) {
        const cx c = q.point(i);
        const double metric = gamma * std::norm(c) - 2.0 * (std::conj(c) * w).real();
        if (metric < best_metric) {
            best_metric = metric;
            best = i;
        }
    }
    return best;
}

}  // namespace

ComplexMat EquivalentSystem::observations() const {
    ComplexMat r(2 * obs.size(), 1);
    for (std::size_t i = 0; i < obs.size(); ++i) {
        r(2 * i, 0) = obs[i][0];
        r(2 * i + 1, 0) = obs[i][1];
    }
    return r;
}

ComplexMat EquivalentSystem::channel_matrix() const {
    std::vector<std::array<cx, 2>> h(chan.size());
    for (std::size_t i = 0; i < chan.size(); ++i) h[i] = {chan[i].a, chan[i].b};
    return equivalent_channel(h);
}

ComplexMat EquivalentSystem::noise_cov() const {
    const std::size_t m = noise_blocks.size();
    ComplexMat c(2 * m, 2 * m);
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = 0; j < m; ++j) {
            ComplexMat blk = noise_blocks[i][j].to_matrix();
            for (std::size_t p = 0; p < 2; ++p)
                for (std::size_t s = 0; s < 2; ++s) c(2 * i + p, 2 * j + s) = blk(p, s);
        }
    }
    return c;
}

Decision ml_joint_detect(const AlamoutiSystem& sys, const Constellation& q, std::size_t cap) {
    const std::size_t users = sys.chan.size();
    const std::size_t m = sys.obs.size();
    if (users == 0) throw std::invalid_argument("ml_joint_detect: no users");
    for (const auto& blocks : sys.chan) {
        if (blocks.size() != m) throw std::invalid_argument("ml_joint_detect: antenna mismatch");
    }
    const std::size_t pairs = q.size() * q.size();
    double total_d = std::pow(static_cast<double>(pairs), static_cast<double>(users));
    if (total_d > static_cast<double>(cap)) {
        throw std::invalid_argument(
            "ml_joint_detect: search space exceeds cap; reduce users or constellation size");
    }
    const std::size_t total = static_cast<std::size_t>(total_d + 0.5);

    // Per-user contribution of each symbol pair at each antenna.
    std::vector<std::vector<std::array<cx, 2>>> contrib(users);
    for (std::size_t j = 0; j < users; ++j) {
        contrib[j].resize(pairs * m);
        for (std::size_t p = 0; p < pairs; ++p) {
            const cx c1 = q.point(p / q.size());
            const cx c2 = q.point(p % q.size());
            for (std::size_t i = 0; i < m; ++i) {
                auto [y1, y2] = sys.chan[j][i].apply(c1, c2);
                contrib[j][p * m + i] = {y1, y2};
            }
        }
    }

    std::vector<std::size_t> pair_idx(users, 0);
    Decision best;
    best.metric = std::numeric_limits<double>::infinity();
    for (std::size_t t = 0; t < total; ++t) {
        std::size_t rem = t;
        for (std::size_t j = users; j-- > 0;) {
            pair_idx[j] = rem % pairs;
            rem /= pairs;
        }
        double metric = 0.0;
        for (std::size_t i = 0; i < m; ++i) {
            cx e1 = sys.obs[i][0];
            cx e2 = sys.obs[i][1];
            for (std::size_t j = 0; j < users; ++j) {
                const auto& y = contrib[j][pair_idx[j] * m + i];
                e1 -= y[0];
                e2 -= y[1];
            }
            metric += std::norm(e1) + std::norm(e2);
        }
        if (metric < best.metric) {
            best.metric = metric;
            best.indices.clear();
            for (std::size_t j = 0; j < users; ++j) {
                best.indices.push_back(pair_idx[j] / q.size());
                best.indices.push_back(pair_idx[j] % q.size());
            }
        }
    }
    return best;
}

std::pair<EquivalentSystem, EquivalentSystem> ap_cancel_pair(
    const std::array<cx, 2>& r1, const std::array<cx, 2>& r2, const AlamoutiBlock& h1,
    const AlamoutiBlock& h2, const AlamoutiBlock& g1, const AlamoutiBlock& g2, double sigma_sq) {
    auto build = [&](const AlamoutiBlock& k1, const AlamoutiBlock& k2, const AlamoutiBlock& s1,
                     const AlamoutiBlock& s2, const char* tag) {
        const AlamoutiBlock k1i = checked_inverse(k1, "ap_cancel_pair");
        const AlamoutiBlock k2i = checked_inverse(k2, "ap_cancel_pair");
        EquivalentSystem sys;
        auto [a1, a2] = k2i.apply(r2[0], r2[1]);
        auto [b1, b2] = k1i.apply(r1[0], r1[1]);
        sys.obs = {{a1 - b1, a2 - b2}};
        sys.chan = {k2i * s2 - k1i * s1};
        const double v = sigma_sq * (1.0 / k1.norm_sq() + 1.0 / k2.norm_sq());
        sys.noise_blocks = {{AlamoutiBlock{cx{v, 0.0}, cx{0.0, 0.0}}}};
        sys.meta = tag;
        if (sys.chan[0].norm_sq() < kSingularTol) sys.meta += " (degenerate)";
        return sys;
    };
    EquivalentSystem for_c = build(g1, g2, h1, h2, "cancelled second user");
    EquivalentSystem for_s = build(h1, h2, g1, g2, "cancelled first user");
    return {for_c, for_s};
}

EquivalentSystem ap_cancel_general(const AlamoutiSystem& sys, std::size_t target_user,
                                   double sigma_sq) {
    const std::size_t users = sys.chan.size();
    const std::size_t rx = sys.obs.size();
    if (target_user >= users) throw std::invalid_argument("ap_cancel_general: bad target user");
    if (rx < users) {
        throw std::invalid_argument("ap_cancel_general: need at least as many antennas as users");
    }
    for (const auto& blocks : sys.chan) {
        if (blocks.size() != rx) {
            throw std::invalid_argument("ap_cancel_general: antenna mismatch");
        }
    }

    std::vector<std::array<cx, 2>> obs = sys.obs;
    std::vector<AlamoutiBlock> tchan = sys.chan[target_user];
    std::vector<std::vector<AlamoutiBlock>> others;
    std::string meta = "cancelled users:";
    for (std::size_t j = 0; j < users; ++j) {
        if (j != target_user) others.push_back(sys.chan[j]);
    }
    // Noise map: row i of the current system as blocks over the original
    // antenna noise vector.
    std::vector<std::vector<AlamoutiBlock>> tmap(rx,
                                                 std::vector<AlamoutiBlock>(rx, AlamoutiBlock{}));
    for (std::size_t i = 0; i < rx; ++i) tmap[i][i] = AlamoutiBlock{cx{1.0, 0.0}, cx{0.0, 0.0}};

    while (!others.empty()) {
        const std::vector<AlamoutiBlock> k = others.back();
        others.pop_back();
        const std::size_t m = obs.size();
        std::vector<AlamoutiBlock> kinv(m);
        for (std::size_t i = 0; i < m; ++i) kinv[i] = checked_inverse(k[i], "ap_cancel_general");

        std::vector<std::array<cx, 2>> nobs(m - 1);
        std::vector<AlamoutiBlock> ntchan(m - 1);
        std::vector<std::vector<AlamoutiBlock>> nmap(m - 1);
        auto [l1, l2] = kinv[m - 1].apply(obs[m - 1][0], obs[m - 1][1]);
        for (std::size_t i = 0; i + 1 < m; ++i) {
            auto [x1, x2] = kinv[i].apply(obs[i][0], obs[i][1]);
            nobs[i] = {x1 - l1, x2 - l2};
            ntchan[i] = kinv[i] * tchan[i] - kinv[m - 1] * tchan[m - 1];
            nmap[i].resize(rx);
            for (std::size_t c = 0; c < rx; ++c) {
                nmap[i][c] = kinv[i] * tmap[i][c] - kinv[m - 1] * tmap[m - 1][c];
            }
        }
        for (auto& blocks : others) {
            std::vector<AlamoutiBlock> nb(m - 1);
            for (std::size_t i = 0; i + 1 < m; ++i) {
                nb[i] = kinv[i] * blocks[i] - kinv[m - 1] * blocks[m - 1];
            }
            blocks = std::move(nb);
        }
        obs = std::move(nobs);
        tchan = std::move(ntchan);
        tmap = std::move(nmap);
        meta += " +1";
    }

    EquivalentSystem out;
    out.obs = std::move(obs);
    out.chan = std::move(tchan);
    const std::size_t m = out.obs.size();
    out.noise_blocks.assign(m, std::vector<AlamoutiBlock>(m, AlamoutiBlock{}));
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = 0; j < m; ++j) {
            AlamoutiBlock acc{cx{0.0, 0.0}, cx{0.0, 0.0}};
            for (std::size_t c = 0; c < rx; ++c) acc = acc + tmap[i][c] * tmap[j][c].hermitian();
            out.noise_blocks[i][j] = acc * sigma_sq;
        }
    }
    out.meta = meta;
    return out;
}

ComplexMat noise_correlation(const std::vector<AlamoutiBlock>& g, double sigma_sq) {
    if (g.size() < 2) throw std::invalid_argument("noise_correlation: need at least 2 antennas");
    for (const AlamoutiBlock& blk : g) {
        if (blk.norm_sq() <= kSingularTol) {
            throw std::domain_error("noise_correlation: zero interferer block");
        }
    }
    const std::size_t m = g.size() - 1;
    const double pivot = sigma_sq / g[0].norm_sq();
    ComplexMat c(2 * m, 2 * m);
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = 0; j < m; ++j) {
            const double v = (i == j) ? pivot + sigma_sq / g[i + 1].norm_sq() : pivot;
            c(2 * i, 2 * j) = cx{v, 0.0};
            c(2 * i + 1, 2 * j + 1) = cx{v, 0.0};
        }
    }
    return c;
}

std::vector<std::vector<AlamoutiBlock>> block_inverse_hermitian(
    const std::vector<std::vector<AlamoutiBlock>>& c) {
    const std::size_t n = c.size();
    std::vector<std::vector<AlamoutiBlock>> a = c;
    std::vector<std::vector<AlamoutiBlock>> inv(n, std::vector<AlamoutiBlock>(n, AlamoutiBlock{}));
    for (std::size_t i = 0; i < n; ++i) {
        if (a[i].size() != n) throw std::invalid_argument("block_inverse_hermitian: not square");
        inv[i][i] = AlamoutiBlock{cx{1.0, 0.0}, cx{0.0, 0.0}};
    }
    for (std::size_t k = 0; k < n; ++k) {
        const AlamoutiBlock piv = a[k][k];
        if (piv.a.real() <= 0.0 ||
            std::abs(piv.a.imag()) + std::abs(piv.b) > 1e-9 * (1.0 + std::abs(piv.a))) {
            throw std::domain_error("block_inverse_hermitian: matrix not positive definite");
        }
        const AlamoutiBlock pinv = alamouti_inverse(piv);
        for (std::size_t j = 0; j < n; ++j) {
            a[k][j] = pinv * a[k][j];
            inv[k][j] = pinv * inv[k][j];
        }
        for (std::size_t i = 0; i < n; ++i) {
            if (i == k) continue;
            const AlamoutiBlock f = a[i][k];
            if (f.norm_sq() == 0.0) continue;
            for (std::size_t j = 0; j < n; ++j) {
                a[i][j] = a[i][j] - f * a[k][j];
                inv[i][j] = inv[i][j] - f * inv[k][j];
            }
        }
    }
    return inv;
}

Decision whitened_ml_decode(const EquivalentSystem& sys, const Constellation& q) {
    const std::size_t m = sys.obs.size();
    const auto cinv = block_inverse_hermitian(sys.noise_blocks);
    Decision best;
    best.metric = std::numeric_limits<double>::infinity();
    std::vector<std::array<cx, 2>> e(m), t(m);
    for (std::size_t i1 = 0; i1 < q.size(); ++i1) {
        for (std::size_t i2 = 0; i2 < q.size(); ++i2) {
            const cx c1 = q.point(i1);
            const cx c2 = q.point(i2);
            for (std::size_t i = 0; i < m; ++i) {
                auto [y1, y2] = sys.chan[i].apply(c1, c2);
                e[i] = {sys.obs[i][0] - y1, sys.obs[i][1] - y2};
            }
            double metric = 0.0;
            for (std::size_t i = 0; i < m; ++i) {
                cx t1{0.0, 0.0}, t2{0.0, 0.0};
                for (std::size_t j = 0; j < m; ++j) {
                    auto [x1, x2] = cinv[i][j].apply(e[j][0], e[j][1]);
                    t1 += x1;
                    t2 += x2;
                }
                metric += (std::conj(e[i][0]) * t1 + std::conj(e[i][1]) * t2).real();
            }
            if (metric < best.metric) {
                best.metric = metric;
                best.indices = {i1, i2};
            }
        }
    }
    return best;
}

Decision whitened_ml_decode_separate(const EquivalentSystem& sys, const Constellation& q) {
    const auto cinv = block_inverse_hermitian(sys.noise_blocks);
    const WhitenedStats st = whitened_stats(sys, cinv);
    Decision d;
    d.indices = {argmin_point(q, st.gamma, st.w1), argmin_point(q, st.gamma, st.w2)};
    const cx c1 = q.point(d.indices[0]);
    const cx c2 = q.point(d.indices[1]);
    d.metric = st.gamma * (std::norm(c1) + std::norm(c2)) -
               2.0 * (std::conj(c1) * st.w1 + std::conj(c2) * st.w2).real();
    return d;
}

Decision qostbc_ap_detect(const std::vector<std::array<cx, 4>>& received,
                          const std::vector<std::vector<std::array<cx, 4>>>& chan,
                          std::size_t target_user, const Constellation& q, double sigma_sq) {
    const std::size_t users = chan.size();
    const std::size_t rx = received.size();
    if (target_user >= users) throw std::invalid_argument("qostbc_ap_detect: bad target user");
    if (rx < users) {
        throw std::invalid_argument("qostbc_ap_detect: need at least as many antennas as users");
    }
    AlamoutiSystem plus_sys, minus_sys;
    plus_sys.obs.resize(rx);
    minus_sys.obs.resize(rx);
    plus_sys.chan.assign(users, std::vector<AlamoutiBlock>(rx));
    minus_sys.chan.assign(users, std::vector<AlamoutiBlock>(rx));
    for (std::size_t m = 0; m < rx; ++m) {
        for (std::size_t j = 0; j < users; ++j) {
            if (chan[j].size() != rx) {
                throw std::invalid_argument("qostbc_ap_detect: antenna mismatch");
            }
            auto [plus, minus] = qostbc_split(received[m], chan[j][m]);
            plus_sys.chan[j][m] = plus.chan;
            minus_sys.chan[j][m] = minus.chan;
            if (j == 0) {
                plus_sys.obs[m] = plus.obs;
                minus_sys.obs[m] = minus.obs;
            }
        }
    }
    // Each branch observation is a sum/difference of two received samples,
    // so its noise variance is doubled.
    const EquivalentSystem ep = ap_cancel_general(plus_sys, target_user, 2.0 * sigma_sq);
    const EquivalentSystem em = ap_cancel_general(minus_sys, target_user, 2.0 * sigma_sq);
    const WhitenedStats sp = whitened_stats(ep, block_inverse_hermitian(ep.noise_blocks));
    const WhitenedStats sm = whitened_stats(em, block_inverse_hermitian(em.noise_blocks));

    const cx rot = std::polar(1.0, q.rotation);
    Decision d;
    d.indices.assign(4, 0);
    d.metric = 0.0;
    const cx wp[2] = {sp.w1, sp.w2};
    const cx wm[2] = {sm.w1, sm.w2};
    for (std::size_t slot = 0; slot < 2; ++slot) {
        double best_metric = std::numeric_limits<double>::infinity();
        std::size_t bi = 0, bj = 0;
        for (std::size_t i = 0; i < q.size(); ++i) {
            for (std::size_t j = 0; j < q.size(); ++j) {
                const cx x = q.point(i);
                const cx y = q.point(j) * rot;
                const cx pl = x + y;
                const cx mi = x - y;
                const double metric = sp.gamma * std::norm(pl) -
                                      2.0 * (std::conj(pl) * wp[slot]).real() +
                                      sm.gamma * std::norm(mi) -
                                      2.0 * (std::conj(mi) * wm[slot]).real();
                if (metric < best_metric) {
                    best_metric = metric;
                    bi = i;
                    bj = j;
                }
            }
        }
        d.indices[slot] = bi;
        d.indices[slot + 2] = bj;
        d.metric += best_metric;
    }
    return d;
}

}  // namespace stbcmud
