#include <cmath>

#include "doctest.h"
#include "stbcmud/analysis.hpp"
#include "stbcmud/rng.hpp"

using namespace stbcmud;

namespace {

AlamoutiBlock random_block(RngStream& rng) { return {rng.cnormal(), rng.cnormal()}; }

std::vector<AlamoutiBlock> random_blocks(std::size_t n, RngStream& rng) {
    std::vector<AlamoutiBlock> v(n);
    for (auto& b : v) b = random_block(rng);
    return v;
}

std::vector<double> random_coords(std::size_t n, RngStream& rng) {
    std::vector<double> v(n);
    for (auto& x : v) x = rng.gaussian();
    return v;
}

double gamma21_cdf(double x) { return x <= 0.0 ? 0.0 : 1.0 - (1.0 + x) * std::exp(-x); }

}  // namespace

TEST_CASE("effective_snr_ap orthogonal, degenerate and consistency cases") {
    // Orthogonal channels: cancellation costs nothing.
    std::vector<AlamoutiBlock> h = {{cx{1.0, 0.0}, cx{0.0, 0.0}}, {cx{0.0, 0.0}, cx{0.0, 0.0}}};
    std::vector<AlamoutiBlock> g = {{cx{0.0, 0.0}, cx{0.0, 0.0}}, {cx{1.0, 0.0}, cx{0.0, 0.0}}};
    EffectiveSnrBreakdown b = effective_snr_ap(h, g, 0.5);
    CHECK(b.lambda_norm_sq == doctest::Approx(0.0));
    CHECK(b.snr_ap == doctest::Approx(2.0));
    CHECK(b.numerator_form == doctest::Approx(2.0));

    // A single receive antenna leaves nothing after cancellation.
    RngStream rng(301);
    EffectiveSnrBreakdown one =
        effective_snr_ap({random_block(rng)}, {random_block(rng)}, 1.0);
    CHECK(one.lambda_norm_sq == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(std::abs(one.snr_ap) < 1e-10);

    for (int t = 0; t < 1000; ++t) {
        auto hb = random_blocks(2, rng);
        auto gb = random_blocks(2, rng);
        EffectiveSnrBreakdown s = effective_snr_ap(hb, gb, 0.25);
        CHECK(s.lambda_norm_sq >= 0.0);
        CHECK(s.lambda_norm_sq <= 1.0 + 1e-12);
        CHECK(s.snr_ap ==
              doctest::Approx(s.numerator_form).epsilon(1e-10));
    }

    CHECK_THROWS_AS(effective_snr_ap({}, {}, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(effective_snr_ap({AlamoutiBlock{}}, {random_block(rng)}, 1.0),
                    std::domain_error);
    CHECK_THROWS_AS(effective_snr_ap({random_block(rng)}, {random_block(rng)}, 0.0),
                    std::invalid_argument);
}

TEST_CASE("effective_snr numerator equals the coordinate expansion") {
    RngStream rng(302);
    for (int t = 0; t < 200; ++t) {
        auto hb = random_blocks(2, rng);
        auto gb = random_blocks(2, rng);
        const double sigma_sq = 0.4;
        EffectiveSnrBreakdown s = effective_snr_ap(hb, gb, sigma_sq);
        RealChannelDecomposition d = decompose_real(hb, gb);
        const double expect = lemma1_rhs(d) / (sigma_sq * s.g_norm_sq);
        CHECK(s.snr_ap == doctest::Approx(expect).epsilon(1e-8));
    }
}

TEST_CASE("coordinate identity for the cancellation numerator") {
    RngStream rng(303);

    // Zero target channel: both sides vanish.
    RealChannelDecomposition zero{std::vector<double>(8, 0.0), random_coords(8, rng)};
    CHECK(lemma1_lhs(zero) == doctest::Approx(0.0));
    CHECK(lemma1_rhs(zero) == doctest::Approx(0.0));
    CHECK(lemma1_residual(zero) < 1e-14);

    // Interferer present at the first antenna only.
    for (int t = 0; t < 100; ++t) {
        RealChannelDecomposition d{random_coords(8, rng), random_coords(8, rng)};
        for (std::size_t k = 4; k < 8; ++k) d.b[k] = 0.0;
        CHECK(lemma1_residual(d) < 1e-12);
    }

    for (int t = 0; t < 10'000; ++t) {
        RealChannelDecomposition d{random_coords(8, rng), random_coords(8, rng)};
        CHECK(lemma1_residual(d) < 1e-10);
    }

    RealChannelDecomposition degenerate{random_coords(8, rng), std::vector<double>(8, 0.0)};
    CHECK_THROWS_AS(lemma1_rhs(degenerate), std::domain_error);
    CHECK_THROWS_AS(lemma1_rhs(RealChannelDecomposition{{1.0}, {1.0}}), std::invalid_argument);
}

TEST_CASE("chi_square_statistic values and small-epsilon law") {
    std::vector<AlamoutiBlock> h = {{cx{2.0, 0.0}, cx{0.0, 0.0}}, {cx{0.0, 0.0}, cx{0.0, 0.0}}};
    std::vector<AlamoutiBlock> g = {{cx{0.0, 0.0}, cx{0.0, 0.0}}, {cx{1.0, 0.0}, cx{0.0, 0.0}}};
    CHECK(chi_square_statistic(h, g) == doctest::Approx(4.0));
    CHECK_THROWS_AS(chi_square_statistic(h, {AlamoutiBlock{}, AlamoutiBlock{}}),
                    std::domain_error);

    RngStream rng(304);
    for (int t = 0; t < 200; ++t) {
        auto hb = random_blocks(2, rng);
        auto gb = random_blocks(2, rng);
        RealChannelDecomposition d = decompose_real(hb, gb);
        double ng = gb[0].norm_sq() + gb[1].norm_sq();
        CHECK(chi_square_statistic(hb, gb) ==
              doctest::Approx(lemma1_lhs(d) / ng).epsilon(1e-10));
    }

    // The limiting CDF behaves as eps^2/2 near zero (diversity order two).
    for (double eps : {1e-3, 1e-4}) {
        CHECK(gamma21_cdf(eps) / (eps * eps / 2.0) == doctest::Approx(1.0).epsilon(1e-3));
    }
    const double slope = std::log10(gamma21_cdf(1e-3) / gamma21_cdf(1e-4));
    CHECK(slope == doctest::Approx(2.0).epsilon(1e-3));
}

TEST_CASE("betas_from_b and b_pattern") {
    std::vector<double> b = {1, 0, 0, 0, 1, 0, 0, 0, 0, 0, 1, 0};
    std::vector<double> betas = betas_from_b(b, 3);
    REQUIRE(betas.size() == 2);
    CHECK(betas[0] == doctest::Approx(0.5));
    CHECK(betas[1] == doctest::Approx(0.5));
    CHECK_THROWS_AS(betas_from_b({1.0, 2.0}, 3), std::invalid_argument);
    CHECK_THROWS_AS(betas_from_b(std::vector<double>{0, 0, 0, 0, 1, 0, 0, 0}, 2),
                    std::domain_error);

    ComplexMat pat = b_pattern({1, 2, 3, 4});
    CHECK(pat(0, 0) == cx{1.0, 0.0});
    CHECK(pat(1, 1) == cx{-1.0, 0.0});
    CHECK(pat(2, 3) == cx{2.0, 0.0});
    CHECK(pat(3, 0) == cx{4.0, 0.0});

    // B B^T = (sum of squares) I for every group.
    RngStream rng(305);
    for (int t = 0; t < 50; ++t) {
        std::vector<double> group = random_coords(4, rng);
        double e = 0.0;
        for (double v : group) e += v * v;
        ComplexMat gram = matmul(b_pattern(group), hermitian(b_pattern(group)));
        for (std::size_t i = 0; i < 4; ++i)
            for (std::size_t j = 0; j < 4; ++j) {
                const double expect = (i == j) ? e : 0.0;
                CHECK(std::abs(gram(i, j) - cx{expect, 0.0}) < 1e-12);
            }
    }
}

TEST_CASE("channel_correlation_C structure") {
    RngStream rng(306);
    // Two antennas: one block, so the correlation matrix is the identity.
    std::vector<double> b2 = random_coords(8, rng);
    ComplexMat c2 = channel_correlation_C(b2, 2);
    for (std::size_t i = 0; i < 4; ++i)
        for (std::size_t j = 0; j < 4; ++j)
            CHECK(c2(i, j) == cx{(i == j) ? 1.0 : 0.0, 0.0});

    for (std::size_t m_rx : {3u, 4u, 5u}) {
        std::vector<double> b = random_coords(4 * m_rx, rng);
        ComplexMat c = channel_correlation_C(b, m_rx);
        REQUIRE(c.rows() == 4 * (m_rx - 1));
        // Real symmetric with unit diagonal and strictly positive spectrum.
        for (std::size_t i = 0; i < c.rows(); ++i) {
            CHECK(c(i, i) == cx{1.0, 0.0});
            for (std::size_t j = 0; j < c.cols(); ++j) {
                CHECK(std::abs(c(i, j).imag()) == 0.0);
                CHECK(std::abs(c(i, j) - c(j, i)) < 1e-14);
            }
        }
        CHECK(eig_real_sym(c).front().first > 0.0);
    }
}

TEST_CASE("det_c closed form") {
    // Zero interferer energy beyond the pivot group: C is the identity.
    std::vector<double> quiet(12, 0.0);
    quiet[0] = 1.3;
    CHECK(det_c_closed_form(quiet, 3) == doctest::Approx(1.0));
    CHECK(std::abs(det(channel_correlation_C(quiet, 3)) - cx{1.0, 0.0}) < 1e-12);

    // Equal-energy groups: betas are both 1/2, det = (3/4)^4.
    std::vector<double> equal = {1, 0, 0, 0, 1, 0, 0, 0, 1, 0, 0, 0};
    CHECK(det_c_closed_form(equal, 3) == doctest::Approx(std::pow(0.75, 4)));

    RngStream rng(307);
    for (int t = 0; t < 200; ++t) {
        std::vector<double> b = random_coords(12, rng);
        const double closed = det_c_closed_form(b, 3);
        const cx numeric = det(channel_correlation_C(b, 3));
        CHECK(std::abs(numeric - cx{closed, 0.0}) < 1e-9 * std::max(1.0, closed));
    }
    CHECK_THROWS_AS(det_c_closed_form(random_coords(16, rng), 4), std::invalid_argument);
}

TEST_CASE("lemma3_roots count, location and residual") {
    // One beta: the single root is exactly 1.
    for (double beta : {0.1, 0.3, 0.9}) {
        auto roots = lemma3_roots({beta});
        REQUIRE(roots.size() == 1);
        CHECK(roots[0] == doctest::Approx(1.0).epsilon(1e-12));
    }

    auto two = lemma3_roots({0.25, 0.75});
    REQUIRE(two.size() == 2);
    CHECK(two[0] < two[1]);

    RngStream rng(308);
    for (int t = 0; t < 100; ++t) {
        const std::size_t n = 1 + t % 7;
        std::vector<double> betas(n);
        for (auto& b : betas) b = 0.05 + 0.9 * rng.uniform();
        std::sort(betas.begin(), betas.end());
        bool distinct = true;
        for (std::size_t i = 0; i + 1 < n; ++i)
            if (betas[i + 1] - betas[i] < 1e-6) distinct = false;
        if (!distinct) continue;

        auto roots = lemma3_roots(betas);
        REQUIRE(roots.size() == n);
        double beta_sum = 0.0;
        for (double b : betas) beta_sum += b;
        double root_sum = 0.0;
        for (std::size_t k = 0; k < n; ++k) {
            if (k > 0) CHECK(roots[k] > roots[k - 1]);
            CHECK(roots[k] > 0.0);
            CHECK(roots[k] <= 1.0 + beta_sum + 1e-9);
            double f = 0.0, fp = 0.0;
            for (double b : betas) {
                const double u = roots[k] + b - 1.0;
                f += b / u;
                fp += b / (u * u);
            }
            CHECK(std::abs(f - 1.0) / (1.0 + fp) < 1e-12);
            root_sum += roots[k];
        }
        // Trace identity: the roots sum to the number of betas.
        CHECK(root_sum == doctest::Approx(static_cast<double>(n)).epsilon(1e-9));
    }

    CHECK_THROWS_AS(lemma3_roots({}), std::invalid_argument);
    CHECK_THROWS_AS(lemma3_roots({0.5, 0.5}), std::invalid_argument);
    CHECK_THROWS_AS(lemma3_roots({1.5}), std::invalid_argument);
}

TEST_CASE("lemma2_verify certificate and full spectrum accounting") {
    RngStream rng(309);
    for (int t = 0; t < 60; ++t) {
        const std::size_t m_rx = 3 + t % 3;
        std::vector<double> b = random_coords(4 * m_rx, rng);
        SpectralCertificate cert = lemma2_verify(b, m_rx);
        CHECK(cert.eig_residual < 1e-8);
        CHECK(cert.orth_residual < 1e-8);
        CHECK(cert.diag_residual < 1e-8);
        CHECK(cert.min_eigenvalue > 0.0);
        for (double s : cert.s_values) CHECK(s > 0.0);

        // The roots, each with multiplicity four, are the whole spectrum.
        auto ev = eig_real_sym(channel_correlation_C(b, m_rx));
        std::vector<double> expect;
        for (double lam : cert.lambda_stars) expect.insert(expect.end(), 4, lam);
        std::sort(expect.begin(), expect.end());
        REQUIRE(ev.size() == expect.size());
        for (std::size_t i = 0; i < ev.size(); ++i)
            CHECK(std::abs(ev[i].first - expect[i]) < 1e-8);
    }
    CHECK_THROWS_AS(lemma2_verify(random_coords(8, rng), 2), std::invalid_argument);
}

TEST_CASE("outage_diversity_estimate slope on analytic laws") {
    // Rayleigh power: exponential statistic, unit slope.
    auto expo = [](RngStream& rng) { return std::norm(rng.cnormal()); };
    auto [slope1, curve1] =
        outage_diversity_estimate(expo, {0.01, 0.0316, 0.1}, 300'000, 5);
    CHECK(std::abs(slope1 - 1.0) < 0.05);
    for (const SimPoint& p : curve1.points) {
        CHECK(p.trials == 300'000);
        CHECK(std::abs(p.y - (1.0 - std::exp(-p.x))) < 0.1 * p.y + 1e-4);
    }

    // Minimum of two independent exponentials: still slope one.
    auto min2 = [](RngStream& rng) {
        return std::min(std::norm(rng.cnormal()), std::norm(rng.cnormal()));
    };
    auto [slope2, curve2] =
        outage_diversity_estimate(min2, {0.01, 0.0316, 0.1}, 300'000, 5);
    CHECK(std::abs(slope2 - 1.0) < 0.05);

    // Post-cancellation statistic: Gamma(2,1), slope two.
    auto chi = [](RngStream& rng) {
        std::vector<AlamoutiBlock> h(2), g(2);
        for (auto& b : h) b = {rng.cnormal(), rng.cnormal()};
        for (auto& b : g) b = {rng.cnormal(), rng.cnormal()};
        return chi_square_statistic(h, g);
    };
    auto [slope3, curve3] =
        outage_diversity_estimate(chi, {0.02, 0.06, 0.2}, 1'000'000, 5);
    CHECK(std::abs(slope3 - 1.95) < 0.15);

    // Threads never change the counts.
    auto [slope_t, curve_t] =
        outage_diversity_estimate(expo, {0.01, 0.0316, 0.1}, 300'000, 5, 3);
    CHECK(slope_t == slope1);
    for (std::size_t i = 0; i < curve1.points.size(); ++i)
        CHECK(curve_t.points[i].errors == curve1.points[i].errors);

    try {
        outage_diversity_estimate(expo, {1e-7, 1e-6, 1e-5}, 10'000, 5);
        FAIL("expected a starved-bin error");
    } catch (const std::runtime_error& e) {
        CHECK(std::string(e.what()).find("epsilon") != std::string::npos);
    }
    CHECK_THROWS_AS(outage_diversity_estimate(expo, {0.1, 0.2}, 1000, 5),
                    std::invalid_argument);
}

TEST_CASE("ber_diversity_estimate on synthetic power laws") {
    auto synthetic = [](double order) {
        SimResult r;
        for (double db : {10.0, 15.0, 20.0, 25.0}) {
            SimPoint p;
            p.x = db;
            p.y = 3.0 * std::pow(10.0, -order * db / 10.0);
            p.trials = 1'000'000'000;
            p.errors = 100'000;
            r.points.push_back(p);
        }
        return r;
    };
    CHECK(ber_diversity_estimate(synthetic(2.0), 10.0, 25.0) == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(ber_diversity_estimate(synthetic(4.0), 10.0, 25.0) == doctest::Approx(4.0).epsilon(1e-12));

    SimResult narrow = synthetic(2.0);
    CHECK_THROWS_AS(ber_diversity_estimate(narrow, 10.0, 15.0), std::runtime_error);

    SimResult starved = synthetic(2.0);
    starved.points[1].errors = 10;
    CHECK_THROWS_AS(ber_diversity_estimate(starved, 10.0, 25.0), std::runtime_error);
}

TEST_CASE("ks distance against the Gamma(2,1) law") {
    // Exact quantiles give a tiny distance.
    const std::size_t n = 2000;
    std::vector<double> quantiles(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double target = (static_cast<double>(i) + 0.5) / n;
        double lo = 0.0, hi = 50.0;
        for (int it = 0; it < 200; ++it) {
            const double mid = 0.5 * (lo + hi);
            (gamma21_cdf(mid) < target ? lo : hi) = mid;
        }
        quantiles[i] = 0.5 * (lo + hi);
    }
    CHECK(ks_distance_gamma21(quantiles) < 1e-3);

    // Uniform samples are far from the law.
    RngStream rng(310);
    std::vector<double> uniform(n);
    for (auto& u : uniform) u = rng.uniform();
    CHECK(ks_distance_gamma21(uniform) > 0.2);
    CHECK_THROWS_AS(ks_distance_gamma21({}), std::invalid_argument);
}
