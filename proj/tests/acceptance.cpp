// End-to-end acceptance gate.  Prints one PASS/FAIL line per criterion and
// exits nonzero when any of them fails.  The heavy Monte Carlo settings live
// here rather than in the unit tests.

#include <cmath>
#include <cstdio>
#include <iostream>
#include <sstream>
#include <string>

#include "stbcmud/analysis.hpp"
#include "stbcmud/harness.hpp"

using namespace stbcmud;

namespace {

int failures = 0;

void report(int criterion, bool ok, const std::string& detail) {
    if (!ok) ++failures;
    std::cout << (ok ? "PASS" : "FAIL") << " criterion " << criterion << ": " << detail
              << std::endl;
}

std::string fmt(double v) {
    std::ostringstream os;
    os.precision(4);
    os << v;
    return os.str();
}

bool suite_passes(const std::string& name, std::string& detail) {
    const VerifyReport r = run_verify(name, 1);
    std::ostringstream os;
    for (const VerifyEntry& e : r.entries) {
        os << e.name << " = " << fmt(e.value) << " (threshold " << fmt(e.threshold) << "); ";
    }
    detail = os.str();
    return r.all_pass();
}

SimConfig base_ber(const std::string& detector, std::size_t rx, std::vector<double> grid,
                   std::uint64_t min_errors, std::uint64_t max_trials, std::uint64_t seed) {
    SimConfig cfg;
    cfg.users = 2;
    cfg.tx_antennas = 2;
    cfg.rx_antennas = rx;
    cfg.detector = detector;
    cfg.snr_grid_db = std::move(grid);
    cfg.min_errors = min_errors;
    cfg.max_trials = max_trials;
    cfg.seed = seed;
    cfg.threads = 0;
    return cfg;
}

void criterion_1_lemma1() {
    std::string detail;
    const bool ok = suite_passes("lemma1", detail);
    report(1, ok, "cancellation-numerator identity; " + detail);
}

void criterion_2_chisq() {
    std::string detail;
    const bool ok = suite_passes("chisq", detail);
    report(2, ok, "post-cancellation statistic matches Gamma(2,1); " + detail);
}

void criterion_3_outage() {
    SimConfig cfg;
    cfg.users = 2;
    cfg.rx_antennas = 2;
    cfg.detector = "ap";
    cfg.eps_grid = {1e-2, std::pow(10.0, -1.5), 1e-1};
    cfg.samples = 10'000'000;
    cfg.seed = 7;
    cfg.threads = 0;
    const RunRecord rec = run_outage(cfg);
    const bool ok = std::abs(rec.slope - 2.0) <= 0.1;
    report(3, ok, "outage diversity slope = " + fmt(rec.slope) + " (target 2 +- 0.1)");
}

void criterion_4_ap_ber() {
    const RunRecord m2 =
        run_ber(base_ber("ap", 2, {15.0, 20.0, 25.0, 30.0}, 120, 200'000'000, 11));
    const double slope_m2 = ber_diversity_estimate(m2.result, 15.0, 30.0);
    const bool ok_m2 = std::abs(slope_m2 - 2.0) <= 0.5;

    const RunRecord m3 =
        run_ber(base_ber("ap_whitened_ml", 3, {15.0, 17.5, 20.0}, 110, 400'000'000, 12));
    const double slope_m3 = ber_diversity_estimate(m3.result, 15.0, 30.0);
    const bool ok_m3 = std::abs(slope_m3 - 4.0) <= 1.0;

    report(4, ok_m2 && ok_m3,
           "cancellation BER slopes: M=2 slope = " + fmt(slope_m2) +
               " (target 2 +- 0.5), M=3 slope = " + fmt(slope_m3) + " (target 4 +- 1)");
}

void criterion_5_ml() {
    const RunRecord ml = run_ber(base_ber("ml", 2, {10.0, 12.5, 15.0}, 150, 100'000'000, 13));
    const double slope = ber_diversity_estimate(ml.result, 5.0, 15.0);
    bool ok = std::abs(slope - 4.0) <= 1.0;

    const RunRecord ap = run_ber(base_ber("ap", 2, {10.0, 12.5, 15.0}, 150, 100'000'000, 14));
    std::string cmp;
    for (std::size_t i = 0; i < ml.result.points.size(); ++i) {
        const SimPoint& pm = ml.result.points[i];
        const SimPoint& pa = ap.result.points[i];
        const double ml_hw = 1.96 * std::sqrt(pm.y * (1.0 - pm.y) / pm.trials);
        const double ap_hw = 1.96 * std::sqrt(pa.y * (1.0 - pa.y) / pa.trials);
        const bool ordered = pm.y <= pa.y;
        const bool separated = (pm.errors < 100 || pa.errors < 100) ||
                               pm.y + ml_hw < pa.y - ap_hw;
        ok = ok && ordered && separated;
        cmp += " " + fmt(pm.x) + "dB ml=" + fmt(pm.y) + " ap=" + fmt(pa.y) + ";";
    }
    report(5, ok, "joint ML slope = " + fmt(slope) + " (target 4 +- 1), ML <= AP with separated "
                  "95% intervals at:" + cmp);
}

void criterion_6_qostbc() {
    SimConfig clean;
    clean.users = 2;
    clean.tx_antennas = 4;
    clean.rx_antennas = 2;
    clean.detector = "ap";
    clean.snr_grid_db = {20.0};
    clean.noiseless = true;
    clean.min_errors = 1;
    clean.max_trials = 1000;
    clean.seed = 15;
    clean.threads = 0;
    const RunRecord noiseless = run_ber(clean);
    const bool exact = noiseless.result.points[0].errors == 0;

    SimConfig cfg = base_ber("ap", 2, {10.0, 12.5, 15.0, 17.5}, 120, 200'000'000, 16);
    cfg.tx_antennas = 4;
    const RunRecord rec = run_ber(cfg);
    const double slope = ber_diversity_estimate(rec.result, 10.0, 20.0);
    const bool ok_slope = std::abs(slope - 4.0) <= 1.0;
    report(6, exact && ok_slope,
           "quasi-orthogonal pipeline: noiseless errors = " +
               std::to_string(noiseless.result.points[0].errors) + " (target 0), BER slope = " +
               fmt(slope) + " (target 4 +- 1)");
}

void criterion_7_spectral() {
    double eig = 0.0, orth = 0.0, diag = 0.0, min_eig = 1e300, worst_sub = 0.0;
    std::uint64_t bad_roots = 0;
    for (std::uint64_t i = 0; i < 10'000; ++i) {
        RngStream rng(1, 9, 70, i);
        const std::size_t m = 3 + i % 6;
        std::vector<double> b(4 * m);
        for (double& v : b) v = rng.gaussian();
        const SpectralCertificate cert = lemma2_verify(b, m);
        eig = std::max(eig, cert.eig_residual);
        orth = std::max(orth, cert.orth_residual);
        diag = std::max(diag, cert.diag_residual);
        min_eig = std::min(min_eig, cert.min_eigenvalue);
        if (cert.lambda_stars.size() != m - 1) ++bad_roots;
        for (double r : cert.lambda_stars) {
            double f = 0.0, fp = 0.0;
            for (double beta : cert.betas) {
                const double u = r + beta - 1.0;
                f += beta / u;
                fp += beta / (u * u);
            }
            worst_sub = std::max(worst_sub, std::abs(f - 1.0) / (1.0 + fp));
        }
    }
    const bool ok = eig < 1e-8 && orth < 1e-8 && diag < 1e-8 && min_eig > 0.0 &&
                    bad_roots == 0 && worst_sub < 1e-9;
    report(7, ok,
           "spectral certificates over 1e4 draws (M = 3..8): eig = " + fmt(eig) + ", orth = " +
               fmt(orth) + ", diag = " + fmt(diag) + ", min eigenvalue = " + fmt(min_eig) +
               ", root residual = " + fmt(worst_sub));
}

void criterion_8_detc() {
    std::string detail;
    const bool ok = suite_passes("detc", detail);
    report(8, ok, "determinant closed form; " + detail);
}

void criterion_9_separability() {
    std::string detail;
    const bool ok = suite_passes("separability", detail);
    report(9, ok, "whitened metric separability; " + detail);
}

void criterion_10_roundtrip() {
    std::string detail;
    const bool ok = suite_passes("roundtrip", detail);
    report(10, ok, "sum/difference conversion round trip; " + detail);
}

void criterion_11_determinism() {
    SimConfig cfg = base_ber("ap", 2, {15.0}, 150, 10'000'000, 21);
    bool ok = true;
    std::string detail = "ber errors/trials per thread count:";
    std::uint64_t ref_err = 0, ref_tr = 0;
    for (unsigned threads : {1u, 4u, 8u}) {
        cfg.threads = threads;
        const RunRecord rec = run_ber(cfg);
        const SimPoint& p = rec.result.points[0];
        if (threads == 1) {
            ref_err = p.errors;
            ref_tr = p.trials;
        }
        ok = ok && p.errors == ref_err && p.trials == ref_tr;
        detail += " " + std::to_string(threads) + "t=" + std::to_string(p.errors) + "/" +
                  std::to_string(p.trials) + ";";
    }

    SimConfig out;
    out.users = 2;
    out.rx_antennas = 2;
    out.detector = "ap";
    out.eps_grid = {0.05, 0.15, 0.4};
    out.samples = 100'000;
    out.seed = 22;
    std::vector<std::uint64_t> ref;
    for (unsigned threads : {1u, 4u, 8u}) {
        out.threads = threads;
        const RunRecord rec = run_outage(out);
        std::vector<std::uint64_t> counts;
        for (const SimPoint& p : rec.result.points) counts.push_back(p.errors);
        if (threads == 1) {
            ref = counts;
        } else {
            ok = ok && counts == ref;
        }
    }
    detail += " outage counts match across 1/4/8 threads: " + std::string(ok ? "yes" : "no");
    report(11, ok, detail);
}

}  // namespace

int main() {
    criterion_1_lemma1();
    criterion_2_chisq();
    criterion_3_outage();
    criterion_4_ap_ber();
    criterion_5_ml();
    criterion_6_qostbc();
    criterion_7_spectral();
    criterion_8_detc();
    criterion_9_separability();
    criterion_10_roundtrip();
    criterion_11_determinism();
    return failures == 0 ? 0 : 1;
}
