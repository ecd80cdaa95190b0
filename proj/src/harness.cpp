#include "stbcmud/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <locale>
#include <sstream>
#include <thread>

#include "json.hpp"
#include "stbcmud/detect.hpp"
#include "stbcmud/stcodes.hpp"

namespace stbcmud {

using nlohmann::json;

namespace {

constexpr double kDegenerateTol = 1e-12;

// Stream-key domains, so different run kinds never share a trial stream
// (outage_diversity_estimate occupies domain 1).
constexpr std::uint64_t kDomainBer = 2;
constexpr std::uint64_t kDomainVerify = 3;

}  // namespace

void SimConfig::validate() const {
    if (users < 1) throw ConfigError("config field 'users' must be at least 1");
    if (tx_antennas != 2 && tx_antennas != 4) {
        throw ConfigError("config field 'tx_antennas' must be 2 or 4");
    }
    if (rx_antennas < 1) throw ConfigError("config field 'rx_antennas' must be at least 1");
    if (detector != "ml" && detector != "ap" && detector != "ap_whitened_ml") {
        throw ConfigError("config field 'detector' must be ml, ap, or ap_whitened_ml");
    }
    if (detector != "ml" && rx_antennas < users) {
        throw ConfigError("config field 'rx_antennas' must be >= 'users' for ap detectors");
    }
    if (detector == "ml" && tx_antennas != 2) {
        throw ConfigError("config field 'detector': ml is wired for 2 transmit antennas");
    }
    try {
        Constellation::by_name(constellation, rotation);
    } catch (const std::exception&) {
        throw ConfigError("config field 'constellation' is not a known name");
    }
    if (min_errors < 1) throw ConfigError("config field 'min_errors' must be at least 1");
    if (max_trials < 1) throw ConfigError("config field 'max_trials' must be at least 1");
}

SimConfig config_from_json_text(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const std::exception& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    SimConfig cfg;
    try {
        if (j.contains("users")) cfg.users = j.at("users").get<std::size_t>();
        if (j.contains("tx_antennas")) cfg.tx_antennas = j.at("tx_antennas").get<std::size_t>();
        if (j.contains("rx_antennas")) cfg.rx_antennas = j.at("rx_antennas").get<std::size_t>();
        if (j.contains("detector")) cfg.detector = j.at("detector").get<std::string>();
        if (j.contains("constellation")) cfg.constellation = j.at("constellation").get<std::string>();
        if (j.contains("rotation")) cfg.rotation = j.at("rotation").get<double>();
        if (j.contains("snr_grid_db")) cfg.snr_grid_db = j.at("snr_grid_db").get<std::vector<double>>();
        if (j.contains("min_errors")) cfg.min_errors = j.at("min_errors").get<std::uint64_t>();
        if (j.contains("max_trials")) cfg.max_trials = j.at("max_trials").get<std::uint64_t>();
        if (j.contains("seed")) cfg.seed = j.at("seed").get<std::uint64_t>();
        if (j.contains("threads")) cfg.threads = j.at("threads").get<unsigned>();
        if (j.contains("noiseless")) cfg.noiseless = j.at("noiseless").get<bool>();
        if (j.contains("eps_grid")) cfg.eps_grid = j.at("eps_grid").get<std::vector<double>>();
        if (j.contains("samples")) cfg.samples = j.at("samples").get<std::uint64_t>();
    } catch (const ConfigError&) {
        throw;
    } catch (const std::exception& e) {
        throw ConfigError(std::string("config field has wrong type: ") + e.what());
    }
    return cfg;
}

namespace {

json config_to_json(const SimConfig& cfg) {
    return json{{"users", cfg.users},
                {"tx_antennas", cfg.tx_antennas},
                {"rx_antennas", cfg.rx_antennas},
                {"detector", cfg.detector},
                {"constellation", cfg.constellation},
                {"rotation", cfg.rotation},
                {"snr_grid_db", cfg.snr_grid_db},
                {"min_errors", cfg.min_errors},
                {"max_trials", cfg.max_trials},
                {"seed", cfg.seed},
                {"threads", cfg.threads},
                {"noiseless", cfg.noiseless},
                {"eps_grid", cfg.eps_grid},
                {"samples", cfg.samples}};
}

}  // namespace

std::string config_to_json_text(const SimConfig& cfg) { return config_to_json(cfg).dump(2); }

unsigned resolve_threads(unsigned configured) {
    if (configured > 0) return configured;
    if (const char* env = std::getenv("STBC_MUD_THREADS")) {
        const long v = std::strtol(env, nullptr, 10);
        if (v > 0) return static_cast<unsigned>(v);
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw > 0 ? hw : 1;
}

namespace {

struct PointCounts {
    std::uint64_t symbols = 0;
    std::uint64_t errors = 0;
    bool low_confidence = false;
};

/// Runs `fn(rng) -> symbol errors` over trial streams keyed
/// (seed, ber-domain, point, trial).  Trials advance in fixed batches and
/// the stop rule is evaluated only at batch boundaries, so the set of
/// executed trials (hence the counts) does not depend on the thread count.
template <typename TrialFn>
PointCounts run_point(const TrialFn& fn, std::uint64_t seed, std::size_t point_idx,
                      std::uint64_t symbols_per_trial, std::uint64_t min_errors,
                      std::uint64_t max_trials, unsigned threads) {
    constexpr std::uint64_t kBatch = 16384;
    std::uint64_t done = 0;
    std::uint64_t errors = 0;
    while (done < max_trials) {
        const std::uint64_t batch = std::min<std::uint64_t>(kBatch, max_trials - done);
        if (threads <= 1) {
            for (std::uint64_t t = done; t < done + batch; ++t) {
                RngStream rng(seed, kDomainBer, point_idx, t);
                errors += fn(rng);
            }
        } else {
            std::vector<std::uint64_t> part(threads, 0);
            std::vector<std::thread> pool;
            const std::uint64_t chunk = (batch + threads - 1) / threads;
            for (unsigned w = 0; w < threads; ++w) {
                const std::uint64_t lo = done + w * chunk;
                const std::uint64_t hi = std::min(done + batch, lo + chunk);
                if (lo >= hi) break;
                pool.emplace_back([&, w, lo, hi] {
                    std::uint64_t local = 0;
                    for (std::uint64_t t = lo; t < hi; ++t) {
                        RngStream rng(seed, kDomainBer, point_idx, t);
                        local += fn(rng);
                    }
                    part[w] = local;
                });
            }
            for (auto& th : pool) th.join();
            for (std::uint64_t p : part) errors += p;
        }
        done += batch;
        if (errors >= min_errors) break;
    }
    PointCounts out;
    out.symbols = done * symbols_per_trial;
    out.errors = errors;
    out.low_confidence = errors < min_errors;
    return out;
}

std::vector<std::vector<AlamoutiBlock>> draw_alamouti_channels(std::size_t users, std::size_t rx,
                                                               RngStream& rng) {
    while (true) {
        std::vector<std::vector<AlamoutiBlock>> chan(users, std::vector<AlamoutiBlock>(rx));
        bool ok = true;
        for (std::size_t j = 0; j < users; ++j) {
            for (std::size_t m = 0; m < rx; ++m) {
                chan[j][m] = AlamoutiBlock{rng.cnormal(), rng.cnormal()};
                ok = ok && chan[j][m].norm_sq() > kDegenerateTol;
            }
        }
        if (ok) return chan;
    }
}

/// Matched-filter decisions on the cancelled system ignoring the noise
/// correlation (plain Euclidean metric; separable because H^H H is a real
/// scalar times I2).
std::array<std::size_t, 2> unwhitened_decisions(const EquivalentSystem& es,
                                                const Constellation& q) {
    double gamma = 0.0;
    cx w1{0.0, 0.0}, w2{0.0, 0.0};
    for (std::size_t i = 0; i < es.obs.size(); ++i) {
        gamma += es.chan[i].norm_sq();
        auto [x1, x2] = es.chan[i].apply_hermitian(es.obs[i][0], es.obs[i][1]);
        w1 += x1;
        w2 += x2;
    }
    auto pick = [&](cx w) {
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
    };
    return {pick(w1), pick(w2)};
}

std::uint64_t ber_trial_alamouti(const SimConfig& cfg, const Constellation& q, double sigma_sq,
                                 RngStream& rng) {
    const std::size_t users = cfg.users;
    const std::size_t rx = cfg.rx_antennas;
    const auto chan = draw_alamouti_channels(users, rx, rng);
    std::vector<std::array<std::size_t, 2>> idx(users);
    for (auto& pair : idx) pair = {static_cast<std::size_t>(rng.next_u64() % q.size()),
                                   static_cast<std::size_t>(rng.next_u64() % q.size())};
    AlamoutiSystem sys;
    sys.chan = chan;
    sys.obs.assign(rx, {cx{0.0, 0.0}, cx{0.0, 0.0}});
    for (std::size_t m = 0; m < rx; ++m) {
        for (std::size_t j = 0; j < users; ++j) {
            auto [y1, y2] = chan[j][m].apply(q.point(idx[j][0]), q.point(idx[j][1]));
            sys.obs[m][0] += y1;
            sys.obs[m][1] += y2;
        }
        if (!cfg.noiseless) {
            const double scale = std::sqrt(sigma_sq);
            sys.obs[m][0] += rng.cnormal() * scale;
            sys.obs[m][1] += rng.cnormal() * scale;
        }
    }

    std::array<std::size_t, 2> dec{};
    if (cfg.detector == "ml") {
        const Decision d = ml_joint_detect(sys, q);
        dec = {d.indices[0], d.indices[1]};
    } else {
        const EquivalentSystem es = ap_cancel_general(sys, 0, sigma_sq);
        if (cfg.detector == "ap_whitened_ml") {
            const Decision d = whitened_ml_decode_separate(es, q);
            dec = {d.indices[0], d.indices[1]};
        } else {
            dec = unwhitened_decisions(es, q);
        }
    }
    return static_cast<std::uint64_t>(dec[0] != idx[0][0]) +
           static_cast<std::uint64_t>(dec[1] != idx[0][1]);
}

std::uint64_t ber_trial_qostbc(const SimConfig& cfg, const Constellation& q, double sigma_sq,
                               RngStream& rng) {
    const std::size_t users = cfg.users;
    const std::size_t rx = cfg.rx_antennas;
    std::vector<std::vector<std::array<cx, 4>>> chan;
    while (true) {
        chan.assign(users, std::vector<std::array<cx, 4>>(rx));
        bool ok = true;
        for (std::size_t j = 0; j < users; ++j) {
            for (std::size_t m = 0; m < rx; ++m) {
                for (auto& v : chan[j][m]) v = rng.cnormal();
                // Guard the sum/difference branch blocks that get inverted.
                const auto& h = chan[j][m];
                const double np = std::norm(h[0] + h[2]) + std::norm(h[1] + h[3]);
                const double nm = std::norm(h[0] - h[2]) + std::norm(h[1] - h[3]);
                ok = ok && np > kDegenerateTol && nm > kDegenerateTol;
            }
        }
        if (ok) break;
    }
    std::vector<std::array<std::size_t, 4>> idx(users);
    for (auto& v : idx) {
        for (auto& s : v) s = static_cast<std::size_t>(rng.next_u64() % q.size());
    }
    const cx rot = std::polar(1.0, q.rotation);
    std::vector<std::array<cx, 4>> received(rx, {cx{}, cx{}, cx{}, cx{}});
    for (std::size_t j = 0; j < users; ++j) {
        const cx c1 = q.point(idx[j][0]);
        const cx c2 = q.point(idx[j][1]);
        const cx c3 = q.point(idx[j][2]) * rot;
        const cx c4 = q.point(idx[j][3]) * rot;
        for (std::size_t m = 0; m < rx; ++m) {
            const auto& h = chan[j][m];
            received[m][0] += c1 * h[0] + c2 * h[1] + c3 * h[2] + c4 * h[3];
            received[m][1] += -std::conj(c2) * h[0] + std::conj(c1) * h[1] -
                              std::conj(c4) * h[2] + std::conj(c3) * h[3];
            received[m][2] += c3 * h[0] + c4 * h[1] + c1 * h[2] + c2 * h[3];
            received[m][3] += -std::conj(c4) * h[0] + std::conj(c3) * h[1] -
                              std::conj(c2) * h[2] + std::conj(c1) * h[3];
        }
    }
    if (!cfg.noiseless) {
        const double scale = std::sqrt(sigma_sq);
        for (std::size_t m = 0; m < rx; ++m)
            for (auto& v : received[m]) v += rng.cnormal() * scale;
    }
    const Decision d = qostbc_ap_detect(received, chan, 0, q, sigma_sq);
    std::uint64_t errs = 0;
    for (std::size_t k = 0; k < 4; ++k) errs += d.indices[k] != idx[0][k];
    return errs;
}

}  // namespace

RunRecord run_ber(const SimConfig& config) {
    config.validate();
    if (config.snr_grid_db.empty() ||
        !std::is_sorted(config.snr_grid_db.begin(), config.snr_grid_db.end())) {
        throw ConfigError("config field 'snr_grid_db' must be a nonempty ascending grid");
    }
    const auto t0 = std::chrono::steady_clock::now();
    const Constellation q = Constellation::by_name(config.constellation, config.rotation);
    const unsigned threads = resolve_threads(config.threads);

    RunRecord record;
    record.config = config;
    record.result.seed = config.seed;
    record.result.label = config.detector + "-J" + std::to_string(config.users) + "-N" +
                          std::to_string(config.tx_antennas) + "-M" +
                          std::to_string(config.rx_antennas);
    const std::uint64_t symbols_per_trial = config.tx_antennas == 4 ? 4 : 2;
    for (std::size_t p = 0; p < config.snr_grid_db.size(); ++p) {
        const double snr_db = config.snr_grid_db[p];
        const double sigma_sq = 2.0 / std::pow(10.0, snr_db / 10.0);
        PointCounts counts;
        if (config.tx_antennas == 4) {
            counts = run_point(
                [&](RngStream& rng) { return ber_trial_qostbc(config, q, sigma_sq, rng); },
                config.seed, p, symbols_per_trial, config.min_errors, config.max_trials, threads);
        } else {
            counts = run_point(
                [&](RngStream& rng) { return ber_trial_alamouti(config, q, sigma_sq, rng); },
                config.seed, p, symbols_per_trial, config.min_errors, config.max_trials, threads);
        }
        SimPoint pt;
        pt.x = snr_db;
        pt.y = static_cast<double>(counts.errors) / static_cast<double>(counts.symbols);
        pt.trials = counts.symbols;
        pt.errors = counts.errors;
        pt.low_confidence = counts.low_confidence;
        record.result.points.push_back(pt);
    }
    record.wall_time_s =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return record;
}

RunRecord run_outage(const SimConfig& config) {
    config.validate();
    if (config.detector == "ml") {
        throw ConfigError("config field 'detector' must be an ap detector for outage runs");
    }
    if (config.users > 2) {
        throw ConfigError("config field 'users': outage statistic is wired for 1 or 2 users");
    }
    if (config.eps_grid.size() < 3 ||
        !std::is_sorted(config.eps_grid.begin(), config.eps_grid.end())) {
        throw ConfigError("config field 'eps_grid' must be an ascending grid with >= 3 points");
    }
    const auto t0 = std::chrono::steady_clock::now();
    const std::size_t users = config.users;
    const std::size_t rx = config.rx_antennas;
    auto sampler = [users, rx](RngStream& rng) {
        const auto chan = draw_alamouti_channels(users, rx, rng);
        if (users == 1) {
            double nh = 0.0;
            for (const AlamoutiBlock& blk : chan[0]) nh += blk.norm_sq();
            return nh;
        }
        return chi_square_statistic(chan[0], chan[1]);
    };
    auto [slope, curve] = outage_diversity_estimate(sampler, config.eps_grid, config.samples,
                                                    config.seed, resolve_threads(config.threads));
    RunRecord record;
    record.config = config;
    record.result = std::move(curve);
    record.result.label = "outage-J" + std::to_string(users) + "-M" + std::to_string(rx);
    record.result.seed = config.seed;
    record.slope = slope;
    record.wall_time_s =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return record;
}

bool VerifyReport::all_pass() const {
    for (const VerifyEntry& e : entries) {
        if (!e.pass) return false;
    }
    return !entries.empty();
}

namespace {

VerifyEntry below(const std::string& name, double value, double threshold) {
    return {name, value, threshold, value < threshold};
}

VerifyEntry above(const std::string& name, double value, double threshold) {
    return {name, value, threshold, value > threshold};
}

VerifyReport verify_lemma1(std::uint64_t seed) {
    double worst = 0.0;
    for (std::uint64_t i = 0; i < 100000; ++i) {
        RngStream rng(seed, kDomainVerify, 1, i);
        const auto chan = draw_alamouti_channels(2, 2, rng);
        worst = std::max(worst, lemma1_residual(decompose_real(chan[0], chan[1])));
    }
    return {"lemma1", {below("identity max relative residual (1e5 draws)", worst, 1e-10)}};
}

VerifyReport verify_lemma2(std::uint64_t seed) {
    double eig = 0.0, orth = 0.0, diag = 0.0;
    double min_eig = std::numeric_limits<double>::infinity();
    for (std::uint64_t i = 0; i < 2000; ++i) {
        RngStream rng(seed, kDomainVerify, 2, i);
        const std::size_t m = 3 + i % 4;
        std::vector<double> b(4 * m);
        for (double& v : b) v = rng.gaussian();
        const SpectralCertificate cert = lemma2_verify(b, m);
        eig = std::max(eig, cert.eig_residual);
        orth = std::max(orth, cert.orth_residual);
        diag = std::max(diag, cert.diag_residual);
        min_eig = std::min(min_eig, cert.min_eigenvalue);
    }
    return {"lemma2",
            {below("max eigen residual |C u - l* u|", eig, 1e-8),
             below("max orthogonality residual", orth, 1e-8),
             below("max diagonalization residual", diag, 1e-8),
             above("min eigenvalue of C (full rank)", min_eig, 0.0)}};
}

VerifyReport verify_lemma3(std::uint64_t seed) {
    double worst_sub = 0.0;
    double min_gap = std::numeric_limits<double>::infinity();
    std::uint64_t bad_counts = 0;
    for (std::uint64_t i = 0; i < 1000; ++i) {
        RngStream rng(seed, kDomainVerify, 3, i);
        const std::size_t n = 1 + i % 7;
        std::vector<double> betas;
        while (betas.size() < n) {
            const double cand = 0.05 + 0.9 * rng.uniform();
            bool fresh = true;
            for (double b : betas) fresh = fresh && std::abs(b - cand) > 1e-6;
            if (fresh) betas.push_back(cand);
        }
        const std::vector<double> roots = lemma3_roots(betas);
        if (roots.size() != n) ++bad_counts;
        for (double r : roots) {
            double f = 0.0, fp = 0.0;
            for (double b : betas) {
                const double t = r + b - 1.0;
                f += b / t;
                fp += b / (t * t);
            }
            // Scale by the slope: near-pole roots amplify |f - 1| by f',
            // so the meaningful residual is the implied root error.
            worst_sub = std::max(worst_sub, std::abs(f - 1.0) / (1.0 + fp));
        }
        for (std::size_t k = 0; k + 1 < roots.size(); ++k) {
            min_gap = std::min(min_gap, roots[k + 1] - roots[k]);
        }
    }
    return {"lemma3",
            {below("trials with wrong root count", static_cast<double>(bad_counts), 0.5),
             below("max slope-scaled substitution residual", worst_sub, 1e-12),
             above("min root gap", min_gap, 1e-12)}};
}

VerifyReport verify_detc(std::uint64_t seed) {
    double worst = 0.0;
    for (std::uint64_t i = 0; i < 1000; ++i) {
        RngStream rng(seed, kDomainVerify, 4, i);
        std::vector<double> b(12);
        for (double& v : b) v = rng.gaussian();
        const double closed = det_c_closed_form(b, 3);
        const double numeric = det(channel_correlation_C(b, 3)).real();
        worst = std::max(worst, std::abs(closed - numeric) / std::abs(closed));
    }
    return {"detc", {below("closed form vs numeric det, max relative error", worst, 1e-9)}};
}

VerifyReport verify_chisq(std::uint64_t seed) {
    std::vector<double> samples(100000);
    for (std::uint64_t i = 0; i < samples.size(); ++i) {
        RngStream rng(seed, kDomainVerify, 5, i);
        const auto chan = draw_alamouti_channels(2, 2, rng);
        samples[i] = chi_square_statistic(chan[0], chan[1]);
    }
    const double ks = ks_distance_gamma21(std::move(samples));
    return {"chisq", {below("KS distance vs Gamma(2,1) (1e5 draws)", ks, 0.01)}};
}

VerifyReport verify_correlation(std::uint64_t seed) {
    constexpr std::size_t kRx = 3;
    RngStream init(seed, kDomainVerify, 6, 0xb0);
    std::vector<double> b(4 * kRx);
    for (double& v : b) v = init.gaussian();
    const ComplexMat c = channel_correlation_C(b, kRx);

    // Per-block orthogonal basis change that maps the raw quaternion
    // coordinates of the normalized cancelled channel onto the coordinates
    // whose covariance the closed form describes.
    std::vector<ComplexMat> basis;
    for (std::size_t i = 0; i + 1 < kRx; ++i) {
        std::vector<double> group(b.begin() + 4 * (i + 1), b.begin() + 4 * (i + 2));
        double gi = 0.0;
        for (double v : group) gi += v * v;
        basis.push_back(b_pattern(group) * cx{1.0 / std::sqrt(gi), 0.0});
    }
    RealChannelDecomposition fixed;
    fixed.b = b;
    fixed.a.assign(4 * kRx, 0.0);
    const auto g_blocks = compose_real(fixed).second;

    constexpr std::uint64_t kSamples = 1000000;
    double sums[2][2][4][4] = {};
    for (std::uint64_t t = 0; t < kSamples; ++t) {
        RngStream rng(seed, kDomainVerify, 6, t + 1);
        RealChannelDecomposition d;
        d.b = b;
        d.a.resize(4 * kRx);
        for (double& v : d.a) v = rng.gaussian() * 0.70710678118654752440;
        const auto h_blocks = compose_real(d).first;
        const AlamoutiBlock base = alamouti_inverse(g_blocks[0]) * h_blocks[0];
        double avec[2][4];
        for (std::size_t i = 0; i + 1 < kRx; ++i) {
            const AlamoutiBlock heq = alamouti_inverse(g_blocks[i + 1]) * h_blocks[i + 1] - base;
            const double var =
                0.5 * (1.0 / g_blocks[i + 1].norm_sq() + 1.0 / g_blocks[0].norm_sq());
            const double raw[4] = {heq.a.real(), heq.a.imag(), heq.b.real(), heq.b.imag()};
            for (std::size_t r = 0; r < 4; ++r) {
                double acc = 0.0;
                for (std::size_t s = 0; s < 4; ++s) acc += basis[i](r, s).real() * raw[s];
                avec[i][r] = acc / std::sqrt(var);
            }
        }
        for (std::size_t i = 0; i < 2; ++i)
            for (std::size_t j = 0; j < 2; ++j)
                for (std::size_t r = 0; r < 4; ++r)
                    for (std::size_t s = 0; s < 4; ++s) sums[i][j][r][s] += avec[i][r] * avec[j][s];
    }
    double worst = 0.0;
    for (std::size_t i = 0; i < 2; ++i) {
        for (std::size_t j = 0; j < 2; ++j) {
            for (std::size_t r = 0; r < 4; ++r) {
                for (std::size_t s = 0; s < 4; ++s) {
                    const double emp = sums[i][j][r][s] / static_cast<double>(kSamples);
                    const double expect = c(4 * i + r, 4 * j + s).real();
                    worst = std::max(worst, std::abs(emp - expect));
                }
            }
        }
    }
    return {"correlation",
            {below("Monte Carlo vs closed-form correlation, max entry error (1e6 draws)", worst,
                   0.01)}};
}

VerifyReport verify_separability(std::uint64_t seed) {
    const Constellation q = Constellation::by_name("qpsk", 0.0);
    const double sigma_sq = 2.0 / std::pow(10.0, 1.0);
    std::uint64_t mismatches = 0;
    for (std::uint64_t i = 0; i < 10000; ++i) {
        RngStream rng(seed, kDomainVerify, 7, i);
        const auto chan = draw_alamouti_channels(2, 3, rng);
        AlamoutiSystem sys;
        sys.chan = chan;
        sys.obs.assign(3, {cx{0.0, 0.0}, cx{0.0, 0.0}});
        const double scale = std::sqrt(sigma_sq);
        std::array<std::array<cx, 2>, 2> syms;
        for (auto& pair : syms) {
            pair = {q.point(rng.next_u64() % 4), q.point(rng.next_u64() % 4)};
        }
        for (std::size_t m = 0; m < 3; ++m) {
            for (std::size_t j = 0; j < 2; ++j) {
                auto [y1, y2] = chan[j][m].apply(syms[j][0], syms[j][1]);
                sys.obs[m][0] += y1;
                sys.obs[m][1] += y2;
            }
            sys.obs[m][0] += rng.cnormal() * scale;
            sys.obs[m][1] += rng.cnormal() * scale;
        }
        const EquivalentSystem es = ap_cancel_general(sys, 0, sigma_sq);
        const Decision joint = whitened_ml_decode(es, q);
        const Decision sep = whitened_ml_decode_separate(es, q);
        if (joint.indices != sep.indices) ++mismatches;
    }

    // Structure of the inverse covariance: real multiples of I2 per block.
    double structure = 0.0;
    for (std::uint64_t i = 0; i < 1000; ++i) {
        RngStream rng(seed, kDomainVerify, 7, 20000 + i);
        const auto g = draw_alamouti_channels(1, 3, rng)[0];
        std::vector<std::vector<AlamoutiBlock>> cov(2, std::vector<AlamoutiBlock>(2));
        const double pivot = sigma_sq / g[0].norm_sq();
        for (std::size_t r = 0; r < 2; ++r) {
            for (std::size_t s = 0; s < 2; ++s) {
                const double v = (r == s) ? pivot + sigma_sq / g[r + 1].norm_sq() : pivot;
                cov[r][s] = AlamoutiBlock{cx{v, 0.0}, cx{0.0, 0.0}};
            }
        }
        const auto cinv = block_inverse_hermitian(cov);
        for (std::size_t r = 0; r < 2; ++r) {
            for (std::size_t s = 0; s < 2; ++s) {
                structure = std::max(structure, std::abs(cinv[r][s].a.imag()));
                structure = std::max(structure, std::abs(cinv[r][s].b));
            }
        }
    }
    return {"separability",
            {below("joint vs per-symbol decision mismatches (1e4 trials)",
                   static_cast<double>(mismatches), 0.5),
             below("inverse covariance block imaginary part", structure, 1e-12)}};
}

VerifyReport verify_roundtrip(std::uint64_t seed) {
    const Constellation q = Constellation::by_name("qpsk", 0.78539816339744830961);
    double worst = 0.0;
    for (std::uint64_t i = 0; i < 10000; ++i) {
        RngStream rng(seed, kDomainVerify, 8, i);
        std::array<cx, 4> h;
        for (auto& v : h) v = rng.cnormal();
        std::vector<std::size_t> idx(4);
        for (auto& s : idx) s = rng.next_u64() % 4;
        const ComplexMat code = qostbc_encode(make_symbol_vector(q, idx, 0), q.rotation);
        std::array<cx, 4> r{};
        for (std::size_t t = 0; t < 4; ++t)
            for (std::size_t n = 0; n < 4; ++n) r[t] += code(t, n) * h[n];

        const auto [plus, minus] = qostbc_split(r, h);
        const ComplexMat merged = qostbc_merge(plus.chan, minus.chan);
        for (std::size_t n = 0; n < 4; ++n) worst = std::max(worst, std::abs(merged(n, 0) - h[n]));
        // Reverse the sum/difference of the observations back to time slots.
        const cx r1 = (plus.obs[0] + minus.obs[0]) * 0.5;
        const cx r3 = (plus.obs[0] - minus.obs[0]) * 0.5;
        const cx r2 = -std::conj((plus.obs[1] + minus.obs[1]) * 0.5);
        const cx r4 = -std::conj((plus.obs[1] - minus.obs[1]) * 0.5);
        worst = std::max({worst, std::abs(r1 - r[0]), std::abs(r2 - r[1]), std::abs(r3 - r[2]),
                          std::abs(r4 - r[3])});
    }
    return {"roundtrip",
            {below("split/merge reconstruction residual (1e4 draws)", worst, 1e-12)}};
}

}  // namespace

VerifyReport run_verify(const std::string& suite, std::uint64_t seed, unsigned threads) {
    (void)threads;  // suites are cheap enough to run single-threaded
    if (suite == "lemma1") return verify_lemma1(seed);
    if (suite == "lemma2") return verify_lemma2(seed);
    if (suite == "lemma3") return verify_lemma3(seed);
    if (suite == "detc") return verify_detc(seed);
    if (suite == "chisq") return verify_chisq(seed);
    if (suite == "correlation") return verify_correlation(seed);
    if (suite == "separability") return verify_separability(seed);
    if (suite == "roundtrip") return verify_roundtrip(seed);
    throw ConfigError("unknown verify suite: " + suite);
}

namespace {

std::string format_double(double v) {
    std::ostringstream os;
    os.imbue(std::locale::classic());
    os.precision(17);
    os << v;
    return os.str();
}

}  // namespace

std::string record_to_csv(const RunRecord& record) {
    std::string out = "x,y,trials,errors,label,seed\n";
    for (const SimPoint& p : record.result.points) {
        out += format_double(p.x) + "," + format_double(p.y) + "," + std::to_string(p.trials) +
               "," + std::to_string(p.errors) + "," + record.result.label + "," +
               std::to_string(record.result.seed) + "\n";
    }
    return out;
}

std::string record_to_json_text(const RunRecord& record) {
    json points = json::array();
    for (const SimPoint& p : record.result.points) {
        points.push_back(json{{"x", p.x},
                              {"y", p.y},
                              {"trials", p.trials},
                              {"errors", p.errors},
                              {"low_confidence", p.low_confidence}});
    }
    json j{{"config", config_to_json(record.config)},
           {"result", json{{"label", record.result.label},
                           {"seed", record.result.seed},
                           {"points", points}}},
           {"slope", record.slope},
           {"wall_time_s", record.wall_time_s},
           {"version", record.version}};
    return j.dump(2);
}

RunRecord record_from_json_text(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const std::exception& e) {
        throw ConfigError(std::string("record is not valid JSON: ") + e.what());
    }
    RunRecord record;
    try {
        record.config = config_from_json_text(j.at("config").dump());
        const json& res = j.at("result");
        record.result.label = res.at("label").get<std::string>();
        record.result.seed = res.at("seed").get<std::uint64_t>();
        for (const json& jp : res.at("points")) {
            SimPoint p;
            p.x = jp.at("x").get<double>();
            p.y = jp.at("y").get<double>();
            p.trials = jp.at("trials").get<std::uint64_t>();
            p.errors = jp.at("errors").get<std::uint64_t>();
            p.low_confidence = jp.at("low_confidence").get<bool>();
            record.result.points.push_back(p);
        }
        record.slope = j.at("slope").get<double>();
        record.wall_time_s = j.at("wall_time_s").get<double>();
        record.version = j.at("version").get<std::string>();
    } catch (const ConfigError&) {
        throw;
    } catch (const std::exception& e) {
        throw ConfigError(std::string("record field missing or mistyped: ") + e.what());
    }
    return record;
}

void export_record(const RunRecord& record, const std::string& path, const std::string& format) {
    std::string payload;
    if (format == "csv") {
        payload = record_to_csv(record);
    } else if (format == "json") {
        payload = record_to_json_text(record);
    } else {
        throw ConfigError("format must be csv or json");
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open output file: " + path);
    out << payload;
    if (!out) throw std::runtime_error("failed writing output file: " + path);
}

}  // namespace stbcmud
