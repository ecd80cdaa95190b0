#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "stbcmud/analysis.hpp"

namespace stbcmud {

inline constexpr const char* kVersion = "0.1.0";

/// Raised on malformed or inconsistent configuration; message names the
/// offending field.  Mapped to exit code 2 by the CLI.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct SimConfig {
    std::size_t users = 2;
    std::size_t tx_antennas = 2;
    std::size_t rx_antennas = 2;
    std::string detector = "ap";  // ml | ap | ap_whitened_ml
    std::string constellation = "qpsk";
    double rotation = 0.78539816339744830961;  // pi/4, applied to c3, c4
    std::vector<double> snr_grid_db;
    std::uint64_t min_errors = 100;
    std::uint64_t max_trials = 10'000'000;
    std::uint64_t seed = 1;
    unsigned threads = 0;  // 0: STBC_MUD_THREADS or hardware count
    bool noiseless = false;
    // Outage estimation only:
    std::vector<double> eps_grid;
    std::uint64_t samples = 1'000'000;

    void validate() const;
};

SimConfig config_from_json_text(const std::string& text);
std::string config_to_json_text(const SimConfig& cfg);

struct RunRecord {
    SimConfig config;
    SimResult result;
    double slope = 0.0;  // outage runs only
    double wall_time_s = 0.0;
    std::string version = kVersion;
};

/// Effective worker count: explicit value, else STBC_MUD_THREADS, else the
/// hardware concurrency.
unsigned resolve_threads(unsigned configured);

/// Symbol-error-rate curve over the configured SNR grid.  Per point, trials
/// run in fixed-size batches until the stop rule is met; counts are
/// independent of the thread count.
RunRecord run_ber(const SimConfig& config);

/// Empirical outage curve of the post-cancellation SNR statistic over the
/// configured epsilon grid, plus the fitted log-log slope.
RunRecord run_outage(const SimConfig& config);

struct VerifyEntry {
    std::string name;
    double value = 0.0;
    double threshold = 0.0;
    bool pass = false;
};

struct VerifyReport {
    std::string suite;
    std::vector<VerifyEntry> entries;
    bool all_pass() const;
};

/// Property suites: lemma1, lemma2, lemma3, detc, chisq, correlation,
/// separability, roundtrip.
VerifyReport run_verify(const std::string& suite, std::uint64_t seed = 1, unsigned threads = 0);

std::string record_to_csv(const RunRecord& record);
std::string record_to_json_text(const RunRecord& record);
RunRecord record_from_json_text(const std::string& text);

/// Writes the record to path in the requested format ("csv" or "json").
void export_record(const RunRecord& record, const std::string& path, const std::string& format);

}  // namespace stbcmud
