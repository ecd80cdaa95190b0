#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>

#include "doctest.h"
#include "stbcmud/harness.hpp"

using namespace stbcmud;

namespace {

SimConfig small_ber_config() {
    SimConfig cfg;
    cfg.users = 2;
    cfg.rx_antennas = 2;
    cfg.detector = "ap";
    cfg.snr_grid_db = {10.0};
    cfg.min_errors = 50;
    cfg.max_trials = 100'000;
    cfg.seed = 42;
    cfg.threads = 1;
    return cfg;
}

std::string expect_config_error(const std::function<void()>& fn) {
    try {
        fn();
    } catch (const ConfigError& e) {
        return e.what();
    }
    FAIL("expected a ConfigError");
    return {};
}

}  // namespace

TEST_CASE("config json round trip keeps every field") {
    SimConfig cfg = small_ber_config();
    cfg.detector = "ap_whitened_ml";
    cfg.constellation = "qam16";
    cfg.rotation = 0.3;
    cfg.noiseless = true;
    cfg.eps_grid = {0.1, 0.2, 0.4};
    cfg.samples = 777;
    SimConfig back = config_from_json_text(config_to_json_text(cfg));
    CHECK(back.users == cfg.users);
    CHECK(back.tx_antennas == cfg.tx_antennas);
    CHECK(back.rx_antennas == cfg.rx_antennas);
    CHECK(back.detector == cfg.detector);
    CHECK(back.constellation == cfg.constellation);
    CHECK(back.rotation == cfg.rotation);
    CHECK(back.snr_grid_db == cfg.snr_grid_db);
    CHECK(back.min_errors == cfg.min_errors);
    CHECK(back.max_trials == cfg.max_trials);
    CHECK(back.seed == cfg.seed);
    CHECK(back.threads == cfg.threads);
    CHECK(back.noiseless == cfg.noiseless);
    CHECK(back.eps_grid == cfg.eps_grid);
    CHECK(back.samples == cfg.samples);

    // Missing fields fall back to defaults; junk is a config error.
    SimConfig defaults = config_from_json_text("{}");
    CHECK(defaults.detector == "ap");
    CHECK(defaults.users == 2);
    CHECK_THROWS_AS(config_from_json_text("not json"), ConfigError);
    CHECK_THROWS_AS(config_from_json_text(R"({"users": "two"})"), ConfigError);
}

TEST_CASE("config validation names the offending field") {
    auto broken = [&](auto mutate) {
        SimConfig cfg = small_ber_config();
        mutate(cfg);
        return expect_config_error([&] { cfg.validate(); });
    };
    CHECK(broken([](SimConfig& c) { c.detector = "zf"; }).find("detector") != std::string::npos);
    CHECK(broken([](SimConfig& c) { c.tx_antennas = 3; }).find("tx_antennas") !=
          std::string::npos);
    CHECK(broken([](SimConfig& c) { c.rx_antennas = 1; }).find("rx_antennas") !=
          std::string::npos);
    CHECK(broken([](SimConfig& c) { c.constellation = "psk8"; }).find("constellation") !=
          std::string::npos);
    CHECK(broken([](SimConfig& c) {
              c.detector = "ml";
              c.tx_antennas = 4;
          }).find("detector") != std::string::npos);
    CHECK(broken([](SimConfig& c) { c.min_errors = 0; }).find("min_errors") != std::string::npos);

    SimConfig no_grid = small_ber_config();
    no_grid.snr_grid_db.clear();
    CHECK(expect_config_error([&] { run_ber(no_grid); }).find("snr_grid_db") !=
          std::string::npos);

    SimConfig ml_outage = small_ber_config();
    ml_outage.detector = "ml";
    ml_outage.eps_grid = {0.01, 0.1, 1.0};
    CHECK(expect_config_error([&] { run_outage(ml_outage); }).find("detector") !=
          std::string::npos);

    SimConfig bad_eps = small_ber_config();
    bad_eps.eps_grid = {0.1, 0.01};
    CHECK(expect_config_error([&] { run_outage(bad_eps); }).find("eps_grid") !=
          std::string::npos);
}

TEST_CASE("run_ber is deterministic and thread-count invariant") {
    SimConfig cfg = small_ber_config();
    RunRecord a = run_ber(cfg);
    RunRecord b = run_ber(cfg);
    REQUIRE(a.result.points.size() == 1);
    CHECK(a.result.points[0].errors == b.result.points[0].errors);
    CHECK(a.result.points[0].trials == b.result.points[0].trials);
    CHECK(a.result.points[0].errors > 0);
    CHECK(a.result.label == "ap-J2-N2-M2");

    cfg.threads = 3;
    RunRecord c = run_ber(cfg);
    CHECK(c.result.points[0].errors == a.result.points[0].errors);
    CHECK(c.result.points[0].trials == a.result.points[0].trials);

    // A different seed gives a different trajectory.
    cfg.threads = 1;
    cfg.seed = 43;
    RunRecord d = run_ber(cfg);
    CHECK(d.result.points[0].errors != a.result.points[0].errors);
}

TEST_CASE("run_ber stop rule and noiseless floor") {
    SimConfig cfg = small_ber_config();
    cfg.max_trials = 512;
    cfg.min_errors = 1'000'000;
    RunRecord capped = run_ber(cfg);
    CHECK(capped.result.points[0].trials == 512 * 2);
    CHECK(capped.result.points[0].low_confidence);

    cfg = small_ber_config();
    cfg.noiseless = true;
    cfg.max_trials = 2000;
    cfg.min_errors = 1;
    RunRecord clean = run_ber(cfg);
    CHECK(clean.result.points[0].errors == 0);
    CHECK(clean.result.points[0].y == 0.0);
    CHECK(clean.result.points[0].low_confidence);
}

TEST_CASE("ml beats the cancellation detector at moderate snr") {
    SimConfig cfg = small_ber_config();
    cfg.snr_grid_db = {10.0};
    cfg.min_errors = 400;
    cfg.max_trials = 2'000'000;
    RunRecord ap = run_ber(cfg);
    cfg.detector = "ml";
    RunRecord ml = run_ber(cfg);
    CHECK(ml.result.points[0].y <= ap.result.points[0].y);
}

TEST_CASE("run_outage slope for the two-user statistic") {
    SimConfig cfg;
    cfg.users = 2;
    cfg.rx_antennas = 2;
    cfg.detector = "ap";
    cfg.eps_grid = {0.02, 0.06, 0.2};
    cfg.samples = 1'000'000;
    cfg.seed = 9;
    cfg.threads = 1;
    RunRecord rec = run_outage(cfg);
    CHECK(std::abs(rec.slope - 1.95) < 0.15);
    CHECK(rec.result.label == "outage-J2-M2");
    REQUIRE(rec.result.points.size() == 3);
    for (const SimPoint& p : rec.result.points) CHECK(p.errors >= 100);
}

TEST_CASE("verify suites run and pass on the default seed") {
    for (const char* suite : {"lemma3", "detc"}) {
        VerifyReport r = run_verify(suite);
        CHECK(r.suite == suite);
        CHECK(r.all_pass());
    }
    CHECK_THROWS_AS(run_verify("nonsense"), ConfigError);
}

TEST_CASE("csv export format") {
    RunRecord rec;
    rec.result.label = "ap-J2-N2-M2";
    rec.result.seed = 7;
    CHECK(record_to_csv(rec) == "x,y,trials,errors,label,seed\n");

    SimPoint p;
    p.x = 15.0;
    p.y = 0.03125;
    p.trials = 6400;
    p.errors = 200;
    rec.result.points.push_back(p);
    const std::string csv = record_to_csv(rec);
    std::istringstream lines(csv);
    std::string header, row;
    std::getline(lines, header);
    std::getline(lines, row);
    CHECK(header == "x,y,trials,errors,label,seed");
    CHECK(row == "15,0.03125,6400,200,ap-J2-N2-M2,7");
}

TEST_CASE("record json round trip") {
    SimConfig cfg = small_ber_config();
    cfg.max_trials = 20'000;
    RunRecord rec = run_ber(cfg);
    RunRecord back = record_from_json_text(record_to_json_text(rec));
    CHECK(back.result.label == rec.result.label);
    CHECK(back.result.seed == rec.result.seed);
    CHECK(back.version == rec.version);
    CHECK(back.slope == rec.slope);
    REQUIRE(back.result.points.size() == rec.result.points.size());
    for (std::size_t i = 0; i < rec.result.points.size(); ++i) {
        CHECK(back.result.points[i].x == rec.result.points[i].x);
        CHECK(back.result.points[i].y == rec.result.points[i].y);
        CHECK(back.result.points[i].trials == rec.result.points[i].trials);
        CHECK(back.result.points[i].errors == rec.result.points[i].errors);
    }
    CHECK(back.config.detector == rec.config.detector);
    CHECK_THROWS_AS(record_from_json_text("{}"), ConfigError);
}

TEST_CASE("export_record writes both formats") {
    RunRecord rec;
    rec.result.label = "outage-J2-M2";
    rec.result.seed = 3;
    SimPoint p;
    p.x = 0.1;
    p.y = 0.004;
    p.trials = 1000;
    p.errors = 4;
    rec.result.points.push_back(p);

    const std::string csv_path = "test_export_tmp.csv";
    const std::string json_path = "test_export_tmp.json";
    export_record(rec, csv_path, "csv");
    export_record(rec, json_path, "json");

    std::ifstream csv_in(csv_path);
    std::string first;
    std::getline(csv_in, first);
    CHECK(first == "x,y,trials,errors,label,seed");

    std::ifstream json_in(json_path);
    std::stringstream buf;
    buf << json_in.rdbuf();
    RunRecord back = record_from_json_text(buf.str());
    CHECK(back.result.points.size() == 1);
    CHECK(back.result.points[0].errors == 4);

    std::remove(csv_path.c_str());
    std::remove(json_path.c_str());
    CHECK_THROWS_AS(export_record(rec, csv_path, "xml"), ConfigError);
}

TEST_CASE("qostbc ber runs end to end") {
    SimConfig cfg;
    cfg.users = 2;
    cfg.tx_antennas = 4;
    cfg.rx_antennas = 2;
    cfg.detector = "ap";
    cfg.constellation = "qpsk";
    cfg.snr_grid_db = {12.0};
    cfg.min_errors = 30;
    cfg.max_trials = 200'000;
    cfg.seed = 5;
    cfg.threads = 1;
    RunRecord rec = run_ber(cfg);
    CHECK(rec.result.label == "ap-J2-N4-M2");
    CHECK(rec.result.points[0].errors >= 30);

    cfg.noiseless = true;
    cfg.max_trials = 500;
    cfg.min_errors = 1;
    RunRecord clean = run_ber(cfg);
    CHECK(clean.result.points[0].errors == 0);
}
