#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "stbcmud/harness.hpp"

namespace {

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw stbcmud::ConfigError("cannot read config file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

struct CommonFlags {
    std::string config_path;
    std::uint64_t seed = 0;
    bool seed_set = false;
    unsigned threads = 0;
    bool threads_set = false;
    std::string format = "csv";
    std::string out_path;
};

void add_common(CLI::App* cmd, CommonFlags& flags, bool config_required) {
    auto* copt = cmd->add_option("--config", flags.config_path, "JSON config file");
    if (config_required) copt->required();
    cmd->add_option("--seed", flags.seed, "master seed override")
        ->each([&](const std::string&) { flags.seed_set = true; });
    cmd->add_option("--threads", flags.threads, "worker thread count override")
        ->each([&](const std::string&) { flags.threads_set = true; });
    cmd->add_option("--format", flags.format, "output format")
        ->check(CLI::IsMember({"csv", "json"}));
    cmd->add_option("--out", flags.out_path, "output file (default: stdout)");
}

stbcmud::SimConfig load_config(const CommonFlags& flags) {
    stbcmud::SimConfig cfg = stbcmud::config_from_json_text(read_file(flags.config_path));
    if (flags.seed_set) cfg.seed = flags.seed;
    if (flags.threads_set) cfg.threads = flags.threads;
    return cfg;
}

int emit(const stbcmud::RunRecord& record, const CommonFlags& flags) {
    if (!flags.out_path.empty()) {
        stbcmud::export_record(record, flags.out_path, flags.format);
    } else if (flags.format == "csv") {
        std::cout << stbcmud::record_to_csv(record);
    } else {
        std::cout << stbcmud::record_to_json_text(record) << "\n";
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Multi-user space-time-block-code detection simulator and verifier"};
    app.require_subcommand(1);

    CommonFlags ber_flags, outage_flags, verify_flags, export_flags;
    std::string suite;

    CLI::App* ber = app.add_subcommand("simulate-ber", "symbol-error-rate curve over an SNR grid");
    add_common(ber, ber_flags, true);

    CLI::App* outage =
        app.add_subcommand("estimate-outage", "outage curve and diversity slope over epsilon");
    add_common(outage, outage_flags, true);

    CLI::App* verify = app.add_subcommand("verify", "run a named property suite");
    verify->add_option("suite", suite, "lemma1|lemma2|lemma3|detc|chisq|correlation|separability|roundtrip")
        ->required();
    add_common(verify, verify_flags, false);

    CLI::App* exp = app.add_subcommand("export", "convert a JSON run record to csv or json");
    add_common(exp, export_flags, true);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);  // --help
        app.exit(e);
        return 2;
    }

    try {
        if (ber->parsed()) {
            const stbcmud::RunRecord record = stbcmud::run_ber(load_config(ber_flags));
            std::cerr << "simulate-ber done in " << record.wall_time_s << " s\n";
            return emit(record, ber_flags);
        }
        if (outage->parsed()) {
            const stbcmud::RunRecord record = stbcmud::run_outage(load_config(outage_flags));
            std::cerr << "estimate-outage done in " << record.wall_time_s
                      << " s, slope=" << record.slope << "\n";
            return emit(record, outage_flags);
        }
        if (verify->parsed()) {
            const std::uint64_t seed = verify_flags.seed_set ? verify_flags.seed : 1;
            const stbcmud::VerifyReport report =
                stbcmud::run_verify(suite, seed, stbcmud::resolve_threads(verify_flags.threads));
            std::ostringstream out;
            for (const stbcmud::VerifyEntry& e : report.entries) {
                out << (e.pass ? "PASS" : "FAIL") << " " << report.suite << ": " << e.name
                    << " = " << e.value << " (threshold " << e.threshold << ")\n";
            }
            if (!verify_flags.out_path.empty()) {
                std::ofstream f(verify_flags.out_path, std::ios::binary);
                f << out.str();
            } else {
                std::cout << out.str();
            }
            return report.all_pass() ? 0 : 1;
        }
        if (exp->parsed()) {
            const stbcmud::RunRecord record =
                stbcmud::record_from_json_text(read_file(export_flags.config_path));
            return emit(record, export_flags);
        }
    } catch (const stbcmud::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 2;
}
