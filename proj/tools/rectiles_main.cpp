// Command line front end: `sample` emits identity draws as CSV, `test` runs
// the full verification suite, `oracle` cross-validates the geometric
// construction against the closed forms.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "rectiles/conditional.hpp"
#include "rectiles/records.hpp"
#include "rectiles/runner.hpp"

namespace {

struct CliOverrides {
    std::string config_path;
    std::vector<std::pair<std::string, std::string>> pairs;
};

void add_common_flags(CLI::App* cmd, CliOverrides& ov) {
    cmd->add_option("--config", ov.config_path, "flat key=value config file");
    auto opt = [cmd, &ov](const std::string& flag, const std::string& key, const std::string& help) {
        cmd->add_option_function<std::string>(
            flag, [&ov, key](const std::string& v) { ov.pairs.emplace_back(key, v); }, help);
    };
    opt("--seed", "seed", "master seed (64-bit unsigned)");
    opt("--identities", "identities", "comma-separated identity names (default: all)");
    opt("--n", "n", "comma-separated identity orders (default: 1,2,3,4)");
    opt("--N", "N", "draws per side");
    opt("--B", "B", "permutation count");
    opt("--K", "K", "replicate count");
    opt("--alpha", "alpha", "test level, in (0, 0.5)");
    opt("--out", "out", "output directory");
    cmd->add_flag_callback(
        "--emit-samples", [&ov] { ov.pairs.emplace_back("emit_samples", "1"); },
        "also write identity CSVs during test runs");
    opt("--t0", "t0", "initial simulation window side");
    opt("--max-doublings", "max_doublings", "window expansion cap");
    opt("--energy-cap", "energy_cap", "per-side rows used by the energy statistic");
    opt("--moment-draws", "moment_draws", "sample size for moment checks");
    opt("--markov-steps", "markov_steps", "transition-law steps per replicate");
    opt("--max-attempts", "max_attempts", "rejection-sampling attempt budget");
    opt("--lemma3-v", "lemma3_v", "conditioning target area");
    opt("--lemma3-h", "lemma3_h", "conditioning bin half-width");
    opt("--lemma3-rows", "lemma3_rows", "accepted draws per side for the binned check");
}

rectiles::RunConfig build_config(const CliOverrides& ov) {
    rectiles::RunConfig config;
    if (!ov.config_path.empty()) config = rectiles::load_config_file(ov.config_path);
    for (const auto& [key, value] : ov.pairs) rectiles::apply_key_value(config, key, value);
    rectiles::validate(config);
    return config;
}

int run_with_report(const rectiles::RunConfig& config, const std::string& file_name,
                    int (*runner)(const rectiles::RunConfig&, std::ostream&, std::ostream&)) {
    namespace fs = std::filesystem;
    std::error_code ec;
    fs::create_directories(config.out_dir, ec);
    const fs::path path = fs::path(config.out_dir) / file_name;
    std::ofstream report(path, std::ios::binary);
    if (!report) {
        std::cerr << "error: cannot write report file: " << path.string() << "\n";
        return rectiles::kExitConfig;
    }
    const int code = runner(config, report, std::cout);
    std::cout << "report written to " << path.string() << "\n";
    return code;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"record tilings of the planar Poisson process: samplers and verification"};
    app.require_subcommand(1);

    CliOverrides sample_ov;
    CliOverrides test_ov;
    CliOverrides oracle_ov;
    CLI::App* sample = app.add_subcommand("sample", "write identity sample batches as CSV");
    CLI::App* test = app.add_subcommand("test", "run the verification suite");
    CLI::App* oracle = app.add_subcommand("oracle", "cross-validate geometry vs closed forms");
    add_common_flags(sample, sample_ov);
    add_common_flags(test, test_ov);
    add_common_flags(oracle, oracle_ov);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : rectiles::kExitConfig;
    }

    try {
        if (sample->parsed()) {
            const auto config = build_config(sample_ov);
            return rectiles::run_sample(config, std::cout);
        }
        if (test->parsed()) {
            auto config = build_config(test_ov);
            if (config.emit_samples) rectiles::run_sample(config, std::cout);
            return run_with_report(config, "test_report.txt", &rectiles::run_test);
        }
        if (oracle->parsed()) {
            const auto config = build_config(oracle_ov);
            return run_with_report(config, "oracle_report.txt", &rectiles::run_oracle);
        }
    } catch (const rectiles::ConfigError& e) {
        std::cerr << "configuration error: " << e.what() << "\n";
        return rectiles::kExitConfig;
    } catch (const rectiles::WindowCapError& e) {
        std::cerr << "resource failure: " << e.what() << "\n";
        return rectiles::kExitResource;
    } catch (const rectiles::AcceptanceRateError& e) {
        std::cerr << "resource failure: " << e.what() << "\n";
        return rectiles::kExitResource;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return rectiles::kExitConfig;
    }
    return rectiles::kExitConfig;
}
