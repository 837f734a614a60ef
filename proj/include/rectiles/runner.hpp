#pragma once

#include <cstdint>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include "rectiles/records.hpp"
#include "rectiles/stattest.hpp"

namespace rectiles {

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Batch-runner configuration. Flat key=value config files plus CLI flag
/// overrides map 1:1 onto these fields.
struct RunConfig {
    std::uint64_t master_seed = 20250614;
    std::vector<std::string> identities;  // empty = the full catalog
    std::vector<int> ns = {1, 2, 3, 4};
    std::size_t draws_per_side = 100000;  // N
    int permutations = 199;               // B
    int replicates = 20;                  // K
    double alpha = 0.05;
    std::string out_dir = ".";
    bool emit_samples = false;

    ChainOptions chain;
    std::size_t energy_cap = 1024;
    std::size_t moment_draws = 1000000;
    std::size_t markov_steps = 100000;
    std::uint64_t max_attempts = 10000000;

    double lemma3_v = 1.0;
    double lemma3_h = 0.05;
    std::size_t lemma3_rows = 10000;
};

/// Throws ConfigError on invalid values (before any sampling happens).
void validate(const RunConfig& config);

/// key=value lines; '#' starts a comment. Unknown keys are errors.
RunConfig load_config_file(const std::string& path);
void apply_key_value(RunConfig& config, const std::string& key, const std::string& value);

inline constexpr int kExitPass = 0;
inline constexpr int kExitStatFailure = 1;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitResource = 3;

/// Writes one CSV per (identity, order) into config.out_dir:
/// header `draw,c_1,...,c_d`, one row per draw, 17 significant digits, LF.
int run_sample(const RunConfig& config, std::ostream& log);

/// Full verification suite: identity pairs, the geometric-vs-closed oracle,
/// negative controls, transition-law and conditional checks, moment checks.
/// Emits the line-delimited report to `report` (records sorted by check
/// name, then replicate) followed by a human-readable summary table.
int run_test(const RunConfig& config, std::ostream& report, std::ostream& log);

/// Geometric cross-validation: chain tile matrices vs the closed form, the
/// bisectrix-reflection check, the C00-vs-C11 difference check, and window
/// expansion statistics.
int run_oracle(const RunConfig& config, std::ostream& report, std::ostream& log);

}  // namespace rectiles
