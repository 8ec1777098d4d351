#pragma once

#include "config.hpp"

#include <json.hpp>

#include <string>
#include <vector>

namespace kinlab::cli {

struct Check {
    std::string name;
    bool passed;
    std::string detail;
};

/// Artifacts of one experiment before they are committed to disk.
struct Outcome {
    std::vector<std::pair<std::string, std::string>> files;  // (stem, CSV/JSON text); stem gets "-<hash>.<ext>"
    nlohmann::ordered_json results = nlohmann::ordered_json::object();
    std::vector<Check> checks;       // hard assertions; any failure gives exit status 1
    std::vector<Check> verdicts;     // statistical verdicts; reported only
};

Outcome run_experiment(const ExperimentConfig& cfg, const RunOptions& opts);

/// Runs every experiment of the suite, writing outputs under opts.out.
/// Returns the process exit status (0 or 1); config errors propagate as ConfigError.
int run_suite(const SuiteConfig& suite);

/// Plain-text data blocks plus a gnuplot script for the CSV files of one run.
/// Returns the paths written. Throws std::runtime_error on missing inputs.
std::vector<std::string> emit_plots(const std::string& dir, const std::string& kind, const std::string& hash,
                                    const std::vector<std::string>& csv_files);

}  // namespace kinlab::cli
