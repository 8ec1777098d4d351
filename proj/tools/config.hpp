#pragma once

#include "kinlab/experiments.hpp"

#include <json.hpp>

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace kinlab::cli {

/// Invalid configuration; the message names the offending field. Exit status 2.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Internal consistency check failed. Exit status 1.
struct AssertionFailure : std::runtime_error {
    using std::runtime_error::runtime_error;
};

inline const std::vector<std::string>& experiment_kinds() {
    static const std::vector<std::string> kinds{"evolve", "density",   "boltzmann", "dos",     "diagrams",
                                                "wick",   "quasifree", "converge",  "schedule"};
    return kinds;
}

struct StateSpec {
    std::string kind = "bump";  // "bump" or "delta"
    std::vector<double> center;
    double width = 0.1;
};

struct WickTerm {
    int n;
    int n_tilde;
};

/// One experiment, fully validated. Defaults live here and nowhere else.
struct ExperimentConfig {
    std::string kind;
    int d = 3;
    int L = 32;
    int M = 32;
    int n_bins = 64;
    std::vector<double> etas{0.8, 0.4, 0.2};
    double T = 1.0;
    std::optional<double> t;  // microscopic time for evolve; default T / eta^2
    double dt = 0.05;
    std::size_t realizations = 100;
    int phases = 2;
    std::size_t paths = 10000;
    double ode_step = 1e-3;
    ProfileSpec profile;
    StateSpec state;
    std::uint64_t seed = 1;
    int max_nbar = 4;
    std::vector<WickTerm> wick_terms{{1, 1}, {2, 0}, {0, 2}};
    double quad_panel = 0.5;
    std::vector<std::vector<double>> qf_centers;
    double qf_width = 0.05;
    std::vector<double> epsilons{1e-6, 1e-9, 1e-12};
    int schedule_r = 1;
    double budget_seconds = 3600.0;

    /// Canonical JSON echo (used for hashing and the manifest).
    nlohmann::ordered_json to_json() const;
};

struct RunOptions {
    std::string out = "results";
    int workers = 1;
    bool force = false;
    bool plots = false;
    bool write_index = false;  // suite subcommand: also write manifest-suite-<hash>.json
};

/// Overrides applied from the command line after the file is read.
struct Overrides {
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out;
    std::optional<int> workers;
};

struct SuiteConfig {
    std::vector<ExperimentConfig> experiments;
    RunOptions options;
};

/// Parse a config document. If `kind` is set the document describes that single
/// experiment; otherwise the document's "experiments" list is used (each entry is
/// merged over the top-level fields) or, failing that, its "experiment" field.
SuiteConfig parse_config(const nlohmann::json& doc, const std::optional<std::string>& kind, const Overrides& ov);
SuiteConfig load_config(const std::string& path, const std::optional<std::string>& kind, const Overrides& ov);

/// FNV-1a of the canonical config echo, 16 hex digits.
std::string config_hash(const ExperimentConfig& cfg);

/// Single-core wall-clock estimate in seconds.
double estimate_seconds(const ExperimentConfig& cfg);

}  // namespace kinlab::cli
