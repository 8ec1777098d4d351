#include "commands.hpp"
#include "config.hpp"

#include <CLI11.hpp>

#include <iostream>

int main(int argc, char** argv) {
    using namespace kinlab::cli;

    CLI::App app{"kinlab: disordered lattice fermions and their kinetic limit"};
    app.require_subcommand(1);
    app.set_version_flag("--version", "kinlab 1.0.0");

    std::string config_path;
    std::uint64_t seed = 0;
    std::string out;
    int workers = 0;
    bool force = false, plots = false;

    auto add_common = [&](CLI::App* sub, bool config_required) {
        auto* opt = sub->add_option("--config,-c", config_path, "JSON configuration file");
        if (config_required) opt->required();
        sub->add_option("--seed", seed, "base seed (overrides the config)");
        sub->add_option("--out,-o", out, "output directory (default results)");
        sub->add_option("--workers,-j", workers, "worker threads")->check(CLI::PositiveNumber);
        sub->add_flag("--force", force, "overwrite existing outputs and ignore the time budget");
        sub->add_flag("--plots", plots, "also write .dat blocks and a gnuplot script");
    };

    const std::vector<std::pair<std::string, std::string>> help{
        {"evolve", "propagate one state under a disorder realization"},
        {"density", "random-phase estimate of the momentum density at t = T / eta^2"},
        {"boltzmann", "linear Boltzmann equation: exact, RK4 and collision-history solutions"},
        {"dos", "density of states histogram"},
        {"diagrams", "enumerate pairings and check the graph dichotomy"},
        {"wick", "Monte-Carlo Duhamel terms against exact pairing sums"},
        {"quasifree", "gap between E[det M] and det E[M]"},
        {"converge", "distance of the empirical density to the Boltzmann solution as eta -> 0"},
        {"schedule", "N, kappa and factorial checks for given epsilons"}};
    std::vector<std::pair<std::string, CLI::App*>> subs;
    for (const auto& [name, text] : help) {
        auto* sub = app.add_subcommand(name, text);
        add_common(sub, false);
        subs.emplace_back(name, sub);
    }
    auto* suite = app.add_subcommand("suite", "run the experiments listed in a config file");
    add_common(suite, true);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        Overrides ov;
        for (auto* sub : app.get_subcommands()) {
            if (sub->count("--seed")) ov.seed = seed;
            if (sub->count("--out")) ov.out = out;
            if (sub->count("--workers")) ov.workers = workers;
        }
        std::optional<std::string> kind;
        for (const auto& [name, sub] : subs)
            if (sub->parsed()) kind = name;

        SuiteConfig sc = config_path.empty() ? parse_config(nlohmann::json::object(), kind, ov)
                                             : load_config(config_path, kind, ov);
        sc.options.force = force;
        sc.options.plots = plots;
        sc.options.write_index = suite->parsed();
        return run_suite(sc);
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const AssertionFailure& e) {
        std::cerr << "assertion failed: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "failure: " << e.what() << "\n";
        return 1;
    }
}
