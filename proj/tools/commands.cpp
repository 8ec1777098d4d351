#include "commands.hpp"

#include "kinlab/boltzmann.hpp"
#include "kinlab/csv.hpp"
#include "kinlab/diagrams.hpp"
#include "kinlab/experiments.hpp"
#include "kinlab/fourier.hpp"
#include "kinlab/quasifree.hpp"

#include <Eigen/Core>
#include <boost/version.hpp>
#include <charconv>

#include <chrono>
#include <cstdio>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

namespace kinlab::cli {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace {

std::string fmt(double x) { return csv::number(x); }

/// Shortest round-trip form, for check names.
std::string tag(double x) {
    char buf[32];
    const auto r = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, r.ptr);
}

Check check(std::string name, bool ok, std::string detail) { return {std::move(name), ok, std::move(detail)}; }

std::vector<cplx> momentum_state(const ExperimentConfig& c, const LatticeSpec& spec) {
    const auto grid = MomentumGrid::of(spec);
    std::vector<cplx> v(spec.sites(), 0.0);
    if (c.state.kind == "delta") {
        v[nearest_momentum(c.state.center, spec)] = 1.0;
    } else {
        for (std::size_t i = 0; i < v.size(); ++i)
            v[i] = std::exp(-torus_distance_squared(grid.momenta(i), c.state.center) /
                            (2.0 * c.state.width * c.state.width));
    }
    return v;
}

double kinetic_time(const ExperimentConfig& c, double eta) {
    if (c.t) return *c.t;
    return KineticSchedule(c.T, eta).t();
}

// ---- experiments --------------------------------------------------------

Outcome run_evolve(const ExperimentConfig& c) {
    const LatticeSpec spec(c.d, c.L);
    const double eta = c.etas.front();
    const double t = kinetic_time(c, eta);
    const EvolutionParams params(spec, eta, t, c.dt);
    const auto w = sample_disorder(spec, c.seed);
    const ComplexField f0(spec, Representation::momentum, momentum_state(c, spec));
    const auto ft = evolve(f0, w, params);

    Outcome out;
    const double ratio = ft.norm() / f0.norm();
    out.checks.push_back(check("unitarity", std::abs(ratio - 1.0) <= 1e-10, "norm ratio " + fmt(ratio)));
    const auto grid = MomentumGrid::of(spec);
    const DispersionTable energy(grid);
    if (eta == 0.0) {
        double dev = 0.0;
        for (std::size_t i = 0; i < spec.sites(); ++i)
            dev = std::max(dev, std::abs(ft.values[i] - std::polar(1.0, -t * energy[i]) * f0.values[i]));
        out.checks.push_back(check("free_phases", dev <= 1e-12, "max deviation " + fmt(dev)));
    }

    std::ostringstream os;
    csv::Writer wr(os);
    std::vector<std::string> cols;
    for (int a = 1; a <= c.d; ++a) cols.push_back("k" + std::to_string(a));
    for (int a = 1; a <= c.d; ++a) cols.push_back("p" + std::to_string(a));
    cols.insert(cols.end(), {"E", "re", "im", "abs2"});
    wr.header(cols);
    for (std::size_t i = 0; i < spec.sites(); ++i) {
        const auto k = grid.coords(i);
        for (int x : k) wr.field(x);
        for (int x : k) wr.field(x / double(c.L));
        wr.field(energy[i]).field(ft.values[i].real()).field(ft.values[i].imag()).field(std::norm(ft.values[i]));
        wr.end_row();
    }
    out.files.emplace_back("evolve", os.str());
    out.results = {{"eta", eta}, {"t", t}, {"steps", params.steps()}, {"norm_ratio", ratio}};
    return out;
}

Outcome run_density(const ExperimentConfig& c, int workers) {
    const LatticeSpec spec(c.d, c.L);
    const double eta = c.etas.front();
    const KineticSchedule sched(c.T, eta);
    const EvolutionParams params(spec, eta, sched.t(), c.dt);
    const auto J = c.profile.build(MomentumGrid::of(spec));
    const auto est = momentum_density(J, EnsemblePlan(c.seed, c.realizations), sched, params, c.phases, workers);

    Outcome out;
    const double mass0 = J.as_distribution().mass();
    const double mass = est.dist.mass();
    out.checks.push_back(check("mass_conservation", std::abs(mass - mass0) <= 1e-9 * std::max(1.0, mass0),
                               "mass " + fmt(mass) + " initial " + fmt(mass0)));
    double worst = 0.0;
    for (std::size_t i = 0; i < est.dist.F.size(); ++i) {
        const double f = est.dist.F[i], se = est.std_error[i];
        const double outside = f < 0.0 ? -f : (f > 1.0 ? f - 1.0 : 0.0);
        if (outside > 0.0) worst = std::max(worst, se > 0.0 ? outside / se : INFINITY);
    }
    out.verdicts.push_back(check("bounds_4sigma", worst <= 4.0, "max excursion " + fmt(worst) + " sigma"));
    std::ostringstream os;
    write_distribution_csv(os, est);
    out.files.emplace_back("density", os.str());
    out.results = {{"eta", eta}, {"T", c.T}, {"t", sched.t()}, {"epsilon", sched.epsilon()},
                   {"n_samples", est.n_samples}, {"mass", mass}, {"mass_initial", mass0}};
    return out;
}

Outcome run_boltzmann(const ExperimentConfig& c, int workers) {
    const MomentumGrid grid(c.d, c.M);
    const auto shells = build_shells(grid, c.d, c.n_bins);
    const auto F0 = c.profile.build(grid).as_distribution();
    const auto exact = solve_exact(F0, shells, c.T);
    const auto ode = solve_ode(F0, shells, c.T, c.ode_step);
    const auto mc = solve_collision_history(F0, shells, c.T, c.paths, c.seed, workers);

    Outcome out;
    const double m0 = F0.mass();
    out.checks.push_back(check("mass_exact", std::abs(exact.mass() - m0) <= 1e-12, fmt(exact.mass() - m0)));
    out.checks.push_back(check("mass_ode", std::abs(ode.mass() - m0) <= 1e-8, fmt(ode.mass() - m0)));
    const auto a0 = shell_averages(F0, shells), ae = shell_averages(exact, shells), ao = shell_averages(ode, shells);
    double dev_e = 0.0, dev_o = 0.0, sup = 0.0;
    for (std::size_t b = 0; b < a0.size(); ++b) {
        dev_e = std::max(dev_e, std::abs(ae[b] - a0[b]));
        dev_o = std::max(dev_o, std::abs(ao[b] - a0[b]));
    }
    out.checks.push_back(check("shell_averages_exact", dev_e <= 1e-12, fmt(dev_e)));
    out.checks.push_back(check("shell_averages_ode", dev_o <= 1e-8, fmt(dev_o)));
    std::size_t outside = 0;
    double zmax = 0.0;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        sup = std::max(sup, std::abs(exact.F[i] - ode.F[i]));
        const double diff = std::abs(mc.dist.F[i] - exact.F[i]);
        const double z = mc.std_error[i] > 0.0 ? diff / mc.std_error[i] : (diff == 0.0 ? 0.0 : INFINITY);
        zmax = std::max(zmax, z);
        if (z >= 3.0) ++outside;
    }
    out.verdicts.push_back(check("exact_vs_ode", sup <= 1e-8, "sup difference " + fmt(sup)));
    const double frac = static_cast<double>(outside) / static_cast<double>(grid.size());
    out.verdicts.push_back(check("collision_history_3sigma", frac <= 0.01,
                                 "fraction beyond 3 sigma " + fmt(frac) + ", max |z| " + fmt(zmax)));

    std::ostringstream os;
    csv::Writer w(os);
    std::vector<std::string> cols;
    for (int a = 1; a <= c.d; ++a) cols.push_back("k" + std::to_string(a));
    for (int a = 1; a <= c.d; ++a) cols.push_back("p" + std::to_string(a));
    cols.insert(cols.end(), {"E", "F0", "F_exact", "F_ode", "F_mc", "F_mc_se"});
    w.header(cols);
    const DispersionTable energy(grid);
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const auto k = grid.coords(i);
        for (int x : k) w.field(x);
        for (int x : k) w.field(x / double(c.M));
        w.field(energy[i]).field(F0.F[i]).field(exact.F[i]).field(ode.F[i]).field(mc.dist.F[i]).field(mc.std_error[i]);
        w.end_row();
    }
    out.files.emplace_back("boltzmann", os.str());

    std::ostringstream rs;
    csv::Writer rw(rs);
    rw.header({"n_bins", "dE", "residual"});
    for (int nb = c.n_bins; nb <= 4 * c.n_bins; nb *= 2) {
        const auto sh = build_shells(grid, c.d, nb);
        rw.field(nb).field(sh.width).field(stationarity_residual(F0, sh));
        rw.end_row();
    }
    out.files.emplace_back("residuals", rs.str());
    out.results = {{"mass_initial", m0}, {"sup_exact_vs_ode", sup}, {"empty_bins", shells.empty_bins()}};
    return out;
}

Outcome run_dos(const ExperimentConfig& c) {
    const MomentumGrid grid(c.d, c.M);
    const auto shells = build_shells(grid, c.d, c.n_bins);
    Outcome out;
    double total = 0.0;
    for (double nu : shells.dos) total += nu * shells.width;
    out.checks.push_back(check("dos_normalization", std::abs(total - 1.0) <= 1e-12, fmt(total)));
    std::ostringstream os;
    write_dos_csv(os, shells);
    out.files.emplace_back("dos", os.str());
    out.results = {{"empty_bins", shells.empty_bins()}, {"width", shells.width}};
    return out;
}

Outcome run_diagrams(const ExperimentConfig& c) {
    Outcome out;
    const auto report = verify_dichotomy(c.max_nbar);
    out.checks.push_back(check("dichotomy", report.holds(),
                               std::to_string(report.graphs_checked) + " graphs, " +
                                   std::to_string(report.counterexamples.size()) + " counterexamples"));
    std::ostringstream os;
    csv::Writer w(os);
    w.header({"n", "n_tilde", "graphs", "expected", "basic_ladder", "decorated_ladder", "crossing", "nesting",
              "other_nonladder"});
    ordered_json graphs = ordered_json::array();
    bool counts_ok = true;
    for (const auto& s : report.splits) {
        const auto expected = double_factorial_odd((s.n + s.n_tilde) / 2);
        counts_ok = counts_ok && s.graphs == expected;
        auto count = [&](GraphKind k) {
            const auto it = s.counts.find(k);
            return it == s.counts.end() ? std::size_t{0} : it->second;
        };
        w.field(s.n).field(s.n_tilde).field(s.graphs).field(static_cast<unsigned long long>(expected));
        w.field(count(GraphKind::basic_ladder)).field(count(GraphKind::decorated_ladder));
        w.field(count(GraphKind::crossing)).field(count(GraphKind::nesting)).field(count(GraphKind::other_nonladder));
        w.end_row();
        for (const auto& g : enumerate_pairings({LineDegrees{s.n, s.n_tilde}}))
            graphs.push_back(ordered_json::parse(graph_to_json(g)));
    }
    out.checks.push_back(check("pairing_counts", counts_ok, "(2 nbar - 1)!! per degree split"));
    out.files.emplace_back("diagrams", os.str());
    out.files.emplace_back("graphs.json", graphs.dump(1));
    out.results = {{"graphs_checked", report.graphs_checked}, {"dichotomy_holds", report.holds()}};
    return out;
}

Outcome run_wick(const ExperimentConfig& c, int workers) {
    const LatticeSpec spec(c.d, c.L);
    const double eta = c.etas.front();
    const double t = c.t ? *c.t : 2.0;
    const auto J = c.profile.build(MomentumGrid::of(spec));
    const auto f = momentum_state(c, spec);
    const LineObservable obs{f, f};
    Outcome out;
    std::ostringstream os;
    csv::Writer w(os);
    w.header({"n", "n_tilde", "realizations", "mc_re", "mc_im", "se_re", "se_im", "exact_re", "exact_im", "z"});
    ordered_json rows = ordered_json::array();
    for (const auto& term : c.wick_terms) {
        const auto r = wick_oracle(term.n, term.n_tilde, obs, J, eta, t, spec, EnsemblePlan(c.seed, c.realizations),
                                   c.dt, workers, {c.quad_panel});
        w.field(term.n).field(term.n_tilde).field(r.n_realizations).field(r.mc_value.real()).field(r.mc_value.imag());
        w.field(r.stderr_re).field(r.stderr_im).field(r.pairing_sum.real()).field(r.pairing_sum.imag()).field(r.z());
        w.end_row();
        out.verdicts.push_back(check("wick_" + std::to_string(term.n) + "_" + std::to_string(term.n_tilde),
                                     r.z() < 3.0, "|z| = " + fmt(r.z())));
        rows.push_back({{"n", term.n}, {"n_tilde", term.n_tilde}, {"z", r.z()}});
    }
    out.files.emplace_back("wick", os.str());
    out.results = {{"eta", eta}, {"t", t}, {"terms", rows}};
    return out;
}

Outcome run_quasifree(const ExperimentConfig& c, int workers) {
    const LatticeSpec spec(c.d, c.L);
    const auto J = c.profile.build(MomentumGrid::of(spec));
    const auto tset = TestFunctionSet::bumps(spec, c.qf_centers, c.qf_width);
    std::vector<GapReport> rows;
    for (double eta : c.etas) {
        const EvolutionParams params(spec, eta, kinetic_time(c, eta), c.dt);
        rows.push_back(quasifreeness_gap(tset, J, EnsemblePlan(c.seed, c.realizations), params, workers));
    }
    Outcome out;
    for (const auto& g : rows)
        out.checks.push_back(check("gap_nonnegative_eta_" + tag(g.eta), g.gap >= 0.0 && std::isfinite(g.gap), fmt(g.gap)));
    if (rows.size() > 1) {
        bool dec = true;
        for (std::size_t i = 1; i < rows.size(); ++i)
            dec = dec && rows[i - 1].gap - rows[i].gap > 2.0 * std::hypot(rows[i - 1].std_error, rows[i].std_error);
        out.verdicts.push_back(check("gap_decreasing_2sigma", dec, "in list order"));
    }
    std::ostringstream os;
    write_gap_csv(os, spec, c.T, rows);
    out.files.emplace_back("gap", os.str());
    ordered_json res = ordered_json::array();
    for (const auto& g : rows) res.push_back({{"eta", g.eta}, {"t", g.t}, {"gap", g.gap}, {"stderr", g.std_error}});
    out.results = {{"rows", res}};
    return out;
}

Outcome run_converge(const ExperimentConfig& c, int workers) {
    ConvergenceConfig cc;
    cc.spec = LatticeSpec(c.d, c.L);
    cc.continuum_per_axis = c.M;
    cc.n_bins = c.n_bins;
    cc.T = c.T;
    cc.etas = c.etas;
    cc.profile = c.profile;
    cc.realizations = c.realizations;
    cc.phases = c.phases;
    cc.dt = c.dt;
    cc.seed = c.seed;
    cc.workers = workers;
    const auto r = run_convergence(cc);

    Outcome out;
    ordered_json rows = ordered_json::array();
    for (const auto& row : r.rows) {
        out.checks.push_back(check("mass_eta_" + tag(row.eta),
                                   std::abs(row.mass - row.mass_initial) <= 1e-9 * std::max(1.0, row.mass_initial),
                                   "mass " + fmt(row.mass) + " initial " + fmt(row.mass_initial)));
        out.verdicts.push_back(check("bounds_4sigma_eta_" + tag(row.eta), row.max_excursion <= 4.0,
                                     "max excursion " + fmt(row.max_excursion) + " sigma"));
        rows.push_back({{"eta", row.eta}, {"err", row.err}, {"err_se", row.err_se}});
    }
    out.verdicts.push_back(check("err_decreasing", r.decreasing, "beyond combined standard errors"));

    std::ostringstream ds;
    csv::Writer w(ds);
    std::vector<std::string> cols{"eta"};
    for (int a = 1; a <= c.d; ++a) cols.push_back("k" + std::to_string(a));
    for (int a = 1; a <= c.d; ++a) cols.push_back("p" + std::to_string(a));
    cols.insert(cols.end(), {"E", "F_estimate", "std_error", "n_samples"});
    w.header(cols);
    const auto grid = MomentumGrid::of(cc.spec);
    const DispersionTable energy(grid);
    for (std::size_t e = 0; e < r.rows.size(); ++e)
        for (std::size_t i = 0; i < grid.size(); ++i) {
            w.field(r.rows[e].eta);
            const auto k = grid.coords(i);
            for (int x : k) w.field(x);
            for (int x : k) w.field(x / double(c.L));
            w.field(energy[i]).field(r.empirical[e].dist.F[i]).field(r.empirical[e].std_error[i]);
            w.field(r.empirical[e].n_samples);
            w.end_row();
        }
    out.files.emplace_back("distributions", ds.str());
    std::ostringstream es;
    write_convergence_csv(es, r);
    out.files.emplace_back("errors", es.str());
    out.results = {{"rows", rows}, {"decreasing", r.decreasing}};
    return out;
}

Outcome run_schedule(const ExperimentConfig& c) {
    Outcome out;
    std::ostringstream os;
    csv::Writer w(os);
    w.header({"epsilon", "r", "log_inv_epsilon", "N", "kappa", "log_kappa", "log_N_factorial", "factorial_lower",
              "factorial_upper", "kappa_power", "kappa_power_margin"});
    ordered_json rows = ordered_json::array();
    for (double eps : c.epsilons) {
        const auto s = schedule(eps, c.schedule_r);
        w.field(eps).field(s.r).field(s.log_inv_epsilon).field(s.N).field(s.kappa()).field(s.log_kappa);
        w.field(s.log_N_factorial).field(s.factorial_lower ? "true" : "false").field(s.factorial_upper ? "true" : "false");
        w.field(s.kappa_power ? "true" : "false").field(s.kappa_power_margin);
        w.end_row();
        rows.push_back({{"epsilon", eps},
                        {"r", s.r},
                        {"N", s.N},
                        {"kappa", s.kappa()},
                        {"log_N_factorial", s.log_N_factorial},
                        {"factorial_lower", s.factorial_lower},
                        {"factorial_upper", s.factorial_upper},
                        {"kappa_power", s.kappa_power},
                        {"kappa_power_margin", s.kappa_power_margin}});
    }
    out.files.emplace_back("schedule", os.str());
    out.results = {{"rows", rows}};
    return out;
}

// ---- persistence --------------------------------------------------------

ordered_json versions() {
    return {{"kinlab", "1.0.0"},
            {"fftw", fftw_library_version()},
            {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
                          std::to_string(EIGEN_MINOR_VERSION)},
            {"boost", BOOST_LIB_VERSION},
            {"compiler", __VERSION__}};
}

ordered_json checks_json(const std::vector<Check>& cs) {
    ordered_json a = ordered_json::array();
    for (const auto& c : cs) a.push_back({{"name", c.name}, {"passed", c.passed}, {"detail", c.detail}});
    return a;
}

std::string fnv_hex(const std::string& text) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char ch : text) {
        h ^= ch;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

std::string file_name(const std::string& stem, const std::string& hash) {
    const auto dot = stem.find('.');
    if (dot == std::string::npos) return stem + "-" + hash + ".csv";
    return stem.substr(0, dot) + "-" + hash + stem.substr(dot);
}

void write_text(const fs::path& p, const std::string& text) {
    std::ofstream f(p, std::ios::binary);
    if (!f) throw std::runtime_error("cannot write " + p.string());
    f << text;
    if (!f) throw std::runtime_error("write failed for " + p.string());
}

}  // namespace

Outcome run_experiment(const ExperimentConfig& cfg, const RunOptions& opts) {
    const int w = opts.workers;
    if (cfg.kind == "evolve") return run_evolve(cfg);
    if (cfg.kind == "density") return run_density(cfg, w);
    if (cfg.kind == "boltzmann") return run_boltzmann(cfg, w);
    if (cfg.kind == "dos") return run_dos(cfg);
    if (cfg.kind == "diagrams") return run_diagrams(cfg);
    if (cfg.kind == "wick") return run_wick(cfg, w);
    if (cfg.kind == "quasifree") return run_quasifree(cfg, w);
    if (cfg.kind == "converge") return run_converge(cfg, w);
    if (cfg.kind == "schedule") return run_schedule(cfg);
    throw ConfigError("config field 'experiment': unknown experiment kind '" + cfg.kind + "'");
}

int run_suite(const SuiteConfig& suite) {
    const auto& opts = suite.options;
    for (const auto& e : suite.experiments) {
        const double est = estimate_seconds(e);
        if (est > e.budget_seconds && !opts.force)
            throw ConfigError("config field 'budget_seconds': " + e.kind + " is estimated at " + fmt(est) +
                              " s, above the budget of " + fmt(e.budget_seconds) + " s (use --force)");
    }
    const fs::path dir(opts.out);
    fs::create_directories(dir);
    std::string suite_key = "suite";
    for (const auto& e : suite.experiments) suite_key += ":" + config_hash(e);
    const auto suite_manifest = dir / ("manifest-suite-" + fnv_hex(suite_key) + ".json");
    if (opts.write_index && fs::exists(suite_manifest) && !opts.force)
        throw ConfigError("output '" + suite_manifest.string() + "' already exists (use --force to overwrite)");
    for (const auto& e : suite.experiments) {
        const auto manifest = dir / ("manifest-" + config_hash(e) + ".json");
        if (fs::exists(manifest) && !opts.force)
            throw ConfigError("output '" + manifest.string() + "' already exists (use --force to overwrite)");
    }

    int status = 0;
    ordered_json index = ordered_json::array();
    for (const auto& e : suite.experiments) {
        const auto hash = config_hash(e);
        const auto start = std::chrono::steady_clock::now();
        Outcome out = run_experiment(e, opts);
        const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

        const fs::path partial = dir / (".partial-" + hash);
        fs::remove_all(partial);
        fs::create_directories(partial);
        std::vector<std::string> names;
        for (const auto& [stem, text] : out.files) {
            names.push_back(file_name(stem, hash));
            write_text(partial / names.back(), text);
        }
        if (opts.plots) {
            std::vector<std::string> csvs;
            for (const auto& n : names)
                if (n.ends_with(".csv")) csvs.push_back((partial / n).string());
            for (const auto& p : emit_plots(partial.string(), e.kind, hash, csvs))
                names.push_back(fs::path(p).filename().string());
        }

        bool passed = true;
        for (const auto& c : out.checks) passed = passed && c.passed;
        ordered_json m;
        m["hash"] = hash;
        m["experiment"] = e.kind;
        m["config"] = e.to_json();
        m["seeds"] = {{"base_seed", e.seed}, {"realizations", e.realizations}, {"rule", "base_seed + index"}};
        m["workers"] = opts.workers;
        m["versions"] = versions();
        m["wall_seconds"] = wall;
        m["files"] = names;
        m["checks"] = checks_json(out.checks);
        m["verdicts"] = checks_json(out.verdicts);
        m["results"] = out.results;
        m["status"] = passed ? "ok" : "assertion_failure";
        const auto manifest_name = "manifest-" + hash + ".json";
        write_text(partial / manifest_name, m.dump(2) + "\n");

        // commit: data files first, manifest last
        for (const auto& n : names) fs::rename(partial / n, dir / n);
        fs::rename(partial / manifest_name, dir / manifest_name);
        fs::remove_all(partial);

        std::cout << e.kind << " " << hash << (passed ? " ok" : " ASSERTION FAILURE") << " (" << fmt(wall) << " s)\n";
        for (const auto& c : out.checks)
            if (!c.passed) std::cerr << "  check " << c.name << " failed: " << c.detail << "\n";
        for (const auto& c : out.verdicts)
            std::cout << "  verdict " << c.name << ": " << (c.passed ? "pass" : "fail") << " (" << c.detail << ")\n";
        if (!passed) status = 1;
        index.push_back({{"experiment", e.kind}, {"hash", hash}, {"status", m["status"]}});
    }
    if (opts.write_index) {
        ordered_json m;
        m["hash"] = fnv_hex(suite_key);
        m["versions"] = versions();
        m["experiments"] = index;
        const fs::path tmp = dir / (".partial-" + suite_manifest.filename().string());
        write_text(tmp, m.dump(2) + "\n");
        fs::rename(tmp, suite_manifest);
    }
    return status;
}

// ---- plots --------------------------------------------------------------

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char ch = line[i];
        if (quoted) {
            if (ch == '"' && i + 1 < line.size() && line[i + 1] == '"') {
                cur += '"';
                ++i;
            } else if (ch == '"') {
                quoted = false;
            } else {
                cur += ch;
            }
        } else if (ch == '"') {
            quoted = true;
        } else if (ch == ',') {
            out.push_back(cur);
            cur.clear();
        } else if (ch != '\r') {
            cur += ch;
        }
    }
    out.push_back(cur);
    return out;
}

}  // namespace

std::vector<std::string> emit_plots(const std::string& dir, const std::string& kind, const std::string& hash,
                                    const std::vector<std::string>& csv_files) {
    std::vector<std::string> written;
    std::ostringstream gp;
    gp << "# gnuplot script for " << kind << " run " << hash << "\n";
    gp << "set key outside\nset grid\n";
    int panel = 0;
    for (const auto& path : csv_files) {
        std::ifstream in(path);
        if (!in) throw std::runtime_error("emit_plots: missing input file " + path);
        std::string line;
        std::getline(in, line);
        const auto header = split_csv_line(line);
        const auto stem = fs::path(path).stem().string();
        const auto dat = (fs::path(dir) / (stem + ".dat")).string();
        std::ofstream out(dat);
        out << "#";
        for (const auto& h : header) out << " " << h;
        out << "\n";
        while (std::getline(in, line)) {
            const auto cells = split_csv_line(line);
            for (std::size_t i = 0; i < cells.size(); ++i) out << (i ? " " : "") << cells[i];
            out << "\n";
        }
        written.push_back(dat);

        auto col = [&](const std::string& name) {
            for (std::size_t i = 0; i < header.size(); ++i)
                if (header[i] == name) return static_cast<int>(i) + 1;
            return 0;
        };
        const auto datname = fs::path(dat).filename().string();
        auto plot = [&](const std::string& x, const std::vector<std::string>& ys, const std::string& extra) {
            if (!col(x)) return;
            std::ostringstream cmd;
            bool any = false;
            for (const auto& y : ys) {
                if (!col(y)) continue;
                cmd << (any ? ", " : "plot ") << "'" << datname << "' using " << col(x) << ":" << col(y) << " title '"
                    << y << "'" << extra;
                any = true;
            }
            if (!any) return;
            gp << "\n# panel " << ++panel << ": " << stem << "\nset xlabel '" << x << "'\n" << cmd.str() << "\npause -1\n";
        };
        if (col("err")) {
            gp << "set logscale xy\n";
            plot("eta", {"err", "raw_err"}, " with linespoints");
            gp << "unset logscale xy\n";
        } else if (col("gap")) {
            gp << "set logscale xy\n";
            plot("eta", {"gap"}, " with linespoints");
            gp << "unset logscale xy\n";
        } else if (col("nu")) {
            plot("E_center", {"nu"}, " with steps");
        } else if (col("F_exact")) {
            plot("E", {"F0", "F_exact", "F_ode", "F_mc"}, " with points pt 7 ps 0.3");
        } else if (col("F_estimate")) {
            plot("E", {"F_estimate"}, " with points pt 7 ps 0.3");
        } else if (col("residual")) {
            gp << "set logscale xy\n";
            plot("dE", {"residual"}, " with linespoints");
            gp << "unset logscale xy\n";
        } else if (col("abs2")) {
            plot("E", {"abs2"}, " with points pt 7 ps 0.3");
        }
    }
    const auto script = (fs::path(dir) / ("plot-" + hash + ".gp")).string();
    std::ofstream(script) << gp.str();
    written.push_back(script);
    return written;
}

}  // namespace kinlab::cli
