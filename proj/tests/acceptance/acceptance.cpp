// Acceptance run: one line per criterion, exit status 1 if any fails.

#include "commands.hpp"
#include "config.hpp"
#include "kinlab/boltzmann.hpp"
#include "kinlab/diagrams.hpp"
#include "kinlab/experiments.hpp"
#include "kinlab/quasifree.hpp"
#include "kinlab/random.hpp"

#include <Eigen/Dense>
#include <boost/math/special_functions/gamma.hpp>
#include <boost/multiprecision/cpp_bin_float.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>

using namespace kinlab;

namespace {

struct Verdict {
    bool pass;
    std::string detail;
};

std::string num(double x, int digits = 3) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*g", digits, x);
    return buf;
}

std::vector<cplx> bump(const LatticeSpec& spec, double center, double width) {
    const auto g = MomentumGrid::of(spec);
    std::vector<cplx> v(spec.sites());
    std::vector<double> c(static_cast<std::size_t>(spec.dim()), center);
    for (std::size_t i = 0; i < v.size(); ++i)
        v[i] = std::exp(-torus_distance_squared(g.momenta(i), c) / (2.0 * width * width));
    return v;
}

// ---- 1 ------------------------------------------------------------------

Verdict combinatorics() {
    const auto start = std::chrono::steady_clock::now();
    const std::uint64_t expected[] = {1, 3, 15, 105, 945};
    bool counts = true;
    for (int nbar = 1; nbar <= 5; ++nbar) {
        counts = counts && double_factorial_odd(nbar) == expected[nbar - 1];
        for (int n = 0; n <= 2 * nbar; ++n)
            counts = counts && enumerate_pairings({{n, 2 * nbar - n}}).size() == expected[nbar - 1];
    }
    const auto report = verify_dichotomy(4);
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return {counts && report.holds() && secs < 1.0,
            std::string("counts ") + (counts ? "1,3,15,105,945" : "WRONG") + "; dichotomy over " +
                std::to_string(report.graphs_checked) + " graphs, " + std::to_string(report.counterexamples.size()) +
                " counterexamples; " + num(secs) + " s"};
}

// ---- 2 ------------------------------------------------------------------

Verdict wick() {
    const LatticeSpec spec(1, 8);
    const auto J = InitialProfile::fermi_dirac(MomentumGrid::of(spec), 2.0, 0.5);
    const LineObservable obs{bump(spec, 0.125, 0.15), bump(spec, -0.125, 0.2)};
    bool pass = true;
    std::string detail;
    for (auto [n, nt] : {std::pair{1, 1}, std::pair{2, 0}, std::pair{0, 2}}) {
        const auto r = wick_oracle(n, nt, obs, J, 0.5, 2.0, spec, EnsemblePlan(20240, 10000), 0.01);
        pass = pass && r.z() < 3.0;
        detail += "(" + std::to_string(n) + "," + std::to_string(nt) + ") |z|=" + num(r.z()) + " ";
    }
    return {pass, detail + "over 10^4 realizations"};
}

// ---- 3 ------------------------------------------------------------------

Verdict boltzmann_cross() {
    const MomentumGrid g(3, 16);
    const auto shells = build_shells(g, 3, 64);
    std::vector<double> v(g.size());
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = counter_uniform(77, i);
    const MomentumDistribution F0(g, v);
    const double T = 2.0;
    const auto exact = solve_exact(F0, shells, T);
    const auto ode = solve_ode(F0, shells, T, 1e-3);
    const auto mc = solve_collision_history(F0, shells, T, 10000, 5);

    double sup = 0.0;
    std::size_t beyond = 0;
    double zmax = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) {
        sup = std::max(sup, std::abs(exact.F[i] - ode.F[i]));
        const double z = std::abs(mc.dist.F[i] - exact.F[i]) / mc.std_error[i];
        zmax = std::max(zmax, z);
        if (z > 3.0) ++beyond;
    }
    const double frac = double(beyond) / double(g.size());
    const double m0 = F0.mass();
    const double dm_exact = std::abs(exact.mass() - m0), dm_ode = std::abs(ode.mass() - m0);
    const auto a0 = shell_averages(F0, shells), ae = shell_averages(exact, shells), ao = shell_averages(ode, shells);
    double dshell_exact = 0.0, dshell_ode = 0.0;
    for (std::size_t b = 0; b < a0.size(); ++b) {
        dshell_exact = std::max(dshell_exact, std::abs(ae[b] - a0[b]));
        dshell_ode = std::max(dshell_ode, std::abs(ao[b] - a0[b]));
    }
    const bool pass = sup <= 1e-8 && frac <= 0.01 && dm_exact <= 1e-12 && dm_ode <= 1e-8 && dshell_exact <= 1e-12 &&
                      dshell_ode <= 1e-8;
    return {pass, "sup|exact-RK4|=" + num(sup) + "; MC beyond 3 sigma " + std::to_string(beyond) + "/" +
                      std::to_string(g.size()) + " (max |z| " + num(zmax) + "); mass drift " + num(dm_exact) + " / " +
                      num(dm_ode) + "; shell drift " + num(dshell_exact) + " / " + num(dshell_ode)};
}

// ---- 4 ------------------------------------------------------------------

Verdict stationarity() {
    const MomentumGrid g(3, 64);
    bool pass = true;
    double worst_binned = 0.0;
    for (int nb : {7, 16, 33, 64, 128, 256}) {
        const auto s = build_shells(g, 3, nb);
        std::vector<double> v(g.size());
        for (std::size_t i = 0; i < v.size(); ++i) v[i] = fermi_dirac(s.center(s.bin_of[i]), 2.0, 0.5);
        worst_binned = std::max(worst_binned, stationarity_residual(MomentumDistribution(g, v), s));
    }
    pass = pass && worst_binned == 0.0;

    const auto fd = InitialProfile::fermi_dirac(g, 2.0, 0.5).as_distribution();
    std::vector<double> res;
    for (int nb : {24, 48, 96}) res.push_back(stationarity_residual(fd, build_shells(g, 3, nb)));
    std::string ratios;
    for (std::size_t i = 0; i + 1 < res.size(); ++i) {
        const double r = res[i] / res[i + 1];
        pass = pass && std::abs(r - 2.0) <= 0.3 * 2.0;
        ratios += num(r) + " ";
    }

    const double mu = 0.33;
    const auto sea = InitialProfile::fermi_dirac(g, INFINITY, mu).as_distribution();
    const auto s = build_shells(g, 3, 60);
    const auto Q = collision_apply(sea, s);
    const int straddle = shell_index(mu, s.e_min, s.e_max, s.n_bins);
    double off = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i)
        if (s.bin_of[i] != straddle) off = std::max(off, std::abs(Q.F[i]));
    pass = pass && off == 0.0;
    return {pass, "binned f(E) residual " + num(worst_binned) + "; FD halving ratios " + ratios +
                      "; zero-temperature residual off the straddling bin " + num(off)};
}

// ---- 5 ------------------------------------------------------------------

Verdict buu() {
    const int d = 3;
    const double beta = 2.0, mu = 0.5;
    double worst_conserving = 0.0, worst_ratio = 0.0;
    for (std::uint64_t k = 0; k < 10000; ++k) {
        Quadruple q;
        for (int a = 0; a < d; ++a) {
            q.p1.push_back(counter_uniform(101, 8 * k + a) - 0.5);
            q.p2.push_back(counter_uniform(102, 8 * k + a) - 0.5);
        }
        // exchange one axis between the two momenta and reflect another
        q.q1 = q.p1;
        q.q2 = q.p2;
        const auto axis = static_cast<std::size_t>(k % d);
        std::swap(q.q1[axis], q.q2[axis]);
        q.q1[(axis + 1) % d] = -q.q1[(axis + 1) % d];
        q.q2[(axis + 2) % d] = -q.q2[(axis + 2) % d];
        worst_conserving = std::max(worst_conserving, std::abs(buu_detailed_balance(beta, mu, q, d)));

        Quadruple r;
        for (int a = 0; a < d; ++a) {
            r.p1.push_back(counter_uniform(201, 8 * k + a) - 0.5);
            r.p2.push_back(counter_uniform(202, 8 * k + a) - 0.5);
            r.q1.push_back(counter_uniform(203, 8 * k + a) - 0.5);
            r.q2.push_back(counter_uniform(204, 8 * k + a) - 0.5);
        }
        const double bound = buu_lipschitz_constant(beta) * std::abs(energy_violation(r));
        worst_ratio = std::max(worst_ratio, std::abs(buu_detailed_balance(beta, mu, r, d)) / bound);
    }
    return {worst_conserving < 1e-12 && worst_ratio <= 1.0,
            "max |B| conserving " + num(worst_conserving) + "; max |B| / (C |dE|) " + num(worst_ratio)};
}

// ---- 6 ------------------------------------------------------------------

std::vector<cplx> exact_evolution(const LatticeSpec& spec, const DisorderField& w, double eta, double t,
                                  const std::vector<cplx>& fhat) {
    const auto grid = MomentumGrid::of(spec);
    const auto n = static_cast<Eigen::Index>(spec.sites());
    Eigen::MatrixXd H = Eigen::MatrixXd::Zero(n, n);
    for (Eigen::Index x = 0; x < n; ++x) {
        H(x, x) += eta * w.omega[static_cast<std::size_t>(x)];
        const auto k = grid.coords(static_cast<std::size_t>(x));
        for (int a = 0; a < spec.dim(); ++a)
            for (int s : {-1, 1}) {
                auto kk = k;
                kk[a] += s;
                H(x, static_cast<Eigen::Index>(grid.index_of(kk))) += 0.5;
            }
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(H);
    const auto pos = inverse_transform(ComplexField(spec, Representation::momentum, fhat));
    Eigen::VectorXcd v = Eigen::Map<const Eigen::VectorXcd>(pos.values.data(), n);
    Eigen::VectorXcd c = es.eigenvectors().transpose().cast<cplx>() * v;
    for (Eigen::Index i = 0; i < n; ++i) c(i) *= std::polar(1.0, -t * es.eigenvalues()(i));
    Eigen::VectorXcd out = es.eigenvectors().cast<cplx>() * c;
    return forward_transform(ComplexField(spec, Representation::position, {out.data(), out.data() + n})).values;
}

Verdict free_dynamics() {
    bool pass = true;
    const LatticeSpec spec(3, 16);
    const auto grid = MomentumGrid::of(spec);
    const DispersionTable e(grid);
    std::vector<cplx> f(spec.sites());
    for (std::size_t i = 0; i < f.size(); ++i) f[i] = std::polar(1.0 + counter_uniform(3, i), 6.28 * counter_uniform(4, i));
    const auto w = sample_disorder(spec, 11);
    double phase_dev = 0.0;
    for (double t : {0.5, 7.0, 40.0}) {
        const auto g = evolve(ComplexField(spec, Representation::momentum, f), w, EvolutionParams(spec, 0.0, t, 0.05));
        for (std::size_t i = 0; i < f.size(); ++i)
            phase_dev = std::max(phase_dev, std::abs(g.values[i] - std::polar(1.0, -t * e[i]) * f[i]) / std::abs(f[i]));
    }
    pass = pass && phase_dev <= 1e-12;

    double unitarity = 0.0;
    const ComplexField f0(spec, Representation::momentum, f);
    for (double eta : {0.1, 0.5, 1.0})
        for (double t : {1.0, 10.0, 25.0}) {
            const auto g = evolve(f0, w, EvolutionParams(spec, eta, t, 0.05));
            unitarity = std::max(unitarity, std::abs(g.norm() / f0.norm() - 1.0));
        }
    pass = pass && unitarity <= 1e-10;

    const LatticeSpec s1(1, 32);
    const auto w1 = sample_disorder(s1, 12);
    std::vector<cplx> h(s1.sites());
    for (std::size_t i = 0; i < h.size(); ++i) h[i] = {counter_uniform(5, i) - 0.5, counter_uniform(6, i) - 0.5};
    const auto ref = exact_evolution(s1, w1, 0.7, 3.0, h);
    std::vector<double> errs;
    for (double dt : {0.1, 0.05, 0.025}) {
        const auto g = evolve(ComplexField(s1, Representation::momentum, h), w1, EvolutionParams(s1, 0.7, 3.0, dt));
        double m = 0.0;
        for (std::size_t i = 0; i < h.size(); ++i) m = std::max(m, std::abs(g.values[i] - ref[i]));
        errs.push_back(m);
    }
    std::string ratios;
    for (std::size_t i = 0; i + 1 < errs.size(); ++i) {
        const double r = errs[i] / errs[i + 1];
        pass = pass && std::abs(r - 4.0) <= 0.25 * 4.0;
        ratios += num(r) + " ";
    }
    return {pass, "phase deviation " + num(phase_dev) + "; unitarity " + num(unitarity) + "; step-halving ratios " +
                      ratios};
}

// ---- 7 ------------------------------------------------------------------

Verdict kinetic_convergence() {
    ConvergenceConfig cfg;
    cfg.spec = LatticeSpec(3, 32);
    cfg.continuum_per_axis = 32;
    cfg.T = 1.0;
    cfg.etas = {0.8, 0.4, 0.2};
    cfg.profile.kind = "fermi_dirac";
    cfg.profile.beta = 2.0;
    cfg.profile.mu = 0.5;
    cfg.realizations = 100;
    cfg.phases = 2;
    cfg.workers = 0;
    const auto r = run_convergence(cfg);
    std::string detail;
    bool sane = true;
    for (const auto& row : r.rows) {
        detail += "eta=" + num(row.eta) + ": err " + num(row.err, 4) + " +- " + num(row.err_se, 2) + "; ";
        sane = sane && row.n_samples >= 200 && std::abs(row.mass - row.mass_initial) <= 1e-9 &&
               row.max_excursion <= 4.0;
    }
    return {r.decreasing && sane, detail + (r.decreasing ? "decreasing" : "NOT decreasing") +
                                      (sane ? "" : "; mass or [0,1] bound check failed")};
}

// ---- 8 ------------------------------------------------------------------

Verdict quasifree_gap() {
    const LatticeSpec spec(1, 32);
    const auto J = InitialProfile::fermi_dirac(MomentumGrid::of(spec), 2.0, 0.5);
    const auto tset = TestFunctionSet::bumps(spec, {{0.2}, {-0.2}}, 0.05);
    const EnsemblePlan plan(8, 2000);  // the same realizations at every eta
    std::vector<GapReport> rows;
    for (double eta : {0.5, 0.25, 0.125})
        rows.push_back(quasifreeness_gap(tset, J, plan, EvolutionParams(spec, eta, 0.5 / (eta * eta), 0.05), 0));
    bool pass = true;
    std::string detail;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        detail += "eta=" + num(rows[i].eta) + ": " + num(rows[i].gap) + " +- " + num(rows[i].std_error, 2) + "; ";
        if (i > 0) pass = pass && rows[i - 1].gap - rows[i].gap > 2.0 * std::hypot(rows[i - 1].std_error, rows[i].std_error);
    }
    const double null_eta = quasifreeness_gap(tset, J, plan, EvolutionParams(spec, 0.0, 8.0, 0.05), 0).gap;
    const double null_t = quasifreeness_gap(tset, J, plan, EvolutionParams(spec, 0.5, 0.0, 0.05), 0).gap;
    const auto one = TestFunctionSet::bumps(spec, {{0.2}}, 0.05);
    const double null_r = quasifreeness_gap(one, J, plan, EvolutionParams(spec, 0.5, 2.0, 0.05), 0).gap;
    pass = pass && null_eta == 0.0 && null_t == 0.0 && null_r == 0.0;
    return {pass, detail + "nulls (eta=0, t=0, r=1): " + num(null_eta) + " " + num(null_t) + " " + num(null_r)};
}

// ---- 9 ------------------------------------------------------------------

Verdict schedule_arithmetic() {
    using big = boost::multiprecision::cpp_bin_float_50;
    double worst = 0.0;
    bool flags = true;
    std::string detail;
    for (const char* text : {"1e-6", "1e-9", "1e-12"}) {
        const big L = -boost::multiprecision::log(big(text));
        const big LL = boost::multiprecision::log(L);
        const big N = L / (10 * LL);
        const big log_kappa = 15 * LL;
        const big log_fact = boost::math::lgamma(N + 1);
        const big margin = N * log_kappa - big(3) / 2 * L;
        const auto s = schedule(std::stod(text), 1);
        auto rel = [](double a, const big& b) {
            const double bd = b.convert_to<double>();
            return std::abs(a - bd) / std::abs(bd);
        };
        worst = std::max({worst, rel(s.N, N), rel(s.kappa(), boost::multiprecision::exp(log_kappa)),
                          rel(s.log_N_factorial, log_fact)});
        // the oracle resolves the kappa inequality only up to its own precision
        const bool oracle_kappa = margin > big("1e-30") * L;
        flags = flags && s.factorial_lower == (log_fact > L / 11) && s.factorial_upper == (log_fact < L / 10) &&
                s.kappa_power == oracle_kappa;
        detail += std::string(text) + ": N=" + num(s.N, 6) + " kappa=" + num(s.kappa(), 6) + " flags " +
                  (s.factorial_lower ? "T" : "F") + (s.factorial_upper ? "T" : "F") + (s.kappa_power ? "T" : "F") +
                  "; ";
    }
    return {worst <= 1e-10 && flags, detail + "max relative deviation " + num(worst)};
}

// ---- 10 -----------------------------------------------------------------

Verdict reproducibility() {
    using namespace kinlab::cli;
    const nlohmann::json small = {{"lattice", {{"d", 2}, {"L", 8}}},
                                  {"continuum", {{"M", 8}, {"n_bins", 12}}},
                                  {"eta", {0.6, 0.3}},
                                  {"T", 0.3},
                                  {"ensemble", {{"realizations", 24}, {"phases", 2}, {"paths", 300}}},
                                  {"diagrams", {{"max_nbar", 3}}}};
    std::size_t compared = 0;
    std::string mismatched;
    for (const auto& kind : experiment_kinds()) {
        const auto cfg = parse_config(small, kind, {}).experiments.front();
        RunOptions one, eight;
        one.workers = 1;
        eight.workers = 8;
        const auto a = run_experiment(cfg, one), b = run_experiment(cfg, eight);
        for (std::size_t i = 0; i < a.files.size(); ++i) {
            ++compared;
            if (i >= b.files.size() || a.files[i] != b.files[i]) mismatched += kind + "/" + a.files[i].first + " ";
        }
    }
    return {mismatched.empty() && compared > 0,
            std::to_string(compared) + " output files compared across 1 and 8 workers" +
                (mismatched.empty() ? "" : "; mismatched: " + mismatched)};
}

}  // namespace

int main() {
    const std::vector<std::pair<std::string, std::function<Verdict()>>> criteria{
        {"combinatorics: pairing counts and dichotomy", combinatorics},
        {"wick oracle: Monte Carlo vs pairing sum", wick},
        {"boltzmann solvers cross-validation", boltzmann_cross},
        {"stationarity of energy functions", stationarity},
        {"BUU detailed balance", buu},
        {"free dynamics, unitarity, splitting order", free_dynamics},
        {"kinetic convergence trend", kinetic_convergence},
        {"quasifreeness gap trend", quasifree_gap},
        {"schedule arithmetic", schedule_arithmetic},
        {"reproducibility across worker counts", reproducibility}};
    int failed = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        const auto start = std::chrono::steady_clock::now();
        Verdict v;
        try {
            v = criteria[i].second();
        } catch (const std::exception& e) {
            v = {false, std::string("exception: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        std::cout << (v.pass ? "PASS" : "FAIL") << "  " << (i + 1) << ". " << criteria[i].first << " -- " << v.detail
                  << " [" << num(secs) << " s]" << std::endl;
        if (!v.pass) ++failed;
    }
    std::cout << (criteria.size() - failed) << "/" << criteria.size() << " criteria passed" << std::endl;
    return failed == 0 ? 0 : 1;
}
