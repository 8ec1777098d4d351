#include "kinlab/boltzmann.hpp"

#include "kinlab/csv.hpp"
#include "kinlab/microdynamics.hpp"
#include "kinlab/parallel.hpp"
#include "kinlab/random.hpp"
#include "kinlab/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <ostream>
#include <stdexcept>

namespace kinlab {

// ---- shells -------------------------------------------------------------

int shell_index(double energy, double e_min, double e_max, int n_bins) {
    if (n_bins < 1) throw std::invalid_argument("shell_index: n_bins must be >= 1");
    const double width = (e_max - e_min) / n_bins;
    const double mid = 0.5 * (e_min + e_max);
    const double x = energy - mid;
    long b;
    if (n_bins % 2 == 0) {
        const long half = n_bins / 2;
        b = x >= 0.0 ? half + static_cast<long>(std::floor(x / width))
                     : half - 1 - static_cast<long>(std::floor(-x / width));
    } else {
        // centered bin covers [-w/2, w/2]; mirrored outward from there
        const long half = n_bins / 2;
        const long k = static_cast<long>(std::floor(std::abs(x) / width + 0.5));
        b = x >= 0.0 ? half + k : half - k;
    }
    return static_cast<int>(std::clamp<long>(b, 0, n_bins - 1));
}

int EnergyShells::empty_bins() const {
    return static_cast<int>(std::count_if(members.begin(), members.end(), [](const auto& m) { return m.empty(); }));
}

double EnergyShells::max_rate() const { return rate.empty() ? 0.0 : *std::max_element(rate.begin(), rate.end()); }

EnergyShells build_shells(const MomentumGrid& grid, int d, int n_bins) {
    if (n_bins < 2) throw std::invalid_argument("build_shells: n_bins must be >= 2");
    if (d != grid.dim()) throw std::invalid_argument("build_shells: dimension does not match the grid");
    EnergyShells s{grid, n_bins, -double(d), double(d), 2.0 * d / n_bins, {}, {}, {}, {}};
    const DispersionTable energies(grid);
    s.bin_of.resize(grid.size());
    s.members.resize(static_cast<std::size_t>(n_bins));
    for (std::size_t i = 0; i < grid.size(); ++i) {
        int b = shell_index(energies[i], s.e_min, s.e_max, n_bins);
        // E = 0 sits on the middle edge; split each pair {p, p + 1/2} between the two sides
        if (n_bins % 2 == 0 && energies[i] == 0.0 && grid.half_shifted(i) < i) b = n_bins / 2 - 1;
        s.bin_of[i] = b;
        s.members[static_cast<std::size_t>(b)].push_back(i);
    }
    s.dos.resize(static_cast<std::size_t>(n_bins));
    s.rate.resize(static_cast<std::size_t>(n_bins));
    const double total = static_cast<double>(grid.size());
    for (std::size_t b = 0; b < s.members.size(); ++b) {
        s.dos[b] = static_cast<double>(s.members[b].size()) / total / s.width;
        s.rate[b] = 2.0 * std::numbers::pi * s.dos[b];
    }
    return s;
}

// ---- collision operator and solvers -------------------------------------

namespace {

void check_grid(const MomentumDistribution& F, const EnergyShells& shells) {
    if (!(F.grid == shells.grid)) throw std::invalid_argument("distribution and shells live on different grids");
}

}  // namespace

std::vector<double> shell_averages(const MomentumDistribution& F, const EnergyShells& shells) {
    check_grid(F, shells);
    std::vector<double> avg(shells.members.size(), 0.0);
    for (std::size_t b = 0; b < avg.size(); ++b) {
        const auto& m = shells.members[b];
        if (m.empty()) continue;
        // a bin-constant F averages to exactly that constant
        const double first = F.F[m.front()];
        bool uniform = true;
        double s = 0.0;
        for (auto i : m) {
            s += F.F[i];
            uniform = uniform && F.F[i] == first;
        }
        avg[b] = uniform ? first : s / static_cast<double>(m.size());
    }
    return avg;
}

MomentumDistribution collision_apply(const MomentumDistribution& F, const EnergyShells& shells) {
    const auto avg = shell_averages(F, shells);
    MomentumDistribution Q(F.grid);
    for (std::size_t i = 0; i < F.F.size(); ++i) {
        const auto b = static_cast<std::size_t>(shells.bin_of[i]);
        Q.F[i] = shells.rate[b] * (avg[b] - F.F[i]);
    }
    return Q;
}

MomentumDistribution solve_exact(const MomentumDistribution& F0, const EnergyShells& shells, double T) {
    if (!(T >= 0.0)) throw std::invalid_argument("solve_exact: T must be >= 0");
    check_grid(F0, shells);
    if (T == 0.0) return F0;
    const auto avg = shell_averages(F0, shells);
    MomentumDistribution out(F0.grid);
    for (std::size_t i = 0; i < F0.F.size(); ++i) {
        const auto b = static_cast<std::size_t>(shells.bin_of[i]);
        out.F[i] = avg[b] + std::exp(-shells.rate[b] * T) * (F0.F[i] - avg[b]);
    }
    return out;
}

MomentumDistribution solve_ode(const MomentumDistribution& F0, const EnergyShells& shells, double T, double h) {
    if (!(h > 0.0)) throw std::invalid_argument("solve_ode: h must be > 0");
    if (!(T >= 0.0)) throw std::invalid_argument("solve_ode: T must be >= 0");
    check_grid(F0, shells);
    MomentumDistribution F = F0;
    if (T == 0.0) return F;
    const auto steps = static_cast<std::size_t>(std::max(1.0, std::ceil(T / h - 1e-9)));
    const double dt = T / static_cast<double>(steps);
    const std::size_t n = F.F.size();
    MomentumDistribution stage(F.grid);
    for (std::size_t s = 0; s < steps; ++s) {
        const auto k1 = collision_apply(F, shells);
        for (std::size_t i = 0; i < n; ++i) stage.F[i] = F.F[i] + 0.5 * dt * k1.F[i];
        const auto k2 = collision_apply(stage, shells);
        for (std::size_t i = 0; i < n; ++i) stage.F[i] = F.F[i] + 0.5 * dt * k2.F[i];
        const auto k3 = collision_apply(stage, shells);
        for (std::size_t i = 0; i < n; ++i) stage.F[i] = F.F[i] + dt * k3.F[i];
        const auto k4 = collision_apply(stage, shells);
        for (std::size_t i = 0; i < n; ++i)
            F.F[i] += dt / 6.0 * (k1.F[i] + 2.0 * k2.F[i] + 2.0 * k3.F[i] + k4.F[i]);
    }
    return F;
}

DistributionEstimate solve_collision_history(const MomentumDistribution& F0, const EnergyShells& shells,
                                             double T, std::size_t n_paths, std::uint64_t seed, int workers) {
    check_grid(F0, shells);
    if (n_paths < 1) throw std::invalid_argument("solve_collision_history: n_paths must be >= 1");
    if (!(T >= 0.0)) throw std::invalid_argument("solve_collision_history: T must be >= 0");
    const std::size_t n = F0.F.size();
    DistributionEstimate est{MomentumDistribution(F0.grid), std::vector<double>(n, 0.0), n_paths};

    parallel_for(
        n, workers, [] { return 0; },
        [&](int&, std::size_t p) {
            const auto b = static_cast<std::size_t>(shells.bin_of[p]);
            const double rate = shells.rate[b];
            const auto& bin = shells.members[b];
            PathRng rng(seed, p);
            RunningStats stats;
            for (std::size_t path = 0; path < n_paths; ++path) {
                std::size_t at = p;
                if (rate > 0.0) {
                    double clock = rng.exponential(rate);
                    while (clock < T) {
                        at = bin[rng.below(bin.size())];
                        clock += rng.exponential(rate);
                    }
                }
                stats.add(F0.F[at]);
            }
            est.dist.F[p] = stats.mean;
            est.std_error[p] = stats.std_error();
        },
        64);
    return est;
}

double stationarity_residual(const MomentumDistribution& F, const EnergyShells& shells) {
    const auto Q = collision_apply(F, shells);
    double r = 0.0;
    for (double q : Q.F) r = std::max(r, std::abs(q));
    return r;
}

// ---- BUU detailed balance -----------------------------------------------

double energy_violation(const Quadruple& q) {
    return dispersion(q.p1) + dispersion(q.p2) - dispersion(q.q1) - dispersion(q.q2);
}

double buu_detailed_balance(double beta, double mu, const Quadruple& q, int d) {
    if (!std::isfinite(beta) || beta < 0.0) throw std::invalid_argument("buu_detailed_balance: beta must be finite and >= 0");
    for (const auto* v : {&q.p1, &q.p2, &q.q1, &q.q2})
        if (v->size() != static_cast<std::size_t>(d))
            throw std::invalid_argument("buu_detailed_balance: momentum has wrong dimension");
    auto occ = [&](const std::vector<double>& p) { return fermi_dirac(dispersion(p), beta, mu); };
    auto hole = [&](const std::vector<double>& p) { return fermi_dirac(-dispersion(p), beta, -mu); };
    const double f1 = occ(q.p1), f2 = occ(q.p2), f3 = occ(q.q1), f4 = occ(q.q2);
    const double h1 = hole(q.p1), h2 = hole(q.p2), h3 = hole(q.q1), h4 = hole(q.q2);
    return f1 * f2 * h3 * h4 - f3 * f4 * h1 * h2;
}

double buu_lipschitz_constant(double beta) {
    if (!std::isfinite(beta) || beta < 0.0) throw std::invalid_argument("buu_lipschitz_constant: beta must be finite and >= 0");
    return beta;
}

// ---- output -------------------------------------------------------------

void write_dos_csv(std::ostream& os, const EnergyShells& shells) {
    csv::Writer w(os);
    w.header({"E_center", "nu", "population"});
    for (int b = 0; b < shells.n_bins; ++b) {
        w.field(shells.center(b)).field(shells.dos[static_cast<std::size_t>(b)]).field(shells.population(b));
        w.end_row();
    }
}

}  // namespace kinlab
