#include "kinlab/experiments.hpp"

#include "kinlab/csv.hpp"
#include "kinlab/parallel.hpp"
#include "kinlab/random.hpp"
#include "kinlab/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace kinlab {

InitialProfile ProfileSpec::build(const MomentumGrid& grid) const {
    if (kind == "fermi_dirac") return InitialProfile::fermi_dirac(grid, beta, mu);
    if (kind == "constant") return InitialProfile::constant(grid, c);
    if (kind == "bump") {
        auto ctr = center.empty() ? std::vector<double>(static_cast<std::size_t>(grid.dim()), 0.0) : center;
        return InitialProfile::bump(grid, ctr, width, height);
    }
    throw std::invalid_argument("unknown profile kind '" + kind + "'");
}

double propagation_cost_seconds(const LatticeSpec& spec, double steps) {
    const double n = static_cast<double>(spec.sites());
    return 1.5e-9 * steps * n * std::max(1.0, std::log2(n));
}

namespace {

struct PhaseCtx {
    SplitStepPropagator prop;
    std::vector<cplx> psi;
    std::vector<double> y;
};

}  // namespace

ConvergenceResult run_convergence(const ConvergenceConfig& cfg) {
    if (cfg.etas.empty()) throw std::invalid_argument("run_convergence: empty eta list");
    for (std::size_t i = 0; i < cfg.etas.size(); ++i) {
        if (!(cfg.etas[i] > 0.0)) throw std::invalid_argument("run_convergence: eta must be > 0");
        if (i > 0 && !(cfg.etas[i] < cfg.etas[i - 1]))
            throw std::invalid_argument("run_convergence: eta list must be strictly decreasing");
    }
    if (cfg.realizations < 2) throw std::invalid_argument("run_convergence: need at least 2 realizations");
    if (cfg.phases < 1) throw std::invalid_argument("run_convergence: phases must be >= 1");

    const auto& spec = cfg.spec;
    const auto lattice = MomentumGrid::of(spec);
    const MomentumGrid continuum(spec.dim(), cfg.continuum_per_axis);
    const InitialProfile J = cfg.profile.build(lattice);
    const InitialProfile J_cont = cfg.profile.build(continuum);

    EnergyShells shells = build_shells(continuum, spec.dim(), cfg.n_bins);
    const MomentumDistribution boltz = solve_exact(J_cont.as_distribution(), shells, cfg.T);
    const auto boltz_shell = shell_averages(boltz, shells);

    // continuum point -> lattice point
    std::vector<std::size_t> to_lattice(continuum.size());
    for (std::size_t P = 0; P < continuum.size(); ++P) to_lattice[P] = nearest_momentum(continuum.momenta(P), spec);

    const auto n_bins = static_cast<std::size_t>(cfg.n_bins);
    std::vector<double> w_bin(n_bins);
    for (std::size_t b = 0; b < n_bins; ++b)
        w_bin[b] = static_cast<double>(shells.members[b].size()) * continuum.weight();

    ConvergenceResult result{{}, {}, boltz, shells, true};
    const std::size_t n = spec.sites();

    for (double eta : cfg.etas) {
        const KineticSchedule sched(cfg.T, eta);
        const EvolutionParams params(spec, eta, sched.t(), cfg.dt);
        const EnsemblePlan plan(cfg.seed, cfg.realizations);

        struct Acc {
            VectorStats points;
            std::vector<std::vector<double>> shell_rows;  // per realization, in index order
            RunningStats mass;
        };
        const Acc identity{VectorStats(n), {}, {}};
        const Acc acc = ordered_reduce(
            plan.size(), cfg.workers, identity,
            [&] { return PhaseCtx{SplitStepPropagator(spec), std::vector<cplx>(n), std::vector<double>(n)}; },
            [&](PhaseCtx& ctx, Acc& a, std::size_t i) {
                const auto seed = plan.seed(i);
                const auto w = sample_disorder(spec, seed);
                std::fill(ctx.y.begin(), ctx.y.end(), 0.0);
                for (int j = 0; j < cfg.phases; ++j) {
                    const std::uint64_t key = substream(seed, static_cast<std::uint64_t>(j) + 1);
                    for (std::size_t k = 0; k < n; ++k)
                        ctx.psi[k] = std::polar(std::sqrt(J[k]), 2.0 * std::numbers::pi * counter_uniform(key, k));
                    ctx.prop.evolve(ctx.psi, w, eta, params.t, params.dt, true);
                    for (std::size_t k = 0; k < n; ++k) ctx.y[k] += std::norm(ctx.psi[k]);
                }
                double m = 0.0;
                for (auto& v : ctx.y) {
                    v /= cfg.phases;
                    m += v;
                }
                a.points.add(ctx.y);
                a.mass.add(m / static_cast<double>(n));
                std::vector<double> s(n_bins, 0.0);
                for (std::size_t b = 0; b < n_bins; ++b) {
                    const auto& mem = shells.members[b];
                    if (mem.empty()) continue;
                    double sum = 0.0;
                    for (auto P : mem) sum += ctx.y[to_lattice[P]];
                    s[b] = sum / static_cast<double>(mem.size());
                }
                a.shell_rows.push_back(std::move(s));
            },
            [](Acc& a, const Acc& b) {
                a.points.merge(b.points);
                a.mass.merge(b.mass);
                a.shell_rows.insert(a.shell_rows.end(), b.shell_rows.begin(), b.shell_rows.end());
            });

        const double R = static_cast<double>(acc.shell_rows.size());
        VectorStats shell_stats(n_bins);
        for (const auto& s : acc.shell_rows) shell_stats.add(s);
        const auto shell_se = shell_stats.std_error();

        // shell-projected error with clustered delta-method standard error
        double err2 = 0.0;
        std::vector<double> grad(n_bins, 0.0);
        for (std::size_t b = 0; b < n_bins; ++b) {
            if (w_bin[b] == 0.0) continue;
            const double diff = shell_stats.mean[b] - boltz_shell[b];
            err2 += w_bin[b] * (diff * diff - shell_se[b] * shell_se[b]);
            grad[b] = 2.0 * w_bin[b] * diff;
        }
        RunningStats lin;
        for (const auto& s : acc.shell_rows) {
            double z = 0.0;
            for (std::size_t b = 0; b < n_bins; ++b) z += grad[b] * s[b];
            lin.add(z);
        }
        const double err = std::sqrt(std::max(err2, 0.0));
        const double err2_se = lin.std_error();
        const double err_se = err > 0.0 ? err2_se / (2.0 * err) : std::sqrt(err2_se);

        // pointwise error; standard error neglects correlations between points
        const auto point_se = acc.points.std_error();
        double raw2 = 0.0, raw_var = 0.0;
        for (std::size_t P = 0; P < continuum.size(); ++P) {
            const auto k = to_lattice[P];
            const double diff = acc.points.mean[k] - boltz.F[P];
            raw2 += continuum.weight() * (diff * diff - point_se[k] * point_se[k]);
            const double g = 2.0 * continuum.weight() * diff;
            raw_var += g * g * point_se[k] * point_se[k];
        }
        const double raw_err = std::sqrt(std::max(raw2, 0.0));
        const double raw_err_se = raw_err > 0.0 ? std::sqrt(raw_var) / (2.0 * raw_err) : std::sqrt(std::sqrt(raw_var));

        double excursion = 0.0;
        for (std::size_t k = 0; k < n; ++k) {
            const double f = acc.points.mean[k];
            const double outside = f < 0.0 ? -f : (f > 1.0 ? f - 1.0 : 0.0);
            if (outside > 0.0)
                excursion = std::max(excursion, point_se[k] > 0.0 ? outside / point_se[k] : INFINITY);
        }

        double mass0 = 0.0;
        for (double v : J.values()) mass0 += v;
        mass0 /= static_cast<double>(n);

        result.rows.push_back({eta, params.t, params.steps(), static_cast<std::size_t>(R) * cfg.phases, err, err_se,
                               raw_err, raw_err_se, acc.mass.mean, acc.mass.std_error(), mass0, excursion});
        result.empirical.push_back({MomentumDistribution(lattice, acc.points.mean), point_se,
                                    static_cast<std::size_t>(R) * cfg.phases});
    }

    for (std::size_t i = 1; i < result.rows.size(); ++i) {
        const auto& a = result.rows[i - 1];
        const auto& b = result.rows[i];
        if (!(a.err - b.err > std::hypot(a.err_se, b.err_se))) result.decreasing = false;
    }
    return result;
}

void write_convergence_csv(std::ostream& os, const ConvergenceResult& r) {
    csv::Writer w(os);
    w.header({"eta", "t", "steps", "n_samples", "err", "err_se", "raw_err", "raw_err_se", "mass", "mass_se",
              "mass_initial", "max_excursion_sigma"});
    for (const auto& row : r.rows) {
        w.field(row.eta).field(row.t).field(row.steps).field(row.n_samples).field(row.err).field(row.err_se);
        w.field(row.raw_err).field(row.raw_err_se).field(row.mass).field(row.mass_se).field(row.mass_initial);
        w.field(row.max_excursion);
        w.end_row();
    }
}

void write_shell_profiles_csv(std::ostream& os, const ConvergenceConfig& cfg, const ConvergenceResult& r) {
    const auto& shells = r.shells;
    const auto boltz_shell = shell_averages(r.boltzmann, shells);
    csv::Writer w(os);
    w.header({"eta", "E_center", "population", "F_empirical", "F_boltzmann"});
    for (std::size_t i = 0; i < r.rows.size(); ++i) {
        const auto& emp = r.empirical[i];
        for (int b = 0; b < shells.n_bins; ++b) {
            const auto& mem = shells.members[static_cast<std::size_t>(b)];
            if (mem.empty()) continue;
            double sum = 0.0;
            for (auto P : mem) sum += emp.dist.F[nearest_momentum(shells.grid.momenta(P), cfg.spec)];
            w.field(r.rows[i].eta).field(shells.center(b)).field(mem.size());
            w.field(sum / static_cast<double>(mem.size())).field(boltz_shell[static_cast<std::size_t>(b)]);
            w.end_row();
        }
    }
}

}  // namespace kinlab
