#include "kinlab/microdynamics.hpp"

#include "kinlab/parallel.hpp"
#include "kinlab/random.hpp"
#include "kinlab/stats.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace kinlab {

// ---- parameters ---------------------------------------------------------

namespace {

std::size_t step_count(double t, double dt) {
    const double ratio = std::abs(t) / dt;
    if (ratio > 1e12) throw std::invalid_argument("EvolutionParams: t / dt exceeds 1e12 steps");
    // the 1e-9 slack keeps t = k * dt from rounding up to k + 1 steps
    const auto n = static_cast<std::size_t>(std::ceil(ratio - 1e-9));
    return n < 1 ? 1 : n;
}

}  // namespace

EvolutionParams::EvolutionParams(LatticeSpec s, double eta_, double t_, double dt_)
    : spec(s), eta(eta_), t(t_), dt(dt_) {
    if (!(dt > 0.0) || !std::isfinite(dt)) throw std::invalid_argument("EvolutionParams: dt must be > 0");
    if (!(t >= 0.0) || !std::isfinite(t)) throw std::invalid_argument("EvolutionParams: t must be >= 0");
    if (!(eta >= 0.0) || !std::isfinite(eta)) throw std::invalid_argument("EvolutionParams: eta must be >= 0");
    step_count(t, dt);
}

std::size_t EvolutionParams::steps() const { return step_count(t, dt); }

KineticSchedule::KineticSchedule(double T, double eta) : T_(T), eta_(eta), t_(0.0) {
    if (!(T > 0.0) || !std::isfinite(T)) throw std::invalid_argument("KineticSchedule: T must be > 0");
    if (!(eta > 0.0) || !std::isfinite(eta)) throw std::invalid_argument("KineticSchedule: eta must be > 0");
    t_ = T / (eta * eta);
}

// ---- initial profiles ---------------------------------------------------

double fermi_dirac(double energy, double beta, double mu) {
    if (std::isnan(beta) || beta < 0.0) throw std::invalid_argument("fermi_dirac: beta must be >= 0");
    if (std::isinf(beta)) return energy < mu ? 1.0 : 0.0;
    const double x = beta * (energy - mu);
    if (x > 0.0) {
        const double e = std::exp(-x);
        return e / (1.0 + e);
    }
    return 1.0 / (1.0 + std::exp(x));
}

InitialProfile::InitialProfile(MomentumGrid grid, std::vector<double> values,
                               std::optional<FermiDiracParams> fd)
    : grid_(grid), values_(std::move(values)), fd_(fd) {
    if (values_.size() != grid_.size()) throw std::invalid_argument("InitialProfile: size mismatch");
    for (double v : values_)
        if (!(v >= 0.0 && v <= 1.0)) throw std::invalid_argument("InitialProfile: J must lie in [0, 1]");
}

InitialProfile InitialProfile::fermi_dirac(const MomentumGrid& grid, double beta, double mu) {
    if (!std::isfinite(mu)) throw std::invalid_argument("InitialProfile: mu must be finite");
    const DispersionTable e(grid);
    std::vector<double> v(grid.size());
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = kinlab::fermi_dirac(e[i], beta, mu);
    return {grid, std::move(v), FermiDiracParams{beta, mu}};
}

InitialProfile InitialProfile::constant(const MomentumGrid& grid, double c) {
    return {grid, std::vector<double>(grid.size(), c), std::nullopt};
}

InitialProfile InitialProfile::from_h(const MomentumGrid& grid, std::span<const double> h) {
    if (h.size() != grid.size()) throw std::invalid_argument("InitialProfile::from_h: size mismatch");
    std::vector<double> v(grid.size());
    // 1/(1+e^h) is the Fermi-Dirac form with beta (E - mu) replaced by h
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = kinlab::fermi_dirac(h[i], 1.0, 0.0);
    return {grid, std::move(v), std::nullopt};
}

double torus_distance_squared(std::span<const double> p, std::span<const double> c) {
    if (p.size() != c.size()) throw std::invalid_argument("torus_distance_squared: dimension mismatch");
    double s = 0.0;
    for (std::size_t a = 0; a < p.size(); ++a) {
        double diff = p[a] - c[a];
        diff -= std::round(diff);
        s += diff * diff;
    }
    return s;
}

InitialProfile InitialProfile::bump(const MomentumGrid& grid, std::span<const double> center,
                                    double width, double height) {
    if (center.size() != static_cast<std::size_t>(grid.dim()))
        throw std::invalid_argument("InitialProfile::bump: center has wrong dimension");
    if (!(width > 0.0)) throw std::invalid_argument("InitialProfile::bump: width must be > 0");
    std::vector<double> v(grid.size());
    for (std::size_t i = 0; i < v.size(); ++i)
        v[i] = height * std::exp(-torus_distance_squared(grid.momenta(i), center) / (2.0 * width * width));
    return {grid, std::move(v), std::nullopt};
}

InitialProfile InitialProfile::from_values(const MomentumGrid& grid, std::vector<double> values) {
    return {grid, std::move(values), std::nullopt};
}

// ---- propagator ---------------------------------------------------------

SplitStepPropagator::SplitStepPropagator(const LatticeSpec& spec)
    : engine_(spec), site_fft_(fft_order_permutation(spec)) {
    const DispersionTable e(MomentumGrid::of(spec));
    energy_fft_.resize(spec.sites());
    for (std::size_t i = 0; i < spec.sites(); ++i) energy_fft_[site_fft_[i]] = e[i];
}

void SplitStepPropagator::check(const DisorderField& w, std::size_t size) const {
    if (!(w.spec == spec())) throw std::invalid_argument("propagator: disorder lattice mismatch");
    if (size != spec().sites()) throw std::invalid_argument("propagator: state size mismatch");
}

void SplitStepPropagator::evolve(std::span<cplx> psi, const DisorderField& w, double eta, double t,
                                 double dt, bool adjoint) {
    check(w, psi.size());
    if (!(dt > 0.0)) throw std::invalid_argument("evolve: dt must be > 0");
    if (t == 0.0) return;
    const std::size_t n_steps = step_count(t, dt);
    const double s = (adjoint ? -t : t) / static_cast<double>(n_steps);
    const std::size_t n = spec().sites();
    const double inv_n = 1.0 / static_cast<double>(n);

    std::vector<cplx> half(n), potential(n);
    for (std::size_t j = 0; j < n; ++j) half[j] = std::polar(1.0, -0.5 * s * energy_fft_[j]);
    for (std::size_t x = 0; x < n; ++x) potential[site_fft_[x]] = std::polar(inv_n, -s * eta * w.omega[x]);

    engine_.load(psi);
    auto data = engine_.buffer();
    for (std::size_t step = 0; step < n_steps; ++step) {
        for (std::size_t j = 0; j < n; ++j) data[j] *= half[j];
        engine_.backward();
        for (std::size_t j = 0; j < n; ++j) data[j] *= potential[j];
        engine_.forward();
        for (std::size_t j = 0; j < n; ++j) data[j] *= half[j];
    }
    engine_.store(psi);
}

void SplitStepPropagator::duhamel(std::vector<std::vector<cplx>>& levels, const DisorderField& w,
                                  double eta, double t, double dt) {
    if (levels.empty()) throw std::invalid_argument("duhamel: need at least level 0");
    check(w, levels[0].size());
    if (!(dt > 0.0)) throw std::invalid_argument("duhamel: dt must be > 0");
    const std::size_t n = spec().sites();
    const std::size_t top = levels.size();

    // work in FFT order throughout; level 0 is the initial state, the rest start at 0
    std::vector<std::vector<cplx>> state(top, std::vector<cplx>(n));
    {
        engine_.load(levels[0]);
        auto data = engine_.buffer();
        std::copy(data.begin(), data.end(), state[0].begin());
    }

    if (t != 0.0) {
        const std::size_t n_steps = step_count(t, dt);
        const double s = t / static_cast<double>(n_steps);
        const double inv_n = 1.0 / static_cast<double>(n);
        std::vector<cplx> half(n), a(n);
        for (std::size_t j = 0; j < n; ++j) half[j] = std::polar(1.0, -0.5 * s * energy_fft_[j]);
        for (std::size_t x = 0; x < n; ++x) a[site_fft_[x]] = cplx(0.0, -s * eta * w.omega[x]);

        auto data = engine_.buffer();
        for (std::size_t step = 0; step < n_steps; ++step) {
            for (auto& level : state) {
                for (std::size_t j = 0; j < n; ++j) level[j] *= half[j];
                std::copy(level.begin(), level.end(), data.begin());
                engine_.backward();
                std::copy(data.begin(), data.end(), level.begin());
            }
            // exact exponential of the nilpotent coupling: new_k = sum_m a^m/m! old_{k-m};
            // descending k so that lower levels are still old when read
            for (std::size_t j = 0; j < n; ++j) {
                for (std::size_t k = top; k-- > 0;) {
                    cplx acc = state[k][j];
                    cplx term = 1.0;
                    for (std::size_t m = 1; m <= k; ++m) {
                        term *= a[j] / static_cast<double>(m);
                        acc += term * state[k - m][j];
                    }
                    state[k][j] = acc * inv_n;
                }
            }
            for (auto& level : state) {
                std::copy(level.begin(), level.end(), data.begin());
                engine_.forward();
                for (std::size_t j = 0; j < n; ++j) level[j] = data[j] * half[j];
            }
        }
    }

    for (std::size_t k = 0; k < top; ++k) {
        levels[k].resize(n);
        auto data = engine_.buffer();
        std::copy(state[k].begin(), state[k].end(), data.begin());
        engine_.store(levels[k]);
    }
}

// ---- field-level wrappers -----------------------------------------------

namespace {

ComplexField run(const ComplexField& f0, const DisorderField& w, const EvolutionParams& p, bool adjoint) {
    if (!(f0.spec == p.spec) || !(w.spec == p.spec)) throw std::invalid_argument("evolve: lattice mismatch");
    if (!(f0.norm() > 0.0)) throw std::invalid_argument("evolve: initial state must be nonzero");
    ComplexField psi = f0.representation == Representation::momentum ? f0 : forward_transform(f0);
    SplitStepPropagator prop(p.spec);
    prop.evolve(psi.values, w, p.eta, p.t, p.dt, adjoint);
    return f0.representation == Representation::momentum ? psi : inverse_transform(psi);
}

}  // namespace

ComplexField evolve(const ComplexField& f0, const DisorderField& w, const EvolutionParams& params) {
    return run(f0, w, params, false);
}

ComplexField evolve_adjoint(const ComplexField& f0, const DisorderField& w, const EvolutionParams& params) {
    return run(f0, w, params, true);
}

std::vector<ComplexField> duhamel_terms(const ComplexField& f0, const DisorderField& w,
                                        const EvolutionParams& params, int N) {
    if (N < 0) throw std::invalid_argument("duhamel_terms: N must be >= 0");
    if (!(f0.spec == params.spec) || !(w.spec == params.spec))
        throw std::invalid_argument("duhamel_terms: lattice mismatch");
    const ComplexField start = f0.representation == Representation::momentum ? f0 : forward_transform(f0);
    std::vector<std::vector<cplx>> levels(static_cast<std::size_t>(N) + 1);
    levels[0] = start.values;
    SplitStepPropagator prop(params.spec);
    prop.duhamel(levels, w, params.eta, params.t, params.dt);
    std::vector<ComplexField> out;
    out.reserve(levels.size());
    for (auto& v : levels) {
        ComplexField g(params.spec, Representation::momentum, std::move(v));
        out.push_back(f0.representation == Representation::momentum ? std::move(g) : inverse_transform(g));
    }
    return out;
}

// ---- random-phase estimators --------------------------------------------

namespace {

struct PhaseContext {
    SplitStepPropagator prop;
    std::vector<cplx> psi;
};

void check_profile(const InitialProfile& J, const EvolutionParams& params) {
    if (!(J.grid() == MomentumGrid::of(params.spec)))
        throw std::invalid_argument("random-phase estimator: J must live on the lattice dual grid");
}

/// psi_0(k) = sqrt(J(k)) e^{i theta_k}, propagated with the adjoint evolution.
void random_phase_state(PhaseContext& ctx, const InitialProfile& J, const DisorderField& w,
                        const EvolutionParams& params, std::uint64_t seed, std::size_t phase) {
    const std::uint64_t key = substream(seed, phase + 1);
    for (std::size_t k = 0; k < ctx.psi.size(); ++k)
        ctx.psi[k] = std::polar(std::sqrt(J[k]), 2.0 * std::numbers::pi * counter_uniform(key, k));
    ctx.prop.evolve(ctx.psi, w, params.eta, params.t, params.dt, true);
}

}  // namespace

DistributionEstimate momentum_density(const InitialProfile& J, const EnsemblePlan& plan,
                                      const KineticSchedule& sched, const EvolutionParams& params,
                                      int phases_per_realization, int workers) {
    check_profile(J, params);
    if (phases_per_realization < 1) throw std::invalid_argument("momentum_density: phases_per_realization must be >= 1");
    if (params.eta != sched.eta() || std::abs(params.t - sched.t()) > 1e-12 * sched.t())
        throw std::invalid_argument("momentum_density: evolution parameters disagree with the kinetic schedule");

    const std::size_t n = params.spec.sites();
    struct Acc {
        VectorStats realizations;
        VectorStats phases;
    };
    const Acc identity{VectorStats(n), VectorStats(n)};
    const auto phases = static_cast<std::size_t>(phases_per_realization);

    const Acc total = ordered_reduce(
        plan.size(), workers, identity,
        [&] { return PhaseContext{SplitStepPropagator(params.spec), std::vector<cplx>(n)}; },
        [&](PhaseContext& ctx, Acc& acc, std::size_t i) {
            const auto seed = plan.seed(i);
            const auto w = sample_disorder(params.spec, seed);
            VectorStats within(n);
            std::vector<double> y(n);
            for (std::size_t j = 0; j < phases; ++j) {
                random_phase_state(ctx, J, w, params, seed, j);
                for (std::size_t p = 0; p < n; ++p) y[p] = std::norm(ctx.psi[p]);
                within.add(y);
            }
            acc.realizations.add(within.mean);
            acc.phases.merge(within);
        },
        [](Acc& a, const Acc& b) {
            a.realizations.merge(b.realizations);
            a.phases.merge(b.phases);
        });

    DistributionEstimate est{MomentumDistribution(J.grid(), total.realizations.mean),
                             plan.size() > 1 ? total.realizations.std_error() : total.phases.std_error(),
                             plan.size() * phases};
    return est;
}

OffDiagonalEstimate momentum_offdiagonal(const InitialProfile& J, const EnsemblePlan& plan,
                                         const EvolutionParams& params, std::size_t p, std::size_t q,
                                         int phases_per_realization, int workers) {
    check_profile(J, params);
    if (p >= params.spec.sites() || q >= params.spec.sites())
        throw std::invalid_argument("momentum_offdiagonal: index out of range");
    if (phases_per_realization < 1) throw std::invalid_argument("momentum_offdiagonal: phases_per_realization must be >= 1");
    const std::size_t n = params.spec.sites();
    const auto phases = static_cast<std::size_t>(phases_per_realization);
    struct Acc {
        ComplexStats realizations;
        ComplexStats phases;
    };

    const Acc total = ordered_reduce(
        plan.size(), workers, Acc{},
        [&] { return PhaseContext{SplitStepPropagator(params.spec), std::vector<cplx>(n)}; },
        [&](PhaseContext& ctx, Acc& acc, std::size_t i) {
            const auto seed = plan.seed(i);
            const auto w = sample_disorder(params.spec, seed);
            ComplexStats within;
            for (std::size_t j = 0; j < phases; ++j) {
                random_phase_state(ctx, J, w, params, seed, j);
                within.add(ctx.psi[p] * std::conj(ctx.psi[q]));
            }
            acc.realizations.add(within.mean);
            acc.phases.merge(within);
        },
        [](Acc& a, const Acc& b) {
            a.realizations.merge(b.realizations);
            a.phases.merge(b.phases);
        });

    return {total.realizations.mean,
            plan.size() > 1 ? total.realizations.std_error() : total.phases.std_error(),
            plan.size() * phases};
}

}  // namespace kinlab
