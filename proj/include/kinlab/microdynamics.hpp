#pragma once

#include "kinlab/disorder.hpp"
#include "kinlab/distribution.hpp"
#include "kinlab/fourier.hpp"
#include "kinlab/lattice.hpp"

#include <complex>
#include <cstddef>
#include <optional>
#include <span>
#include <vector>

namespace kinlab {

/// Integration parameters for i d/dt f = (E + eta V) f.
///
/// The step count is ceil(t / dt) (at least 1) and the effective step is
/// t / steps, so the final time is exactly t and the step never exceeds dt.
struct EvolutionParams {
    LatticeSpec spec;
    double eta;
    double t;
    double dt;

    EvolutionParams(LatticeSpec spec, double eta, double t, double dt);

    std::size_t steps() const;
    double step() const { return t / static_cast<double>(steps()); }
};

/// Kinetic scaling t = T / eta^2, epsilon = 1 / t.
class KineticSchedule {
public:
    KineticSchedule(double T, double eta);

    double T() const { return T_; }
    double eta() const { return eta_; }
    double t() const { return t_; }
    double epsilon() const { return 1.0 / t_; }

private:
    double T_;
    double eta_;
    double t_;
};

/// 1 / (1 + e^{beta (E - mu)}), evaluated without overflow. beta = +inf gives
/// the indicator of E < mu; beta = 0 gives 1/2.
double fermi_dirac(double energy, double beta, double mu);

struct FermiDiracParams {
    double beta;
    double mu;
};

/// Initial momentum occupation J(p), 0 <= J <= 1, on the dual grid.
class InitialProfile {
public:
    static InitialProfile fermi_dirac(const MomentumGrid& grid, double beta, double mu);
    static InitialProfile constant(const MomentumGrid& grid, double c);
    /// J = 1 / (1 + e^{h(p)}).
    static InitialProfile from_h(const MomentumGrid& grid, std::span<const double> h);
    /// Periodic Gaussian bump height * exp(-dist(p, center)^2 / (2 width^2)), height in [0, 1].
    static InitialProfile bump(const MomentumGrid& grid, std::span<const double> center, double width,
                               double height = 1.0);
    static InitialProfile from_values(const MomentumGrid& grid, std::vector<double> values);

    const MomentumGrid& grid() const { return grid_; }
    std::span<const double> values() const { return values_; }
    double operator[](std::size_t i) const { return values_[i]; }
    const std::optional<FermiDiracParams>& fermi_dirac_params() const { return fd_; }

    MomentumDistribution as_distribution() const { return MomentumDistribution(grid_, values_); }

private:
    InitialProfile(MomentumGrid grid, std::vector<double> values, std::optional<FermiDiracParams> fd);

    MomentumGrid grid_;
    std::vector<double> values_;
    std::optional<FermiDiracParams> fd_;
};

/// Periodic squared distance on the torus between p and c, per-axis minimum image.
double torus_distance_squared(std::span<const double> p, std::span<const double> c);

/// Strang splitting e^{-i dt E/2} e^{-i dt eta omega} e^{-i dt E/2} on one lattice.
///
/// States passed in and out are lexicographic momentum-space vectors (the
/// unnormalized transform). The engine keeps its own FFTW plans, so one
/// propagator per thread.
class SplitStepPropagator {
public:
    explicit SplitStepPropagator(const LatticeSpec& spec);

    const LatticeSpec& spec() const { return engine_.spec(); }

    /// e^{-i t H} psi if !adjoint, e^{+i t H} psi otherwise. H is real
    /// symmetric, so the adjoint is the same scheme run with a negated step.
    void evolve(std::span<cplx> psi, const DisorderField& w, double eta, double t, double dt,
                bool adjoint = false);

    /// Levels 0..N of the Duhamel hierarchy i d/dt f^(n) = E f^(n) + eta V f^(n-1).
    /// levels[0] holds the initial state on entry, the rest are ignored and overwritten.
    void duhamel(std::vector<std::vector<cplx>>& levels, const DisorderField& w, double eta, double t,
                 double dt);

private:
    void check(const DisorderField& w, std::size_t size) const;

    FourierEngine engine_;
    std::vector<double> energy_fft_;      // E(p) in FFT order
    std::vector<std::size_t> site_fft_;   // lexicographic site -> FFT-order slot
};

ComplexField evolve(const ComplexField& f0, const DisorderField& w, const EvolutionParams& params);
/// Adjoint evolution e^{+i t H} f0.
ComplexField evolve_adjoint(const ComplexField& f0, const DisorderField& w, const EvolutionParams& params);

/// f_t^(0), ..., f_t^(N) in the representation of f0.
std::vector<ComplexField> duhamel_terms(const ComplexField& f0, const DisorderField& w,
                                        const EvolutionParams& params, int N);

/// Random-phase estimator of F_t(p) = E_omega[(U_t^* J U_t)(p, p)] on the lattice dual grid.
///
/// Realization i uses disorder seed plan.seed(i) and phase vectors keyed by the same
/// seed. Standard errors are clustered by realization (phase averages are not
/// independent across p); with a single realization they fall back to the
/// phase-to-phase spread.
DistributionEstimate momentum_density(const InitialProfile& J, const EnsemblePlan& plan,
                                      const KineticSchedule& sched, const EvolutionParams& params,
                                      int phases_per_realization, int workers = 1);

struct OffDiagonalEstimate {
    cplx mean;
    double std_error;
    std::size_t n_samples;
};

/// Same estimator for the off-diagonal entry (U_t^* J U_t)(p, q) with lattice indices p, q.
OffDiagonalEstimate momentum_offdiagonal(const InitialProfile& J, const EnsemblePlan& plan,
                                         const EvolutionParams& params, std::size_t p, std::size_t q,
                                         int phases_per_realization, int workers = 1);

}  // namespace kinlab
