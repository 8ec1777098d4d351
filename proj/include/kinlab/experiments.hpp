#pragma once

#include "kinlab/boltzmann.hpp"
#include "kinlab/microdynamics.hpp"

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace kinlab {

/// Declarative initial profile: "fermi_dirac" (beta, mu; beta may be +inf),
/// "constant" (c) or "bump" (center, width, height).
struct ProfileSpec {
    std::string kind = "fermi_dirac";
    double beta = 2.0;
    double mu = 0.5;
    double c = 0.5;
    std::vector<double> center;
    double width = 0.1;
    double height = 1.0;

    InitialProfile build(const MomentumGrid& grid) const;
};

struct ConvergenceConfig {
    LatticeSpec spec{3, 32};
    int continuum_per_axis = 32;  // M of the Boltzmann grid
    int n_bins = 64;
    double T = 1.0;
    std::vector<double> etas{0.8, 0.4, 0.2};
    ProfileSpec profile;
    std::size_t realizations = 100;
    int phases = 4;
    double dt = 0.05;
    std::uint64_t seed = 1;
    int workers = 1;
};

struct ConvergenceRow {
    double eta;
    double t;
    std::size_t steps;
    std::size_t n_samples;
    double err;            // shell-projected weighted L2 distance, debiased
    double err_se;
    double raw_err;        // pointwise L2 distance over the Boltzmann grid, debiased
    double raw_err_se;
    double mass;           // integral of the empirical F
    double mass_se;
    double mass_initial;   // integral of J on the lattice
    double max_excursion;  // max over p of the distance of F(p) outside [0, 1], in units of its std error
};

struct ConvergenceResult {
    std::vector<ConvergenceRow> rows;
    std::vector<DistributionEstimate> empirical;  // one per eta, lattice grid
    MomentumDistribution boltzmann;               // solve_exact on the continuum grid
    EnergyShells shells;
    bool decreasing;  // err(eta_i) - err(eta_{i+1}) > sqrt(se_i^2 + se_{i+1}^2) for all i
};

/// For each eta: random-phase momentum density at t = T / eta^2 on the lattice,
/// compared with solve_exact(J) at time T on the continuum grid. Continuum point P is
/// matched to lattice point nearest_momentum(P); with M = L this is the identity.
///
/// err^2 = sum_b w_b (<F_emp>_b - <F_T>_b)^2 - sum_b w_b se_b^2 with w_b the shell
/// weight on the continuum grid. Standard errors are clustered by realization and
/// propagated by the delta method.
ConvergenceResult run_convergence(const ConvergenceConfig& cfg);

void write_convergence_csv(std::ostream& os, const ConvergenceResult& r);
/// Per-eta shell profiles: eta, E_center, population, F_empirical, se, F_boltzmann.
void write_shell_profiles_csv(std::ostream& os, const ConvergenceConfig& cfg, const ConvergenceResult& r);

/// Rough single-core cost of n propagation steps on a lattice, in seconds.
double propagation_cost_seconds(const LatticeSpec& spec, double steps);

}  // namespace kinlab
