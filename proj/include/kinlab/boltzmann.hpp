#pragma once

#include "kinlab/distribution.hpp"
#include "kinlab/lattice.hpp"

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <vector>

namespace kinlab {

/// Histogram shells of E over [-d, d] with n_bins equal bins.
///
/// Binning is mirror-symmetric: E and -E land in mirrored bins (b and
/// n_bins - 1 - b), so nu(E) = nu(-E) whenever the point set is symmetric.
/// For even n_bins the bin edge sits at E = 0: shell_index sends exact zeros to the
/// upper half, and build_shells splits them, p to the lower half when its partner
/// p + (1/2, ..., 1/2) has the smaller index. For odd n_bins the middle bin is
/// centered on 0.
struct EnergyShells {
    MomentumGrid grid;
    int n_bins;
    double e_min;
    double e_max;
    double width;
    std::vector<int> bin_of;                        // per grid point
    std::vector<std::vector<std::size_t>> members;  // per bin, ascending
    std::vector<double> dos;                        // nu_b = (population / |grid|) / width
    std::vector<double> rate;                       // sigma_b = 2 pi nu_b, 0 for empty bins

    std::size_t population(int b) const { return members[static_cast<std::size_t>(b)].size(); }
    bool empty(int b) const { return members[static_cast<std::size_t>(b)].empty(); }
    double center(int b) const { return e_min + (b + 0.5) * width; }
    double lower_edge(int b) const { return e_min + b * width; }
    int empty_bins() const;
    double max_rate() const;
};

/// Bin index of an energy under the symmetric rule above; clamps to the range.
int shell_index(double energy, double e_min, double e_max, int n_bins);

EnergyShells build_shells(const MomentumGrid& grid, int d, int n_bins);

/// Population average <F>_b for every bin (0 for empty bins).
std::vector<double> shell_averages(const MomentumDistribution& F, const EnergyShells& shells);

/// (QF)(p) = sigma_b (<F>_b - F(p)).
MomentumDistribution collision_apply(const MomentumDistribution& F, const EnergyShells& shells);

/// F_T = A_b + e^{-sigma_b T} (F0 - A_b), A_b = <F0>_b.
MomentumDistribution solve_exact(const MomentumDistribution& F0, const EnergyShells& shells, double T);

/// Classical RK4 for dF/dT = QF with ceil(T/h) equal steps.
MomentumDistribution solve_ode(const MomentumDistribution& F0, const EnergyShells& shells, double T, double h);

/// Jump-process Monte Carlo: from each target p, exponential clocks of rate sigma_b
/// trigger uniform resampling inside the bin; the path value is F0 at the final point.
/// Target p uses the stream keyed by (seed, p), so results do not depend on workers.
DistributionEstimate solve_collision_history(const MomentumDistribution& F0, const EnergyShells& shells,
                                             double T, std::size_t n_paths, std::uint64_t seed,
                                             int workers = 1);

/// ||QF||_inf.
double stationarity_residual(const MomentumDistribution& F, const EnergyShells& shells);

/// 4-tuple of momenta for the Boltzmann-Uehling-Uhlenbeck gain/loss balance.
struct Quadruple {
    std::vector<double> p1, p2, q1, q2;
};

/// B = F1 F2 F~3 F~4 - F3 F4 F~1 F~2 with Fermi-Dirac F, F~ = 1 - F; (3, 4) = (q1, q2).
double buu_detailed_balance(double beta, double mu, const Quadruple& q, int d);

/// C(beta) with |B| <= C |E(p1) + E(p2) - E(q1) - E(q2)|.
///
/// B = max(a, c) (1 - e^{-beta |Delta E|}) with a, c products of occupations
/// in [0, 1], and 1 - e^{-x} <= x, so C = beta.
double buu_lipschitz_constant(double beta);

/// E(p1) + E(p2) - E(q1) - E(q2).
double energy_violation(const Quadruple& q);

void write_dos_csv(std::ostream& os, const EnergyShells& shells);

}  // namespace kinlab
