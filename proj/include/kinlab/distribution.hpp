#pragma once

#include "kinlab/lattice.hpp"

#include <cstddef>
#include <iosfwd>
#include <vector>

namespace kinlab {

/// Occupation density F(p) on a momentum grid.
struct MomentumDistribution {
    MomentumGrid grid;
    std::vector<double> F;

    explicit MomentumDistribution(MomentumGrid g) : grid(g), F(g.size(), 0.0) {}
    MomentumDistribution(MomentumGrid g, std::vector<double> values);

    /// sum_p F(p) / |grid|, the integral against the normalized measure.
    double mass() const;
};

/// A distribution estimated by Monte Carlo, with a standard error per point.
struct DistributionEstimate {
    MomentumDistribution dist;
    std::vector<double> std_error;
    std::size_t n_samples = 0;
};

/// Columns: k_1..k_d, p_1..p_d, E, F_estimate, std_error, n_samples.
void write_distribution_csv(std::ostream& os, const DistributionEstimate& est);
/// Columns: k_1..k_d, p_1..p_d, E, F.
void write_distribution_csv(std::ostream& os, const MomentumDistribution& dist);

}  // namespace kinlab
