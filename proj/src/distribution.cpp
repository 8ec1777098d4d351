#include "kinlab/distribution.hpp"

#include "kinlab/csv.hpp"

#include <ostream>
#include <stdexcept>
#include <string>

namespace kinlab {

MomentumDistribution::MomentumDistribution(MomentumGrid g, std::vector<double> values)
    : grid(g), F(std::move(values)) {
    if (F.size() != grid.size())
        throw std::invalid_argument("MomentumDistribution: value count does not match grid");
}

double MomentumDistribution::mass() const {
    double s = 0.0;
    for (double f : F) s += f;
    return s * grid.weight();
}

namespace {

std::vector<std::string> point_columns(int d) {
    std::vector<std::string> cols;
    for (int a = 1; a <= d; ++a) cols.push_back("k" + std::to_string(a));
    for (int a = 1; a <= d; ++a) cols.push_back("p" + std::to_string(a));
    cols.push_back("E");
    return cols;
}

void point_fields(csv::Writer& w, const MomentumGrid& grid, const DispersionTable& energies,
                  std::size_t i) {
    const auto k = grid.coords(i);
    for (int c : k) w.field(c);
    for (int c : k) w.field(c / double(grid.per_axis()));
    w.field(energies[i]);
}

}  // namespace

void write_distribution_csv(std::ostream& os, const DistributionEstimate& est) {
    const auto& grid = est.dist.grid;
    const DispersionTable energies(grid);
    csv::Writer w(os);
    auto cols = point_columns(grid.dim());
    cols.insert(cols.end(), {"F_estimate", "std_error", "n_samples"});
    w.header(cols);
    for (std::size_t i = 0; i < grid.size(); ++i) {
        point_fields(w, grid, energies, i);
        w.field(est.dist.F[i]).field(est.std_error[i]).field(est.n_samples);
        w.end_row();
    }
}

void write_distribution_csv(std::ostream& os, const MomentumDistribution& dist) {
    const DispersionTable energies(dist.grid);
    csv::Writer w(os);
    auto cols = point_columns(dist.grid.dim());
    cols.push_back("F");
    w.header(cols);
    for (std::size_t i = 0; i < dist.grid.size(); ++i) {
        point_fields(w, dist.grid, energies, i);
        w.field(dist.F[i]);
        w.end_row();
    }
}

}  // namespace kinlab
