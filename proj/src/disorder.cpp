#include "kinlab/disorder.hpp"

#include "kinlab/random.hpp"

#include <cstdio>
#include <ostream>
#include <stdexcept>

namespace kinlab {

DisorderField sample_disorder(const LatticeSpec& spec, std::uint64_t seed) {
    DisorderField w{spec, seed, std::vector<double>(spec.sites())};
    for (std::size_t x = 0; x < spec.sites(); ++x) w.omega[x] = normal_quantile(counter_uniform(seed, x));
    return w;
}

DisorderField disorder_from_values(const LatticeSpec& spec, std::vector<double> omega,
                                   std::uint64_t seed) {
    if (omega.size() != spec.sites())
        throw std::invalid_argument("disorder_from_values: value count does not match L^d");
    return {spec, seed, std::move(omega)};
}

ComplexField multiply_potential(const ComplexField& f, const DisorderField& w, double eta) {
    if (f.representation != Representation::position)
        throw std::invalid_argument("multiply_potential expects a position-space field");
    if (!(f.spec == w.spec)) throw std::invalid_argument("multiply_potential: lattice mismatch");
    if (eta < 0.0) throw std::invalid_argument("multiply_potential: eta must be >= 0");
    ComplexField out(f.spec, Representation::position);
    for (std::size_t x = 0; x < f.values.size(); ++x) out.values[x] = eta * w.omega[x] * f.values[x];
    return out;
}

EnsemblePlan::EnsemblePlan(std::uint64_t base_seed, std::size_t n_realizations)
    : base_seed_(base_seed), n_(n_realizations) {
    if (n_realizations == 0) throw std::invalid_argument("EnsemblePlan: empty ensemble");
}

std::uint64_t EnsemblePlan::seed(std::size_t i) const {
    if (i >= n_) throw std::out_of_range("EnsemblePlan::seed: index out of range");
    return base_seed_ + static_cast<std::uint64_t>(i);
}

void write_disorder_csv(std::ostream& os, const DisorderField& w) {
    os << "d,L,seed\r\n" << w.spec.dim() << ',' << w.spec.side() << ',' << w.seed << "\r\n";
    os << "index,omega\r\n";
    char buf[64];
    for (std::size_t x = 0; x < w.omega.size(); ++x) {
        std::snprintf(buf, sizeof buf, "%zu,%.17g\r\n", x, w.omega[x]);
        os << buf;
    }
}

}  // namespace kinlab
