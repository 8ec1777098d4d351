#pragma once

#include "kinlab/lattice.hpp"

#include <cstdint>
#include <iosfwd>
#include <vector>

namespace kinlab {

/// One realization of the i.i.d. standard Gaussian potential {omega_x}.
///
/// omega_x = normal_quantile(u(seed, x)) where u is the counter-hash uniform
/// keyed by the seed and the lexicographic site index. Regenerating from
/// (spec, seed) reproduces the field bit for bit.
struct DisorderField {
    LatticeSpec spec;
    std::uint64_t seed;
    std::vector<double> omega;
};

DisorderField sample_disorder(const LatticeSpec& spec, std::uint64_t seed);

/// Explicit potential, e.g. a single-site impurity. The seed is informational.
DisorderField disorder_from_values(const LatticeSpec& spec, std::vector<double> omega,
                                   std::uint64_t seed = 0);

/// Pointwise eta * omega_x * f(x). Rejects momentum-space input and spec mismatch.
ComplexField multiply_potential(const ComplexField& f, const DisorderField& w, double eta);

/// Seeds for an ensemble: realization i uses base_seed + i (mod 2^64).
class EnsemblePlan {
public:
    EnsemblePlan(std::uint64_t base_seed, std::size_t n_realizations);

    std::uint64_t base_seed() const { return base_seed_; }
    std::size_t size() const { return n_; }
    std::uint64_t seed(std::size_t i) const;

private:
    std::uint64_t base_seed_;
    std::size_t n_;
};

/// Audit dump: a header row `d,L,seed`, its values, then `index,omega` rows.
void write_disorder_csv(std::ostream& os, const DisorderField& w);

}  // namespace kinlab
