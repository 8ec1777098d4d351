#pragma once

// Finite lattice torus, its dual momentum grid and the tight-binding dispersion.
//
// Sites and momenta share one index layout: integer coordinates
// k in [-M/2, M/2)^d stored lexicographically (first axis slowest), with
// momentum p = k / M. Position sites use the same layout with x = k.

#include <complex>
#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace kinlab {

using cplx = std::complex<double>;

class LatticeSpec {
public:
    /// Throws std::invalid_argument unless dim >= 1 and side is even and >= 2.
    LatticeSpec(int dim, int side);

    int dim() const { return dim_; }
    int side() const { return side_; }
    std::size_t sites() const { return sites_; }

    bool operator==(const LatticeSpec&) const = default;

private:
    int dim_;
    int side_;
    std::size_t sites_;
};

/// Uniform grid on the torus [-1/2, 1/2)^d with `per_axis` points per axis.
/// Realizes the normalized measure: every point carries weight 1/size().
class MomentumGrid {
public:
    MomentumGrid(int dim, int per_axis);
    static MomentumGrid of(const LatticeSpec& spec) { return {spec.dim(), spec.side()}; }

    int dim() const { return dim_; }
    int per_axis() const { return per_axis_; }
    std::size_t size() const { return size_; }
    double weight() const { return 1.0 / static_cast<double>(size_); }

    /// Integer coordinate k_axis in [-M/2, M/2) of point i.
    int coord(std::size_t i, int axis) const;
    std::vector<int> coords(std::size_t i) const;
    double momentum(std::size_t i, int axis) const { return coord(i, axis) / double(per_axis_); }
    std::vector<double> momenta(std::size_t i) const;

    /// Index of the integer coordinate vector, reduced modulo M per axis.
    std::size_t index_of(std::span<const int> k) const;
    /// Index of -p (mod 1).
    std::size_t negated(std::size_t i) const;
    /// Index of p + (1/2, ..., 1/2) (mod 1); maps E to -E.
    std::size_t half_shifted(std::size_t i) const;

    bool operator==(const MomentumGrid&) const = default;

private:
    int dim_;
    int per_axis_;
    std::size_t size_;
};

/// E(p) = sum_j cos(2 pi p_j). Total, even and 1-periodic in every component.
double dispersion(std::span<const double> p);

/// cos(2 pi k / M) for k in [-M/2, M/2), built so that the table is exactly even in k
/// and exactly odd under k -> k + M/2.
std::vector<double> cosine_table(int per_axis);

class DispersionTable {
public:
    explicit DispersionTable(const MomentumGrid& grid);

    const MomentumGrid& grid() const { return grid_; }
    std::span<const double> values() const { return energies_; }
    double operator[](std::size_t i) const { return energies_[i]; }
    double min() const;
    double max() const;

private:
    MomentumGrid grid_;
    std::vector<double> energies_;
};

enum class Representation { position, momentum };

const char* to_string(Representation r);
Representation representation_from_string(const std::string& s);

/// One-particle wavefunction on the lattice. Momentum values are the
/// unnormalized transform f^(p) = sum_x e^{-2 pi i p.x} f(x).
struct ComplexField {
    LatticeSpec spec;
    Representation representation;
    std::vector<cplx> values;

    ComplexField(LatticeSpec s, Representation r);
    ComplexField(LatticeSpec s, Representation r, std::vector<cplx> v);

    /// Euclidean norm in the representation's own normalization:
    /// sum_x |f(x)|^2 in position space, L^{-d} sum_p |f^(p)|^2 in momentum space.
    double norm() const;
};

/// Position -> momentum. Throws std::invalid_argument on a momentum-space input.
ComplexField forward_transform(const ComplexField& f);
/// Momentum -> position, f(x) = L^{-d} sum_p e^{2 pi i p.x} f^(p).
ComplexField inverse_transform(const ComplexField& g);

/// Unique dual-lattice point whose box p_k + [-1/(2L), 1/(2L))^d contains p.
std::size_t nearest_momentum(std::span<const double> p, const LatticeSpec& spec);

// ---- serialization ------------------------------------------------------

void write_field_csv(std::ostream& os, const ComplexField& f);
ComplexField read_field_csv(std::istream& is);
/// Little-endian: int32 d, int32 L, int32 representation (0 position, 1 momentum),
/// then re/im pairs as float64 in lexicographic order.
void write_field_binary(std::ostream& os, const ComplexField& f);
ComplexField read_field_binary(std::istream& is);

}  // namespace kinlab
