#pragma once

#include "kinlab/disorder.hpp"
#include "kinlab/lattice.hpp"
#include "kinlab/microdynamics.hpp"

#include <complex>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <utility>
#include <vector>

namespace kinlab {

// ---- graphs -------------------------------------------------------------

/// Degrees of one particle line: n vertices left of the rho0-vertex, n~ right of it.
struct LineDegrees {
    int n;
    int n_tilde;
    int total() const { return n + n_tilde; }
    bool operator==(const LineDegrees&) const = default;
};

/// Interaction vertex: particle line (0-based) and position 1..n+n~ read left to right.
struct VertexAddress {
    int line;
    int position;
    auto operator<=>(const VertexAddress&) const = default;
};

/// A perfect matching of the interaction vertices. Pairs are stored with
/// first < second, sorted by first.
struct FeynmanGraph {
    std::vector<LineDegrees> lines;
    std::vector<std::pair<VertexAddress, VertexAddress>> pairing;

    int total_vertices() const;
    /// (n + n~) / 2 of a single line.
    int nbar() const;
    VertexAddress partner(VertexAddress v) const;
    /// Throws std::invalid_argument unless the pairing is a perfect matching.
    void validate() const;
};

/// All perfect matchings in a fixed lexicographic order.
/// Throws on an odd vertex total or more than 12 vertices.
std::vector<FeynmanGraph> enumerate_pairings(const std::vector<LineDegrees>& degrees);

/// (2k - 1)!! as an exact integer.
std::uint64_t double_factorial_odd(int k);

enum class GraphKind { basic_ladder, decorated_ladder, crossing, nesting, other_nonladder };

const char* to_string(GraphKind k);

/// Single-line taxonomy. kind is the first matching label in the order
/// basic ladder, decorated ladder, crossing, nesting, other; the flags record
/// every property independently.
struct GraphClass {
    GraphKind kind;
    bool has_immediate_recollision;
    bool decorated_ladder;
    bool basic_ladder;
    bool crossing;
    bool nesting;
};

/// Taxonomy of an r = 1 graph; throws std::invalid_argument for r > 1.
///
/// - immediate recollision: l ~ l+1 with both on the same side of the rho0-vertex
/// - rung: l <= n < l'
/// - decorated ladder: every contraction is an immediate recollision or a rung,
///   and rungs are anti-monotone (l1 < l2 implies l2' < l1')
/// - crossing: two contractions interleave, l < j < l' < j'
/// - nesting: a same-side contraction l ~ l + 2k - 1 (k >= 2) whose interior is the
///   progression j ~ j+1, j = l+1, l+3, ..., l+2k-3 of k - 1 immediate recollisions
GraphClass classify(const FeynmanGraph& g);

enum class Connectivity { completely_disconnected, non_disconnected };

const char* to_string(Connectivity c);

/// Multi-line: completely disconnected iff every contraction joins vertices of one line.
Connectivity connectivity(const FeynmanGraph& g);

struct DichotomyReport {
    struct Split {
        int n;
        int n_tilde;
        std::size_t graphs;
        std::map<GraphKind, std::size_t> counts;
    };
    int max_nbar;
    std::size_t graphs_checked;
    std::vector<Split> splits;
    std::vector<FeynmanGraph> counterexamples;
    bool holds() const { return counterexamples.empty(); }
};

/// Exhaustive check that every r = 1 graph with n + n~ = 2 nbar <= 2 max_nbar is a
/// decorated ladder, has a crossing, or has a nesting. max_nbar <= 5.
DichotomyReport verify_dichotomy(int max_nbar);

// ---- JSON ---------------------------------------------------------------

std::string graph_to_json(const FeynmanGraph& g, bool with_class = true);
FeynmanGraph graph_from_json(const std::string& text);

// ---- momentum constraints -----------------------------------------------

/// Momentum slots of a line with degrees (n, n~): slots 0..n are u_0..u_n of the
/// left factor (u_n = p at the rho0-vertex), slots n..n+n~ continue along the right
/// factor. Vertex l sits between slots l-1 and l and carries the transfer
/// q_l = slot(l-1) - slot(l). A contraction v ~ v' imposes q_v + q_v' = 0.
struct ConstraintSystem {
    std::vector<int> slot_offset;            // first global slot of each line
    int n_slots;
    std::vector<std::vector<int>> matrix;    // one row per contraction, n_slots columns
    std::vector<std::vector<int>> param;     // n_slots x n_free: slot = param . free (mod 1)
    int n_free;
};

/// Builds the constraint matrix and an integer parametrization of its solutions by
/// elimination with unit pivots. Verifies matrix . param = 0.
ConstraintSystem resolve_constraints(const FeynmanGraph& g);

/// Symbolic momentum conservation: sum over lines of (first slot - last slot)
/// vanishes identically in the parametrization (r = 1: u_0 = u_last).
bool momentum_conserved(const ConstraintSystem& cs, const FeynmanGraph& g);

// ---- time simplex -------------------------------------------------------

/// Phi_m(E_0..E_m; t) = integral over s_0 + ... + s_m = t, s_j >= 0, of
/// prod_j e^{-i s_j E_j}, by nested composite Gauss-Legendre quadrature
/// (10 nodes per panel, panels no longer than `panel`).
std::complex<double> simplex_phase_integral(const std::vector<double>& energies, double t, double panel = 0.5);

// ---- amplitudes ---------------------------------------------------------

/// Per-line test data: the observable is prod_j <f_j^(n_j), J g_j^(n~_j)> with
/// <f, J g> = L^{-d} sum_p J(p) conj(f(p)) g(p) on momentum coefficient arrays.
struct LineObservable {
    std::vector<cplx> f;
    std::vector<cplx> g;
};

struct AmplitudeOptions {
    double panel = 0.5;
};

/// Feynman amplitude of g at finite (L, eta, t):
///   prod_j eta^{n_j + n~_j} i^{n_j} (-i)^{n~_j} L^{-d n_free}
///   sum_free prod_j J(u_{n_j}) conj(f_j(slot 0)) g_j(slot last) conj(Phi_{n_j}) Phi_{n~_j}.
/// Guards: total vertices <= 4, L <= 16, d <= 2.
std::complex<double> amplitude(const FeynmanGraph& g, const std::vector<LineObservable>& obs,
                               const InitialProfile& J, double eta, double t, const LatticeSpec& spec,
                               AmplitudeOptions opts = {});

/// Sum of amplitudes over all pairings of the given degrees (0 for an odd total).
std::complex<double> pairing_sum(const std::vector<LineDegrees>& degrees, const std::vector<LineObservable>& obs,
                                 const InitialProfile& J, double eta, double t, const LatticeSpec& spec,
                                 AmplitudeOptions opts = {});

/// Split of the pairing sum into completely disconnected and non-disconnected graphs.
struct PairingSplit {
    std::complex<double> disconnected;
    std::complex<double> non_disconnected;
};
PairingSplit pairing_sum_by_connectivity(const std::vector<LineDegrees>& degrees,
                                         const std::vector<LineObservable>& obs, const InitialProfile& J,
                                         double eta, double t, const LatticeSpec& spec, AmplitudeOptions opts = {});

struct WickReport {
    std::complex<double> mc_value;
    double stderr_re;
    double stderr_im;
    std::complex<double> pairing_sum;
    double z_re;
    double z_im;
    std::size_t n_realizations;
    /// max(|z_re|, |z_im|). Each z divides by hypot(stderr, 1e-9 max(|exact|, |mc|)), so a
    /// component that vanishes identically is not judged on rounding noise.
    double z() const;
};

/// Monte-Carlo disorder average of prod_j <f_j^(n_j), J g_j^(n~_j)> (Duhamel levels from
/// the split-step hierarchy with step dt) against the exact pairing sum.
WickReport wick_oracle(const std::vector<LineDegrees>& degrees, const std::vector<LineObservable>& obs,
                       const InitialProfile& J, double eta, double t, const LatticeSpec& spec,
                       const EnsemblePlan& plan, double dt, int workers = 1, AmplitudeOptions opts = {});

/// Single-line convenience overload.
WickReport wick_oracle(int n, int n_tilde, const LineObservable& obs, const InitialProfile& J, double eta,
                       double t, const LatticeSpec& spec, const EnsemblePlan& plan, double dt, int workers = 1,
                       AmplitudeOptions opts = {});

// ---- parameter schedule -------------------------------------------------

/// N = log(1/eps) / (10 r log log(1/eps)), kappa = (log 1/eps)^{15 r}, with the
/// inequality checks eps^{-1/11} < N! < eps^{-1/10} and kappa^N > eps^{-3/2},
/// all evaluated in log space (N! = Gamma(N + 1)).
struct ScheduleParams {
    double log_inv_epsilon;
    int r;
    double N;
    double log_kappa;
    double log_N_factorial;
    bool factorial_lower;     // log N! > log(1/eps) / 11
    bool factorial_upper;     // log N! < log(1/eps) / 10
    bool kappa_power;         // N log kappa > 1.5 log(1/eps)
    double kappa_power_margin;

    double epsilon() const;
    double kappa() const;  // may overflow to inf for tiny eps
};

ScheduleParams schedule(double epsilon, int r = 1);
/// Same from log(1/eps), usable far below the double range of eps.
ScheduleParams schedule_from_log(double log_inv_epsilon, int r = 1);

}  // namespace kinlab
