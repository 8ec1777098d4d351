#pragma once

#include "kinlab/disorder.hpp"
#include "kinlab/microdynamics.hpp"

#include <Eigen/Dense>

#include <complex>
#include <cstdint>
#include <iosfwd>
#include <vector>

namespace kinlab {

/// Test functions f_1..f_r, g_1..g_r as momentum coefficient arrays on one lattice.
struct TestFunctionSet {
    LatticeSpec spec;
    std::vector<std::vector<cplx>> fs;
    std::vector<std::vector<cplx>> gs;

    std::size_t r() const { return fs.size(); }
    void validate() const;

    /// f_j = g_j = periodic Gaussian bump of the given width centered at centers[j].
    static TestFunctionSet bumps(const LatticeSpec& spec, const std::vector<std::vector<double>>& centers,
                                 double width);
};

struct TwoPointMatrix {
    Eigen::MatrixXcd m;
    double eta = 0.0;
    double t = 0.0;
    std::uint64_t seed = 0;
};

/// M_jl = L^{-d} sum_p J(p) conj(f_{j,t}(p)) g_{l,t}(p) with f_t = e^{-itH} f.
TwoPointMatrix two_point_matrix(const TestFunctionSet& tset, const InitialProfile& J, const DisorderField& w,
                                const EvolutionParams& params);

/// det M.
std::complex<double> point_function_2r(const TwoPointMatrix& m);

struct GapReport {
    std::size_t r;
    double eta;
    double t;
    std::size_t n_realizations;
    std::complex<double> mean_det;   // E[det M]
    std::complex<double> det_mean;   // det E[M]
    double gap;                      // |E[det M] - det E[M]|
    double std_error;                // delta method, see quasifreeness_gap
};

/// Both orderings over the same realizations. The standard error linearizes
/// det at E[M]: the gap's fluctuation is that of the mean of
/// Z_i = det M_i - tr(adj(E[M]) M_i), projected on the direction of the gap.
GapReport quasifreeness_gap(const TestFunctionSet& tset, const InitialProfile& J, const EnsemblePlan& plan,
                            const EvolutionParams& params, int workers = 1);

/// Rows (r, d, L, eta, T, t, n_realizations, E_det_re, E_det_im, det_E_re, det_E_im, gap, stderr).
void write_gap_csv(std::ostream& os, const LatticeSpec& spec, double T, const std::vector<GapReport>& rows);

}  // namespace kinlab
