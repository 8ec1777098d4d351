#include "kinlab/quasifree.hpp"

#include "kinlab/csv.hpp"
#include "kinlab/parallel.hpp"
#include "kinlab/stats.hpp"

#include <cmath>
#include <stdexcept>

namespace kinlab {

void TestFunctionSet::validate() const {
    if (fs.empty()) throw std::invalid_argument("TestFunctionSet: r must be >= 1");
    if (fs.size() != gs.size()) throw std::invalid_argument("TestFunctionSet: need as many g's as f's");
    for (const auto* list : {&fs, &gs})
        for (const auto& v : *list)
            if (v.size() != spec.sites()) throw std::invalid_argument("TestFunctionSet: profile size mismatch");
}

TestFunctionSet TestFunctionSet::bumps(const LatticeSpec& spec, const std::vector<std::vector<double>>& centers,
                                       double width) {
    if (!(width > 0.0)) throw std::invalid_argument("TestFunctionSet::bumps: width must be > 0");
    const auto grid = MomentumGrid::of(spec);
    TestFunctionSet t{spec, {}, {}};
    for (const auto& c : centers) {
        if (c.size() != static_cast<std::size_t>(spec.dim()))
            throw std::invalid_argument("TestFunctionSet::bumps: center has wrong dimension");
        std::vector<cplx> v(grid.size());
        for (std::size_t i = 0; i < v.size(); ++i)
            v[i] = std::exp(-torus_distance_squared(grid.momenta(i), c) / (2.0 * width * width));
        t.fs.push_back(v);
        t.gs.push_back(std::move(v));
    }
    t.validate();
    return t;
}

namespace {

Eigen::MatrixXcd assemble(const std::vector<std::vector<cplx>>& ft, const std::vector<std::vector<cplx>>& gt,
                          const InitialProfile& J) {
    const auto r = static_cast<Eigen::Index>(ft.size());
    const std::size_t n = J.values().size();
    const double inv_volume = 1.0 / static_cast<double>(n);
    Eigen::MatrixXcd m(r, r);
    for (Eigen::Index j = 0; j < r; ++j)
        for (Eigen::Index l = 0; l < r; ++l) {
            const auto& f = ft[static_cast<std::size_t>(j)];
            const auto& g = gt[static_cast<std::size_t>(l)];
            cplx s = 0.0;
            for (std::size_t p = 0; p < n; ++p) s += J[p] * std::conj(f[p]) * g[p];
            m(j, l) = s * inv_volume;
        }
    return m;
}

Eigen::MatrixXcd evolve_and_assemble(SplitStepPropagator& prop, const TestFunctionSet& tset,
                                     const InitialProfile& J, const DisorderField& w, const EvolutionParams& params) {
    auto ft = tset.fs;
    auto gt = tset.gs;
    for (auto* list : {&ft, &gt})
        for (auto& v : *list) prop.evolve(v, w, params.eta, params.t, params.dt);
    return assemble(ft, gt, J);
}

void check(const TestFunctionSet& tset, const InitialProfile& J, const EvolutionParams& params) {
    tset.validate();
    if (!(tset.spec == params.spec)) throw std::invalid_argument("quasifree: lattice mismatch");
    if (!(J.grid() == MomentumGrid::of(params.spec))) throw std::invalid_argument("quasifree: J must live on the lattice dual grid");
}

/// Adjugate of a small square matrix; exact zero for 1 x 1 is handled as [1].
Eigen::MatrixXcd adjugate(const Eigen::MatrixXcd& m) {
    const auto n = m.rows();
    Eigen::MatrixXcd adj(n, n);
    if (n == 1) {
        adj(0, 0) = 1.0;
        return adj;
    }
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < n; ++j) {
            Eigen::MatrixXcd minor(n - 1, n - 1);
            for (Eigen::Index a = 0, ra = 0; a < n; ++a) {
                if (a == j) continue;
                for (Eigen::Index b = 0, rb = 0; b < n; ++b) {
                    if (b == i) continue;
                    minor(ra, rb++) = m(a, b);
                }
                ++ra;
            }
            adj(i, j) = ((i + j) % 2 == 0 ? 1.0 : -1.0) * minor.determinant();
        }
    return adj;
}

}  // namespace

TwoPointMatrix two_point_matrix(const TestFunctionSet& tset, const InitialProfile& J, const DisorderField& w,
                                const EvolutionParams& params) {
    check(tset, J, params);
    SplitStepPropagator prop(params.spec);
    return {evolve_and_assemble(prop, tset, J, w, params), params.eta, params.t, w.seed};
}

std::complex<double> point_function_2r(const TwoPointMatrix& m) {
    if (m.m.rows() != m.m.cols()) throw std::invalid_argument("point_function_2r: matrix must be square");
    if (m.m.rows() == 1) return m.m(0, 0);
    return m.m.determinant();
}

GapReport quasifreeness_gap(const TestFunctionSet& tset, const InitialProfile& J, const EnsemblePlan& plan,
                            const EvolutionParams& params, int workers) {
    check(tset, J, params);
    struct Acc {
        std::vector<Eigen::MatrixXcd> matrices;
    };
    // keep every realization's matrix so both averages use the same samples in index order
    Acc all = ordered_reduce(
        plan.size(), workers, Acc{}, [&] { return SplitStepPropagator(params.spec); },
        [&](SplitStepPropagator& prop, Acc& acc, std::size_t i) {
            const auto w = sample_disorder(params.spec, plan.seed(i));
            acc.matrices.push_back(evolve_and_assemble(prop, tset, J, w, params));
        },
        [](Acc& a, const Acc& b) { a.matrices.insert(a.matrices.end(), b.matrices.begin(), b.matrices.end()); });

    const auto r = static_cast<Eigen::Index>(tset.r());
    std::vector<ComplexStats> entries(static_cast<std::size_t>(r * r));
    ComplexStats dets;
    for (const auto& m : all.matrices) {
        for (Eigen::Index j = 0; j < r; ++j)
            for (Eigen::Index l = 0; l < r; ++l) entries[static_cast<std::size_t>(j * r + l)].add(m(j, l));
        dets.add(point_function_2r({m, params.eta, params.t, 0}));
    }
    Eigen::MatrixXcd mean(r, r);
    for (Eigen::Index j = 0; j < r; ++j)
        for (Eigen::Index l = 0; l < r; ++l) mean(j, l) = entries[static_cast<std::size_t>(j * r + l)].mean;

    GapReport rep;
    rep.r = tset.r();
    rep.eta = params.eta;
    rep.t = params.t;
    rep.n_realizations = all.matrices.size();
    rep.mean_det = dets.mean;
    rep.det_mean = point_function_2r({mean, params.eta, params.t, 0});
    const std::complex<double> diff = rep.mean_det - rep.det_mean;
    rep.gap = std::abs(diff);

    const Eigen::MatrixXcd adj = adjugate(mean);
    const std::complex<double> direction = rep.gap > 0.0 ? std::conj(diff) / rep.gap : 1.0;
    RunningStats projected;
    ComplexStats z_all;
    for (const auto& m : all.matrices) {
        const std::complex<double> z = point_function_2r({m, 0, 0, 0}) - (adj * m).trace();
        z_all.add(z);
        projected.add(std::real(direction * z));
    }
    rep.std_error = rep.gap > 0.0 ? projected.std_error() : z_all.std_error();
    return rep;
}

void write_gap_csv(std::ostream& os, const LatticeSpec& spec, double T, const std::vector<GapReport>& rows) {
    csv::Writer w(os);
    w.header({"r", "d", "L", "eta", "T", "t", "n_realizations", "E_det_re", "E_det_im", "det_E_re", "det_E_im",
              "gap", "stderr"});
    for (const auto& g : rows) {
        w.field(g.r).field(spec.dim()).field(spec.side()).field(g.eta).field(T).field(g.t).field(g.n_realizations);
        w.field(g.mean_det.real()).field(g.mean_det.imag()).field(g.det_mean.real()).field(g.det_mean.imag());
        w.field(g.gap).field(g.std_error);
        w.end_row();
    }
}

}  // namespace kinlab
