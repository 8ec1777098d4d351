#include "kinlab/quasifree.hpp"
#include "kinlab/random.hpp"

#include <doctest.h>

#include <algorithm>
#include <numeric>
#include <sstream>

using namespace kinlab;

namespace {

// Leibniz expansion over permutations
std::complex<double> leibniz(const Eigen::MatrixXcd& m) {
    const int n = static_cast<int>(m.rows());
    std::vector<int> perm(static_cast<std::size_t>(n));
    std::iota(perm.begin(), perm.end(), 0);
    std::complex<double> total = 0.0;
    do {
        int inversions = 0;
        for (int i = 0; i < n; ++i)
            for (int j = i + 1; j < n; ++j)
                if (perm[i] > perm[j]) ++inversions;
        std::complex<double> term = inversions % 2 ? -1.0 : 1.0;
        for (int i = 0; i < n; ++i) term *= m(i, perm[i]);
        total += term;
    } while (std::next_permutation(perm.begin(), perm.end()));
    return total;
}

TestFunctionSet two_bumps(const LatticeSpec& spec) {
    std::vector<std::vector<double>> centers{{0.2}, {-0.2}};
    for (auto& c : centers) c.resize(static_cast<std::size_t>(spec.dim()), 0.0);
    return TestFunctionSet::bumps(spec, centers, 0.05);
}

}  // namespace

TEST_CASE("determinant agrees with the Leibniz expansion") {
    for (int n = 1; n <= 5; ++n) {
        TwoPointMatrix m;
        m.m.resize(n, n);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                m.m(i, j) = {counter_uniform(n, 2 * (i * n + j)) - 0.5, counter_uniform(n, 2 * (i * n + j) + 1) - 0.5};
        const auto a = point_function_2r(m), b = leibniz(m.m);
        CHECK(std::abs(a - b) < 1e-13 * std::max(1.0, std::abs(b)));
    }
    TwoPointMatrix one;
    one.m = Eigen::MatrixXcd::Constant(1, 1, std::complex<double>(0.3, -0.1));
    CHECK(point_function_2r(one) == std::complex<double>(0.3, -0.1));
}

TEST_CASE("two-point matrix is Hermitian positive for f = g") {
    const LatticeSpec spec(1, 32);
    const auto J = InitialProfile::fermi_dirac(MomentumGrid::of(spec), 2.0, 0.5);
    const auto m = two_point_matrix(two_bumps(spec), J, sample_disorder(spec, 4), EvolutionParams(spec, 0.5, 3.0, 0.05));
    CHECK((m.m - m.m.adjoint()).norm() < 1e-15);
    CHECK(m.m(0, 0).real() > 0.0);
    CHECK(point_function_2r(m).real() >= -1e-15);
    CHECK(m.eta == 0.5);
    CHECK(m.seed == 4);
}

TEST_CASE("constant occupation: M is a Gram matrix independent of the disorder") {
    const LatticeSpec spec(2, 8);
    const auto J = InitialProfile::constant(MomentumGrid::of(spec), 1.0);
    const auto tset = two_bumps(spec);
    const EvolutionParams params(spec, 0.8, 2.0, 0.1);
    const auto a = two_point_matrix(tset, J, sample_disorder(spec, 1), params);
    const auto b = two_point_matrix(tset, J, sample_disorder(spec, 2), params);
    CHECK((a.m - b.m).norm() < 1e-12);
    const auto gap = quasifreeness_gap(tset, J, EnsemblePlan(1, 16), params);
    CHECK(gap.gap < 1e-14);
}

TEST_CASE("exact nulls: eta = 0, t = 0 and r = 1") {
    const LatticeSpec spec(1, 32);
    const auto J = InitialProfile::fermi_dirac(MomentumGrid::of(spec), 2.0, 0.5);
    const auto tset = two_bumps(spec);
    CHECK(quasifreeness_gap(tset, J, EnsemblePlan(7, 50), EvolutionParams(spec, 0.0, 4.0, 0.05)).gap == 0.0);
    CHECK(quasifreeness_gap(tset, J, EnsemblePlan(7, 50), EvolutionParams(spec, 0.5, 0.0, 0.05)).gap == 0.0);
    const auto one = TestFunctionSet::bumps(spec, {{0.1}}, 0.05);
    const auto r1 = quasifreeness_gap(one, J, EnsemblePlan(7, 50), EvolutionParams(spec, 0.5, 2.0, 0.05));
    CHECK(r1.r == 1);
    CHECK(r1.gap == 0.0);
}

TEST_CASE("gap is positive at finite coupling and worker-independent") {
    const LatticeSpec spec(1, 32);
    const auto J = InitialProfile::fermi_dirac(MomentumGrid::of(spec), 2.0, 0.5);
    const auto tset = two_bumps(spec);
    const EvolutionParams params(spec, 0.5, 2.0, 0.05);
    const auto a = quasifreeness_gap(tset, J, EnsemblePlan(3, 200), params, 1);
    const auto b = quasifreeness_gap(tset, J, EnsemblePlan(3, 200), params, 4);
    CHECK(a.gap == b.gap);
    CHECK(a.std_error == b.std_error);
    CHECK(a.gap > 3.0 * a.std_error);
    CHECK(a.n_realizations == 200);
    std::ostringstream os;
    write_gap_csv(os, spec, 0.5, {a});
    CHECK(os.str().rfind("r,d,L,eta,T,t,n_realizations,E_det_re,E_det_im,det_E_re,det_E_im,gap,stderr\r\n", 0) == 0);
}

TEST_CASE("quasifree inputs are validated") {
    const LatticeSpec spec(1, 16);
    const auto J = InitialProfile::constant(MomentumGrid(1, 32), 0.5);
    CHECK_THROWS(two_point_matrix(two_bumps(spec), J, sample_disorder(spec, 1), EvolutionParams(spec, 0.1, 1.0, 0.1)));
    CHECK_THROWS(TestFunctionSet::bumps(spec, {{0.1, 0.2}}, 0.05));
    CHECK_THROWS(TestFunctionSet::bumps(spec, {{0.1}}, 0.0));
    TestFunctionSet empty{spec, {}, {}};
    CHECK_THROWS(empty.validate());
}
