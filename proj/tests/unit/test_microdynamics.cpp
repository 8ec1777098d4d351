#include "kinlab/microdynamics.hpp"
#include "kinlab/random.hpp"

#include <Eigen/Dense>
#include <doctest.h>

#include <cmath>
#include <numbers>

using namespace kinlab;

namespace {

// exp(-i t H) on position vectors by dense diagonalization, H = hopping/2 + eta omega
std::vector<cplx> exact_position_evolution(const LatticeSpec& spec, const DisorderField& w, double eta, double t,
                                           const std::vector<cplx>& f) {
    const auto grid = MomentumGrid::of(spec);
    const auto n = static_cast<Eigen::Index>(spec.sites());
    Eigen::MatrixXd H = Eigen::MatrixXd::Zero(n, n);
    for (Eigen::Index x = 0; x < n; ++x) {
        H(x, x) += eta * w.omega[static_cast<std::size_t>(x)];
        const auto k = grid.coords(static_cast<std::size_t>(x));
        for (int a = 0; a < spec.dim(); ++a)
            for (int s : {-1, 1}) {
                auto kk = k;
                kk[a] += s;
                H(x, static_cast<Eigen::Index>(grid.index_of(kk))) += 0.5;
            }
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(H);
    Eigen::VectorXcd v(n);
    for (Eigen::Index i = 0; i < n; ++i) v(i) = f[static_cast<std::size_t>(i)];
    Eigen::VectorXcd c = es.eigenvectors().transpose().cast<cplx>() * v;
    for (Eigen::Index i = 0; i < n; ++i) c(i) *= std::polar(1.0, -t * es.eigenvalues()(i));
    Eigen::VectorXcd out = es.eigenvectors().cast<cplx>() * c;
    return {out.data(), out.data() + n};
}

std::vector<cplx> exact_momentum_evolution(const LatticeSpec& spec, const DisorderField& w, double eta, double t,
                                           const std::vector<cplx>& fhat) {
    const auto pos = inverse_transform(ComplexField(spec, Representation::momentum, fhat));
    const auto out = exact_position_evolution(spec, w, eta, t, pos.values);
    return forward_transform(ComplexField(spec, Representation::position, out)).values;
}

std::vector<cplx> random_state(std::size_t n, std::uint64_t key) {
    std::vector<cplx> v(n);
    for (std::size_t i = 0; i < n; ++i) v[i] = {normal_quantile(counter_uniform(key, 2 * i)),
                                                normal_quantile(counter_uniform(key, 2 * i + 1))};
    return v;
}

double max_diff(const std::vector<cplx>& a, const std::vector<cplx>& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

}  // namespace

TEST_CASE("step count keeps the final time exact") {
    const LatticeSpec spec(1, 8);
    CHECK(EvolutionParams(spec, 0.1, 1.0, 0.3).steps() == 4);
    CHECK(EvolutionParams(spec, 0.1, 1.0, 0.25).steps() == 4);
    CHECK(EvolutionParams(spec, 0.1, 0.0, 0.25).steps() == 1);
    CHECK(EvolutionParams(spec, 0.1, 1.0, 0.3).step() == 0.25);
    CHECK_THROWS(EvolutionParams(spec, 0.1, 1.0, 0.0));
    CHECK_THROWS(EvolutionParams(spec, -0.1, 1.0, 0.1));
    const KineticSchedule ks(2.0, 0.5);
    CHECK(ks.t() == 8.0);
    CHECK(ks.epsilon() == 0.125);
    CHECK_THROWS(KineticSchedule(1.0, 0.0));
}

TEST_CASE("fermi-dirac limits") {
    CHECK(fermi_dirac(0.5, 2.0, 0.5) == 0.5);
    CHECK(fermi_dirac(1.0, 0.0, 0.0) == 0.5);
    CHECK(fermi_dirac(-1.0, INFINITY, 0.0) == 1.0);
    CHECK(fermi_dirac(1.0, INFINITY, 0.0) == 0.0);
    CHECK(fermi_dirac(800.0, 1.0, 0.0) == doctest::Approx(0.0));
    CHECK(fermi_dirac(-800.0, 1.0, 0.0) == 1.0);
    CHECK(fermi_dirac(0.3, 2.0, 0.1) == doctest::Approx(1.0 / (1.0 + std::exp(0.4))).epsilon(1e-15));
}

TEST_CASE("initial profiles validate their range") {
    const MomentumGrid g(1, 8);
    CHECK_THROWS(InitialProfile::constant(g, 1.5));
    CHECK_THROWS(InitialProfile::from_values(g, std::vector<double>(8, -0.1)));
    CHECK_THROWS(InitialProfile::from_values(g, std::vector<double>(7, 0.1)));
    const auto b = InitialProfile::bump(g, std::vector<double>{0.5}, 0.1);
    // the bump is periodic: center 0.5 is the same point as -0.5
    CHECK(b[0] == 1.0);
    const std::vector<double> h(8, 0.0);
    CHECK(InitialProfile::from_h(g, h)[3] == 0.5);
    CHECK(torus_distance_squared(std::vector<double>{0.45}, std::vector<double>{-0.45}) ==
          doctest::Approx(0.01));
}

TEST_CASE("free evolution is a pure phase") {
    const LatticeSpec spec(3, 8);
    const auto grid = MomentumGrid::of(spec);
    const DispersionTable e(grid);
    const auto w = sample_disorder(spec, 1);
    const ComplexField f(spec, Representation::momentum, random_state(spec.sites(), 3));
    for (double t : {0.3, 5.0, 37.5}) {
        const auto g = evolve(f, w, EvolutionParams(spec, 0.0, t, 0.1));
        double dev = 0.0;
        for (std::size_t i = 0; i < spec.sites(); ++i)
            dev = std::max(dev, std::abs(g.values[i] - std::polar(1.0, -t * e[i]) * f.values[i]) /
                                    std::abs(f.values[i]));
        CHECK(dev < 1e-12);
    }
}

TEST_CASE("evolution is unitary and the adjoint inverts it") {
    const LatticeSpec spec(2, 16);
    const auto w = sample_disorder(spec, 9);
    const ComplexField f(spec, Representation::momentum, random_state(spec.sites(), 4));
    for (double eta : {0.1, 0.5, 2.0})
        for (double t : {1.0, 10.0}) {
            const EvolutionParams p(spec, eta, t, 0.05);
            const auto g = evolve(f, w, p);
            CHECK(std::abs(g.norm() / f.norm() - 1.0) < 1e-10);
            const auto back = evolve_adjoint(g, w, p);
            CHECK(max_diff(back.values, f.values) < 1e-9 * std::sqrt(double(spec.sites())));
        }
    const ComplexField pos(spec, Representation::position, random_state(spec.sites(), 5));
    const auto gp = evolve(pos, w, EvolutionParams(spec, 0.3, 2.0, 0.1));
    CHECK(gp.representation == Representation::position);
    CHECK(std::abs(gp.norm() / pos.norm() - 1.0) < 1e-10);
}

TEST_CASE("split step converges at second order to exact diagonalization") {
    const LatticeSpec spec(1, 32);
    const auto w = sample_disorder(spec, 17);
    const auto f = random_state(spec.sites(), 8);
    const double eta = 0.7, t = 3.0;
    const auto exact = exact_momentum_evolution(spec, w, eta, t, f);
    std::vector<double> errs;
    for (double dt : {0.1, 0.05, 0.025}) {
        const auto g = evolve(ComplexField(spec, Representation::momentum, f), w, EvolutionParams(spec, eta, t, dt));
        errs.push_back(max_diff(g.values, exact));
    }
    for (std::size_t i = 0; i + 1 < errs.size(); ++i) {
        const double ratio = errs[i] / errs[i + 1];
        CHECK(ratio > 3.0);
        CHECK(ratio < 5.0);
    }
}

TEST_CASE("duhamel levels sum to the full evolution") {
    const LatticeSpec spec(2, 8);
    const auto w = sample_disorder(spec, 2);
    const ComplexField f(spec, Representation::momentum, random_state(spec.sites(), 6));
    const EvolutionParams p(spec, 0.3, 1.5, 0.05);
    const auto full = evolve(f, w, p);
    const auto terms = duhamel_terms(f, w, p, 16);
    REQUIRE(terms.size() == 17);
    const auto free = evolve(f, w, EvolutionParams(spec, 0.0, 1.5, 0.05));
    CHECK(max_diff(terms[0].values, free.values) < 1e-12 * std::sqrt(double(spec.sites())));
    std::vector<cplx> sum(spec.sites(), 0.0);
    for (const auto& term : terms)
        for (std::size_t i = 0; i < sum.size(); ++i) sum[i] += term.values[i];
    CHECK(max_diff(sum, full.values) < 1e-10);
    // level n scales as eta^n
    const auto half = duhamel_terms(f, w, EvolutionParams(spec, 0.15, 1.5, 0.05), 3);
    for (int n = 1; n <= 3; ++n)
        CHECK(max_diff(terms[n].values, [&] {
                  auto v = half[n].values;
                  for (auto& z : v) z *= std::pow(2.0, n);
                  return v;
              }()) < 1e-10 * std::pow(10.0, n));
}

TEST_CASE("first duhamel level against the closed-form time integral") {
    // single impurity at the origin: (V g)^(p) = L^{-d} sum_q g^(q)
    const LatticeSpec spec(1, 16);
    const auto grid = MomentumGrid::of(spec);
    const DispersionTable e(grid);
    std::vector<double> omega(spec.sites(), 0.0);
    omega[grid.index_of(std::vector<int>{0})] = 1.0;
    const auto w = disorder_from_values(spec, omega);
    const auto f = random_state(spec.sites(), 12);
    const double eta = 0.4, t = 2.0;

    std::vector<cplx> oracle(spec.sites(), 0.0);
    for (std::size_t p = 0; p < spec.sites(); ++p) {
        cplx acc = 0.0;
        for (std::size_t q = 0; q < spec.sites(); ++q) {
            const double a = e[p], b = e[q];
            // int_0^t e^{-i (t-s) a} e^{-i s b} ds
            const cplx integral = std::abs(b - a) < 1e-14
                                      ? t * std::polar(1.0, -t * a)
                                      : (std::polar(1.0, -t * a) - std::polar(1.0, -t * b)) / cplx(0.0, b - a);
            acc += integral * f[q];
        }
        oracle[p] = cplx(0.0, -eta) * acc / double(spec.sites());
    }
    std::vector<double> errs;
    for (double dt : {0.02, 0.01}) {
        const auto terms = duhamel_terms(ComplexField(spec, Representation::momentum, f), w,
                                         EvolutionParams(spec, eta, t, dt), 1);
        errs.push_back(max_diff(terms[1].values, oracle));
    }
    CHECK(errs[1] < 1e-4);
    CHECK(errs[0] / errs[1] == doctest::Approx(4.0).epsilon(0.25));
}

TEST_CASE("random-phase estimator: constant occupation is preserved") {
    const LatticeSpec spec(2, 8);
    const auto grid = MomentumGrid::of(spec);
    const auto J = InitialProfile::constant(grid, 0.3);
    const KineticSchedule sched(1.0, 0.5);
    const EvolutionParams params(spec, 0.5, sched.t(), 0.1);
    const auto est = momentum_density(J, EnsemblePlan(1, 40), sched, params, 2);
    CHECK(est.n_samples == 80);
    CHECK(est.dist.mass() == doctest::Approx(0.3).epsilon(1e-12));
    std::size_t within = 0;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        REQUIRE(est.std_error[i] > 0.0);
        if (std::abs(est.dist.F[i] - 0.3) < 3.0 * est.std_error[i]) ++within;
    }
    CHECK(double(within) / double(grid.size()) > 0.95);

    const auto off = momentum_offdiagonal(J, EnsemblePlan(1, 40), params, 3, 17, 2);
    CHECK(std::abs(off.mean) < 4.0 * off.std_error);
    const auto diag = momentum_offdiagonal(J, EnsemblePlan(1, 40), params, 5, 5, 2);
    CHECK(std::abs(diag.mean - est.dist.F[5]) < 1e-12);
}

TEST_CASE("random-phase estimator is worker-independent and rejects mismatched schedules") {
    const LatticeSpec spec(1, 16);
    const auto J = InitialProfile::fermi_dirac(MomentumGrid::of(spec), 2.0, 0.5);
    const KineticSchedule sched(0.5, 0.5);
    const EvolutionParams params(spec, 0.5, sched.t(), 0.1);
    const auto a = momentum_density(J, EnsemblePlan(3, 21), sched, params, 3, 1);
    const auto b = momentum_density(J, EnsemblePlan(3, 21), sched, params, 3, 4);
    CHECK(a.dist.F == b.dist.F);
    CHECK(a.std_error == b.std_error);
    CHECK_THROWS(momentum_density(J, EnsemblePlan(3, 2), sched, EvolutionParams(spec, 0.5, 1.0, 0.1), 1));
    const auto single = momentum_density(J, EnsemblePlan(3, 1), sched, params, 4);
    CHECK(single.std_error[0] > 0.0);
}
