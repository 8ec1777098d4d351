#include "kinlab/diagrams.hpp"
#include "kinlab/random.hpp"

#include <doctest.h>
#include <unsupported/Eigen/MatrixFunctions>

#include <cmath>
#include <numbers>

using namespace kinlab;

namespace {

FeynmanGraph single(int n, int nt, std::vector<std::pair<int, int>> pairs) {
    FeynmanGraph g;
    g.lines = {{n, nt}};
    for (auto [a, b] : pairs) g.pairing.push_back({{0, a}, {0, b}});
    g.validate();
    return g;
}

// Phi_m = i^m [exp(-i t Z)]_{0m}, Z upper bidiagonal with diagonal E and unit superdiagonal
std::complex<double> phi_matrix_exp(const std::vector<double>& E, double t) {
    const auto m = static_cast<Eigen::Index>(E.size());
    Eigen::MatrixXcd Z = Eigen::MatrixXcd::Zero(m, m);
    for (Eigen::Index i = 0; i < m; ++i) {
        Z(i, i) = E[static_cast<std::size_t>(i)];
        if (i + 1 < m) Z(i, i + 1) = 1.0;
    }
    const Eigen::MatrixXcd X = (Z * std::complex<double>(0.0, -t)).exp();
    return std::pow(std::complex<double>(0.0, 1.0), static_cast<int>(m - 1)) * X(0, m - 1);
}

std::vector<cplx> bump(const LatticeSpec& spec, double c, double w) {
    const auto g = MomentumGrid::of(spec);
    std::vector<cplx> v(spec.sites());
    for (std::size_t i = 0; i < v.size(); ++i) {
        const auto p = g.momenta(i);
        std::vector<double> ctr(p.size(), c);
        v[i] = std::exp(-torus_distance_squared(p, ctr) / (2 * w * w)) * std::polar(1.0, 0.3 * double(i));
    }
    return v;
}

}  // namespace

TEST_CASE("pairing counts are odd double factorials") {
    const std::uint64_t expected[] = {1, 1, 3, 15, 105, 945};
    for (int nbar = 1; nbar <= 5; ++nbar) {
        CHECK(double_factorial_odd(nbar) == expected[nbar]);
        for (int n = 0; n <= 2 * nbar; n += 3)
            CHECK(enumerate_pairings({{n, 2 * nbar - n}}).size() == expected[nbar]);
    }
    CHECK(enumerate_pairings({{1, 1}, {2, 0}}).size() == 3);
    CHECK_THROWS(enumerate_pairings({{1, 0}}));
    CHECK_THROWS(enumerate_pairings({{7, 7}}));
}

TEST_CASE("enumerated pairings are distinct perfect matchings in canonical form") {
    const auto all = enumerate_pairings({{3, 3}});
    for (std::size_t i = 0; i < all.size(); ++i) {
        all[i].validate();
        for (std::size_t k = 0; k + 1 < all[i].pairing.size(); ++k)
            CHECK(all[i].pairing[k].first < all[i].pairing[k + 1].first);
        for (std::size_t j = 0; j < i; ++j) CHECK(all[i].pairing != all[j].pairing);
    }
}

TEST_CASE("validation rejects broken matchings") {
    FeynmanGraph g;
    g.lines = {{2, 0}};
    g.pairing = {{{0, 1}, {0, 1}}};
    CHECK_THROWS_AS(g.validate(), std::invalid_argument);
    g.pairing = {{{0, 1}, {0, 3}}};
    CHECK_THROWS_AS(g.validate(), std::invalid_argument);
}

TEST_CASE("classification of small graphs") {
    SUBCASE("single rung is a basic ladder") {
        const auto c = classify(single(1, 1, {{1, 2}}));
        CHECK(c.kind == GraphKind::basic_ladder);
        CHECK(c.decorated_ladder);
    }
    SUBCASE("same-side immediate recollision") {
        const auto c = classify(single(2, 0, {{1, 2}}));
        CHECK(c.kind == GraphKind::decorated_ladder);
        CHECK(c.has_immediate_recollision);
        CHECK_FALSE(c.basic_ladder);
    }
    SUBCASE("a contraction across the rho0-vertex is not a recollision") {
        const auto c = classify(single(1, 1, {{1, 2}}));
        CHECK_FALSE(c.has_immediate_recollision);
    }
    SUBCASE("two rungs") {
        CHECK(classify(single(2, 2, {{1, 4}, {2, 3}})).kind == GraphKind::basic_ladder);
        const auto crossed = classify(single(2, 2, {{1, 3}, {2, 4}}));
        CHECK(crossed.kind == GraphKind::crossing);
        CHECK_FALSE(crossed.decorated_ladder);
        CHECK(classify(single(2, 2, {{1, 2}, {3, 4}})).kind == GraphKind::decorated_ladder);
    }
    SUBCASE("nesting and crossing on one side") {
        const auto nest = classify(single(4, 0, {{1, 4}, {2, 3}}));
        CHECK(nest.kind == GraphKind::nesting);
        CHECK(nest.nesting);
        CHECK_FALSE(nest.crossing);
        CHECK(classify(single(4, 0, {{1, 3}, {2, 4}})).kind == GraphKind::crossing);
        CHECK(classify(single(0, 4, {{1, 4}, {2, 3}})).kind == GraphKind::nesting);
    }
    SUBCASE("decorated ladder with recollisions inside a rung") {
        const auto c = classify(single(3, 3, {{1, 6}, {2, 3}, {4, 5}}));
        CHECK(c.kind == GraphKind::decorated_ladder);
        CHECK_FALSE(c.basic_ladder);
    }
    SUBCASE("longer nesting: l ~ l + 5 around two recollisions") {
        const auto c = classify(single(6, 0, {{1, 6}, {2, 3}, {4, 5}}));
        CHECK(c.nesting);
    }
    CHECK_THROWS(classify(enumerate_pairings({{1, 1}, {1, 1}}).front()));
}

TEST_CASE("crossing flag equals brute-force interleaving") {
    for (int nbar = 1; nbar <= 4; ++nbar)
        for (int n = 0; n <= 2 * nbar; ++n)
            for (const auto& g : enumerate_pairings({{n, 2 * nbar - n}})) {
                bool interleave = false;
                for (const auto& [a, b] : g.pairing)
                    for (const auto& [c, d] : g.pairing)
                        if (a.position < c.position && c.position < b.position && b.position < d.position)
                            interleave = true;
                CHECK(classify(g).crossing == interleave);
            }
}

TEST_CASE("dichotomy holds exhaustively up to eight vertices") {
    const auto r = verify_dichotomy(4);
    CHECK(r.holds());
    CHECK(r.graphs_checked == 3 * 1 + 5 * 3 + 7 * 15 + 9 * 105);
    for (const auto& s : r.splits) {
        std::size_t sum = 0;
        for (const auto& [k, c] : s.counts) sum += c;
        CHECK(sum == s.graphs);
        CHECK(s.counts.count(GraphKind::other_nonladder) == 0);
    }
    CHECK_THROWS(verify_dichotomy(6));
}

TEST_CASE("graph JSON round trip") {
    for (const auto& g : enumerate_pairings({{2, 1}, {0, 3}})) {
        const auto back = graph_from_json(graph_to_json(g));
        CHECK(back.lines == g.lines);
        CHECK(back.pairing == g.pairing);
    }
    const auto text = graph_to_json(single(1, 1, {{1, 2}}));
    CHECK(text.find("\"basic_ladder\"") != std::string::npos);
    CHECK_THROWS(graph_from_json("{\"lines\": [{\"n\": 2, \"n_tilde\": 0}], \"pairing\": []}"));
}

TEST_CASE("momentum constraints conserve momentum and leave nbar + 1 free momenta") {
    for (int nbar = 1; nbar <= 3; ++nbar)
        for (int n = 0; n <= 2 * nbar; ++n)
            for (const auto& g : enumerate_pairings({{n, 2 * nbar - n}})) {
                const auto cs = resolve_constraints(g);
                CHECK(cs.n_slots == 2 * nbar + 1);
                CHECK(cs.n_free == nbar + 1);
                CHECK(momentum_conserved(cs, g));
                for (const auto& row : cs.matrix)
                    for (int f = 0; f < cs.n_free; ++f) {
                        long s = 0;
                        for (int c = 0; c < cs.n_slots; ++c) s += long(row[c]) * cs.param[c][f];
                        CHECK(s == 0);
                    }
            }
    for (const auto& g : enumerate_pairings({{1, 1}, {2, 0}})) CHECK(momentum_conserved(resolve_constraints(g), g));
}

TEST_CASE("simplex phase integral against the matrix exponential") {
    const std::vector<std::vector<double>> cases{
        {0.7}, {0.3, -1.2}, {0.5, 0.5}, {1.0, -0.4, 2.2}, {0.1, 0.1, 0.1}, {-2.0, 1.5, 0.3, 0.9}};
    for (const auto& E : cases)
        for (double t : {0.5, 2.0, 6.0}) {
            const auto a = simplex_phase_integral(E, t);
            const auto b = phi_matrix_exp(E, t);
            CHECK(std::abs(a - b) < 1e-10);
        }
    // equal energies: t^m / m! e^{-i t E}
    const auto c = simplex_phase_integral({0.4, 0.4, 0.4}, 3.0);
    CHECK(std::abs(c - 4.5 * std::polar(1.0, -1.2)) < 1e-10);
}

TEST_CASE("single rung amplitude against a direct nested sum") {
    const LatticeSpec spec(1, 8);
    const auto grid = MomentumGrid::of(spec);
    const DispersionTable e(grid);
    const auto J = InitialProfile::fermi_dirac(grid, 2.0, 0.5);
    const auto f = bump(spec, 0.1, 0.2), g = bump(spec, -0.2, 0.3);
    const double eta = 0.5, t = 2.0;
    // <f^(1), J g^(1)>: E[w^ conj(w^)] = L^d delta, and
    // K(p, q) = int_0^t e^{-i s E(q)} e^{-i (t - s) E(p)} ds
    cplx oracle = 0.0;
    const double L = 8.0;
    for (std::size_t p = 0; p < spec.sites(); ++p)
        for (std::size_t q = 0; q < spec.sites(); ++q) {
            const double a = e[p], b = e[q];
            const cplx K = std::abs(a - b) < 1e-14 ? t * std::polar(1.0, -t * a)
                                                   : (std::polar(1.0, -t * a) - std::polar(1.0, -t * b)) /
                                                         cplx(0.0, b - a);
            oracle += J[p] * std::conj(f[q]) * g[q] * std::norm(K);
        }
    oracle *= eta * eta / (L * L);
    const auto graphs = enumerate_pairings({{1, 1}});
    const auto amp = amplitude(graphs.front(), {{f, g}}, J, eta, t, spec);
    CHECK(std::abs(amp - oracle) < 1e-4 * std::abs(oracle));
    CHECK(std::abs(pairing_sum({{1, 1}}, {{f, g}}, J, eta, t, spec) - amp) == 0.0);
    CHECK(pairing_sum({{1, 0}}, {{f, g}}, J, eta, t, spec) == cplx(0.0));
}

TEST_CASE("zeroth order amplitude is the free pairing") {
    const LatticeSpec spec(2, 4);
    const auto grid = MomentumGrid::of(spec);
    const auto J = InitialProfile::bump(grid, std::vector<double>{0.0, 0.0}, 0.2);
    const auto f = bump(spec, 0.25, 0.3), g = bump(spec, 0.0, 0.2);
    FeynmanGraph empty;
    empty.lines = {{0, 0}};
    cplx direct = 0.0;
    for (std::size_t p = 0; p < spec.sites(); ++p) direct += J[p] * std::conj(f[p]) * g[p];
    direct /= double(spec.sites());
    CHECK(std::abs(amplitude(empty, {{f, g}}, J, 0.3, 1.7, spec) - direct) < 1e-14);
}

TEST_CASE("disconnected part factorizes into single-line sums") {
    const LatticeSpec spec(1, 8);
    const auto J = InitialProfile::fermi_dirac(MomentumGrid::of(spec), 1.0, 0.0);
    const LineObservable a{bump(spec, 0.1, 0.2), bump(spec, 0.2, 0.2)};
    const LineObservable b{bump(spec, -0.3, 0.15), bump(spec, 0.0, 0.25)};
    const double eta = 0.4, t = 1.5;
    const auto split = pairing_sum_by_connectivity({{1, 1}, {1, 1}}, {a, b}, J, eta, t, spec);
    const auto product = pairing_sum({{1, 1}}, {a}, J, eta, t, spec) * pairing_sum({{1, 1}}, {b}, J, eta, t, spec);
    CHECK(std::abs(split.disconnected - product) < 1e-12 * std::abs(product));
    CHECK(std::abs(split.non_disconnected) > 0.0);
    CHECK_THROWS(amplitude(enumerate_pairings({{3, 3}}).front(), {a}, J, eta, t, spec));
}

TEST_CASE("wick oracle: free term and low-order terms agree with the pairing sum") {
    const LatticeSpec spec(1, 8);
    const auto J = InitialProfile::fermi_dirac(MomentumGrid::of(spec), 2.0, 0.5);
    const LineObservable obs{bump(spec, 0.1, 0.2), bump(spec, 0.1, 0.2)};
    const auto zero = wick_oracle(0, 0, obs, J, 0.5, 2.0, spec, EnsemblePlan(1, 10), 0.05);
    CHECK(std::abs(zero.mc_value - zero.pairing_sum) < 1e-10);
    const auto odd = wick_oracle(1, 0, obs, J, 0.5, 2.0, spec, EnsemblePlan(1, 400), 0.05);
    CHECK(odd.pairing_sum == cplx(0.0));
    CHECK(odd.z() < 4.0);
    const auto r = wick_oracle(1, 1, obs, J, 0.5, 2.0, spec, EnsemblePlan(1, 2000), 0.02);
    CHECK(r.z() < 4.0);
    CHECK(r.n_realizations == 2000);
}
