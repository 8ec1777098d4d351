#include "kinlab/csv.hpp"
#include "kinlab/fourier.hpp"
#include "kinlab/lattice.hpp"
#include "kinlab/random.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>
#include <sstream>

using namespace kinlab;

namespace {

std::vector<cplx> random_values(std::size_t n, std::uint64_t key) {
    std::vector<cplx> v(n);
    for (std::size_t i = 0; i < n; ++i)
        v[i] = {counter_uniform(key, 2 * i) - 0.5, counter_uniform(key, 2 * i + 1) - 0.5};
    return v;
}

// direct O(N^2) sum over the [-L/2, L/2)^d layout
std::vector<cplx> naive_dft(const LatticeSpec& spec, const std::vector<cplx>& f, int sign) {
    const auto grid = MomentumGrid::of(spec);
    std::vector<cplx> out(spec.sites(), 0.0);
    for (std::size_t p = 0; p < spec.sites(); ++p) {
        const auto kp = grid.coords(p);
        for (std::size_t x = 0; x < spec.sites(); ++x) {
            const auto kx = grid.coords(x);
            double phase = 0.0;
            for (int a = 0; a < spec.dim(); ++a) phase += double(kp[a]) * kx[a] / spec.side();
            out[p] += std::polar(1.0, sign * 2.0 * std::numbers::pi * phase) * f[x];
        }
    }
    return out;
}

double max_abs_diff(const std::vector<cplx>& a, const std::vector<cplx>& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

}  // namespace

TEST_CASE("lattice spec validation") {
    CHECK_THROWS_AS(LatticeSpec(0, 4), std::invalid_argument);
    CHECK_THROWS_AS(LatticeSpec(1, 5), std::invalid_argument);
    CHECK_THROWS_AS(LatticeSpec(2, 0), std::invalid_argument);
    CHECK(LatticeSpec(3, 8).sites() == 512);
}

TEST_CASE("grid layout: first axis slowest, coordinates in [-M/2, M/2)") {
    const MomentumGrid g(2, 4);
    CHECK(g.coords(0) == std::vector<int>{-2, -2});
    CHECK(g.coords(1) == std::vector<int>{-2, -1});
    CHECK(g.coords(4) == std::vector<int>{-1, -2});
    CHECK(g.coords(15) == std::vector<int>{1, 1});
    for (std::size_t i = 0; i < g.size(); ++i) {
        const auto k = g.coords(i);
        CHECK(g.index_of(k) == i);
        std::vector<int> shifted = k;
        shifted[0] += 4;
        shifted[1] -= 8;
        CHECK(g.index_of(shifted) == i);
        const auto neg = g.coords(g.negated(i));
        for (int a = 0; a < 2; ++a) CHECK(((neg[a] + k[a]) % 4 + 4) % 4 == 0);
    }
}

TEST_CASE("dispersion table is even and flips sign under the half shift") {
    for (int M : {2, 4, 6, 16, 30}) {
        const auto c = cosine_table(M);
        for (int k = -M / 2; k < M / 2; ++k) {
            const auto i = static_cast<std::size_t>(k + M / 2);
            const auto j = static_cast<std::size_t>(((-k % M) + M + M / 2) % M);
            CHECK(c[i] == c[j]);
            CHECK(std::abs(c[i] - std::cos(2.0 * std::numbers::pi * k / M)) < 1e-15);
        }
    }
    const MomentumGrid g(3, 8);
    const DispersionTable e(g);
    for (std::size_t i = 0; i < g.size(); ++i) {
        CHECK(e[g.negated(i)] == e[i]);
        CHECK(e[g.half_shifted(i)] == -e[i]);
        CHECK(std::abs(e[i] - dispersion(g.momenta(i))) < 1e-14);
    }
    CHECK(e.max() == 3.0);
    CHECK(e.min() == -3.0);
}

TEST_CASE("FFT agrees with the direct sum") {
    for (auto [d, L] : {std::pair{1, 8}, std::pair{2, 6}, std::pair{3, 4}}) {
        const LatticeSpec spec(d, L);
        const auto f = random_values(spec.sites(), 11);
        const ComplexField pos(spec, Representation::position, f);
        const auto mom = forward_transform(pos);
        CHECK(mom.representation == Representation::momentum);
        CHECK(max_abs_diff(mom.values, naive_dft(spec, f, -1)) < 1e-12);

        auto inv = naive_dft(spec, mom.values, +1);
        for (auto& z : inv) z /= static_cast<double>(spec.sites());
        const auto back = inverse_transform(mom);
        CHECK(max_abs_diff(back.values, inv) < 1e-12);
        CHECK(max_abs_diff(back.values, f) < 1e-13);
        CHECK(std::abs(pos.norm() - mom.norm()) < 1e-12);
    }
}

TEST_CASE("transforms reject the wrong representation") {
    const LatticeSpec spec(1, 4);
    const ComplexField mom(spec, Representation::momentum);
    const ComplexField pos(spec, Representation::position);
    CHECK_THROWS_AS(forward_transform(mom), std::invalid_argument);
    CHECK_THROWS_AS(inverse_transform(pos), std::invalid_argument);
}

TEST_CASE("plane wave transforms to a single momentum") {
    const LatticeSpec spec(2, 8);
    const auto grid = MomentumGrid::of(spec);
    const std::vector<int> k0{3, -2};
    std::vector<cplx> f(spec.sites());
    for (std::size_t x = 0; x < spec.sites(); ++x) {
        const auto kx = grid.coords(x);
        f[x] = std::polar(1.0, 2.0 * std::numbers::pi * (k0[0] * kx[0] + k0[1] * kx[1]) / 8.0);
    }
    const auto mom = forward_transform(ComplexField(spec, Representation::position, f));
    const auto target = grid.index_of(k0);
    for (std::size_t p = 0; p < spec.sites(); ++p)
        CHECK(std::abs(mom.values[p] - (p == target ? cplx(64.0) : cplx(0.0))) < 1e-12);
}

TEST_CASE("nearest_momentum uses half-open boxes") {
    const LatticeSpec spec(1, 4);
    auto idx = [&](double p) { return nearest_momentum(std::vector<double>{p}, spec); };
    CHECK(idx(0.0) == 2);
    CHECK(idx(0.1249) == 2);
    CHECK(idx(0.125) == 3);
    CHECK(idx(-0.125) == 2);
    CHECK(idx(-0.1251) == 1);
    CHECK(idx(0.49) == 0);
    CHECK(idx(-0.5) == 0);
    CHECK(idx(1.25) == 3);
    const LatticeSpec s3(3, 8);
    const auto g = MomentumGrid::of(s3);
    for (std::size_t i = 0; i < g.size(); ++i) CHECK(nearest_momentum(g.momenta(i), s3) == i);
}

TEST_CASE("field serialization round trips bit for bit") {
    const LatticeSpec spec(2, 4);
    const ComplexField f(spec, Representation::momentum, random_values(spec.sites(), 3));
    std::stringstream text;
    write_field_csv(text, f);
    const auto g = read_field_csv(text);
    CHECK(g.spec == spec);
    CHECK(g.representation == Representation::momentum);
    CHECK(g.values == f.values);

    std::stringstream bin;
    write_field_binary(bin, f);
    const auto h = read_field_binary(bin);
    CHECK(h.values == f.values);

    std::stringstream truncated(text.str().substr(0, 40));
    CHECK_THROWS(read_field_csv(truncated));
}

TEST_CASE("csv writer quoting and number round trip") {
    CHECK(csv::quote("plain") == "plain");
    CHECK(csv::quote("a,b") == "\"a,b\"");
    CHECK(csv::quote("say \"hi\"") == "\"say \"\"hi\"\"\"");
    for (double x : {0.1, 1.0 / 3.0, -2.5e-300, 6.02214076e23}) CHECK(std::stod(csv::number(x)) == x);
    std::ostringstream os;
    csv::Writer w(os);
    w.header({"a", "b"});
    w.field(1).field("x,y");
    w.end_row();
    CHECK(os.str() == "a,b\r\n1,\"x,y\"\r\n");
}
