#include "kinlab/lattice.hpp"

#include "kinlab/fourier.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <istream>
#include <limits>
#include <numbers>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace kinlab {

namespace {

std::size_t checked_power(int base, int exponent) {
    std::size_t n = 1;
    for (int j = 0; j < exponent; ++j) {
        if (n > (std::size_t{1} << 40) / static_cast<std::size_t>(base))
            throw std::invalid_argument("lattice too large: side^dim exceeds 2^40 points");
        n *= static_cast<std::size_t>(base);
    }
    return n;
}

}  // namespace

LatticeSpec::LatticeSpec(int dim, int side) : dim_(dim), side_(side), sites_(0) {
    if (dim < 1) throw std::invalid_argument("LatticeSpec: dimension must be >= 1");
    if (side < 2 || side % 2 != 0)
        throw std::invalid_argument("LatticeSpec: side length must be even and >= 2");
    sites_ = checked_power(side, dim);
}

MomentumGrid::MomentumGrid(int dim, int per_axis) : dim_(dim), per_axis_(per_axis), size_(0) {
    if (dim < 1) throw std::invalid_argument("MomentumGrid: dimension must be >= 1");
    if (per_axis < 2 || per_axis % 2 != 0)
        throw std::invalid_argument("MomentumGrid: points per axis must be even and >= 2");
    size_ = checked_power(per_axis, dim);
}

int MomentumGrid::coord(std::size_t i, int axis) const {
    std::size_t stride = 1;
    for (int a = dim_ - 1; a > axis; --a) stride *= static_cast<std::size_t>(per_axis_);
    const auto slot = static_cast<int>((i / stride) % static_cast<std::size_t>(per_axis_));
    return slot - per_axis_ / 2;
}

std::vector<int> MomentumGrid::coords(std::size_t i) const {
    std::vector<int> k(static_cast<std::size_t>(dim_));
    for (int a = dim_ - 1; a >= 0; --a) {
        k[static_cast<std::size_t>(a)] =
            static_cast<int>(i % static_cast<std::size_t>(per_axis_)) - per_axis_ / 2;
        i /= static_cast<std::size_t>(per_axis_);
    }
    return k;
}

std::vector<double> MomentumGrid::momenta(std::size_t i) const {
    auto k = coords(i);
    std::vector<double> p(k.size());
    for (std::size_t a = 0; a < k.size(); ++a) p[a] = k[a] / double(per_axis_);
    return p;
}

std::size_t MomentumGrid::index_of(std::span<const int> k) const {
    if (k.size() != static_cast<std::size_t>(dim_))
        throw std::invalid_argument("MomentumGrid::index_of: wrong number of components");
    std::size_t idx = 0;
    for (int c : k) {
        int slot = (c + per_axis_ / 2) % per_axis_;
        if (slot < 0) slot += per_axis_;
        idx = idx * static_cast<std::size_t>(per_axis_) + static_cast<std::size_t>(slot);
    }
    return idx;
}

std::size_t MomentumGrid::negated(std::size_t i) const {
    auto k = coords(i);
    for (auto& c : k) c = -c;
    return index_of(k);
}

std::size_t MomentumGrid::half_shifted(std::size_t i) const {
    auto k = coords(i);
    for (auto& c : k) c += per_axis_ / 2;
    return index_of(k);
}

double dispersion(std::span<const double> p) {
    double e = 0.0;
    for (double pj : p) e += std::cos(2.0 * std::numbers::pi * pj);
    return e;
}

std::vector<double> cosine_table(int per_axis) {
    // Only |k| <= M/4 is evaluated with std::cos; the rest follows from
    // cos(pi - x) = -cos(x), so the symmetries hold bit for bit.
    std::vector<double> table(static_cast<std::size_t>(per_axis));
    for (int k = -per_axis / 2; k < per_axis / 2; ++k) {
        const int j = std::abs(k);
        double c;
        if (4 * j < per_axis)
            c = std::cos(2.0 * std::numbers::pi * j / per_axis);
        else if (4 * j == per_axis)
            c = 0.0;
        else
            c = -std::cos(2.0 * std::numbers::pi * (per_axis / 2 - j) / per_axis);
        table[static_cast<std::size_t>(k + per_axis / 2)] = c;
    }
    return table;
}

DispersionTable::DispersionTable(const MomentumGrid& grid) : grid_(grid), energies_(grid.size()) {
    const auto table = cosine_table(grid.per_axis());
    const auto m = static_cast<std::size_t>(grid.per_axis());
    for (std::size_t i = 0; i < grid.size(); ++i) {
        std::size_t rest = i;
        // Sum axes in fixed order (first axis first) so E(p + 1/2) = -E(p) exactly.
        double e = 0.0;
        std::size_t stride = grid.size() / m;
        for (int a = 0; a < grid.dim(); ++a) {
            e += table[rest / stride];
            rest %= stride;
            stride = std::max<std::size_t>(stride / m, 1);
        }
        energies_[i] = e;
    }
}

double DispersionTable::min() const { return *std::min_element(energies_.begin(), energies_.end()); }
double DispersionTable::max() const { return *std::max_element(energies_.begin(), energies_.end()); }

const char* to_string(Representation r) {
    return r == Representation::position ? "position" : "momentum";
}

Representation representation_from_string(const std::string& s) {
    if (s == "position") return Representation::position;
    if (s == "momentum") return Representation::momentum;
    throw std::invalid_argument("unknown representation '" + s + "'");
}

ComplexField::ComplexField(LatticeSpec s, Representation r)
    : spec(s), representation(r), values(s.sites()) {}

ComplexField::ComplexField(LatticeSpec s, Representation r, std::vector<cplx> v)
    : spec(s), representation(r), values(std::move(v)) {
    if (values.size() != spec.sites())
        throw std::invalid_argument("ComplexField: value count does not match L^d");
}

double ComplexField::norm() const {
    double s = 0.0;
    for (const auto& z : values) s += std::norm(z);
    if (representation == Representation::momentum) s /= static_cast<double>(spec.sites());
    return std::sqrt(s);
}

ComplexField forward_transform(const ComplexField& f) {
    if (f.representation != Representation::position)
        throw std::invalid_argument("forward_transform expects a position-space field");
    FourierEngine engine(f.spec);
    engine.load(f.values);
    engine.forward();
    ComplexField out(f.spec, Representation::momentum);
    engine.store(out.values);
    return out;
}

ComplexField inverse_transform(const ComplexField& g) {
    if (g.representation != Representation::momentum)
        throw std::invalid_argument("inverse_transform expects a momentum-space field");
    FourierEngine engine(g.spec);
    engine.load(g.values);
    engine.backward();
    ComplexField out(g.spec, Representation::position);
    engine.store(out.values);
    const double scale = 1.0 / static_cast<double>(g.spec.sites());
    for (auto& z : out.values) z *= scale;
    return out;
}

std::size_t nearest_momentum(std::span<const double> p, const LatticeSpec& spec) {
    if (p.size() != static_cast<std::size_t>(spec.dim()))
        throw std::invalid_argument("nearest_momentum: wrong number of components");
    const auto grid = MomentumGrid::of(spec);
    std::vector<int> k(p.size());
    for (std::size_t a = 0; a < p.size(); ++a)
        k[a] = static_cast<int>(std::floor(p[a] * spec.side() + 0.5));
    return grid.index_of(k);
}

// ---- serialization ------------------------------------------------------

void write_field_csv(std::ostream& os, const ComplexField& f) {
    os << "d,L,representation\r\n"
       << f.spec.dim() << ',' << f.spec.side() << ',' << to_string(f.representation) << "\r\n"
       << "re,im\r\n";
    char buf[64];
    for (const auto& z : f.values) {
        std::snprintf(buf, sizeof buf, "%.17g,%.17g\r\n", z.real(), z.imag());
        os << buf;
    }
}

ComplexField read_field_csv(std::istream& is) {
    std::string line;
    auto next = [&]() {
        if (!std::getline(is, line)) throw std::runtime_error("read_field_csv: truncated input");
        if (!line.empty() && line.back() == '\r') line.pop_back();
        return line;
    };
    if (next() != "d,L,representation") throw std::runtime_error("read_field_csv: bad header");
    std::istringstream hdr(next());
    std::string d, l, rep;
    std::getline(hdr, d, ',');
    std::getline(hdr, l, ',');
    std::getline(hdr, rep, ',');
    LatticeSpec spec(std::stoi(d), std::stoi(l));
    if (next() != "re,im") throw std::runtime_error("read_field_csv: bad column header");
    std::vector<cplx> values(spec.sites());
    for (auto& z : values) {
        const auto row = next();
        const auto comma = row.find(',');
        if (comma == std::string::npos) throw std::runtime_error("read_field_csv: bad row");
        z = {std::stod(row.substr(0, comma)), std::stod(row.substr(comma + 1))};
    }
    return {spec, representation_from_string(rep), std::move(values)};
}

namespace {

template <class T>
void put_le(std::ostream& os, T value) {
    static_assert(std::endian::native == std::endian::little, "big-endian hosts unsupported");
    os.write(reinterpret_cast<const char*>(&value), sizeof value);
}

template <class T>
T get_le(std::istream& is) {
    T value{};
    if (!is.read(reinterpret_cast<char*>(&value), sizeof value))
        throw std::runtime_error("read_field_binary: truncated input");
    return value;
}

}  // namespace

void write_field_binary(std::ostream& os, const ComplexField& f) {
    put_le<std::int32_t>(os, f.spec.dim());
    put_le<std::int32_t>(os, f.spec.side());
    put_le<std::int32_t>(os, f.representation == Representation::position ? 0 : 1);
    for (const auto& z : f.values) {
        put_le<double>(os, z.real());
        put_le<double>(os, z.imag());
    }
}

ComplexField read_field_binary(std::istream& is) {
    const auto d = get_le<std::int32_t>(is);
    const auto l = get_le<std::int32_t>(is);
    const auto r = get_le<std::int32_t>(is);
    if (r != 0 && r != 1) throw std::runtime_error("read_field_binary: bad representation tag");
    LatticeSpec spec(d, l);
    std::vector<cplx> values(spec.sites());
    for (auto& z : values) {
        const double re = get_le<double>(is);
        const double im = get_le<double>(is);
        z = {re, im};
    }
    return {spec, r == 0 ? Representation::position : Representation::momentum, std::move(values)};
}

}  // namespace kinlab
