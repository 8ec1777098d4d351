#include "kinlab/diagrams.hpp"

#include "kinlab/parallel.hpp"
#include "kinlab/stats.hpp"

#include <boost/math/quadrature/gauss.hpp>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <stdexcept>

namespace kinlab {

// ---- constraint resolution ----------------------------------------------

ConstraintSystem resolve_constraints(const FeynmanGraph& g) {
    g.validate();
    ConstraintSystem cs;
    cs.n_slots = 0;
    for (const auto& l : g.lines) {
        cs.slot_offset.push_back(cs.n_slots);
        cs.n_slots += l.total() + 1;
    }
    const auto cols = static_cast<std::size_t>(cs.n_slots);
    auto add_transfer = [&](std::vector<int>& row, VertexAddress v) {
        const int base = cs.slot_offset[static_cast<std::size_t>(v.line)];
        row[static_cast<std::size_t>(base + v.position - 1)] += 1;
        row[static_cast<std::size_t>(base + v.position)] -= 1;
    };
    for (const auto& [a, b] : g.pairing) {
        std::vector<int> row(cols, 0);
        add_transfer(row, a);
        add_transfer(row, b);
        cs.matrix.push_back(std::move(row));
    }

    // elimination with unit pivots; integer arithmetic throughout
    auto work = cs.matrix;
    std::vector<int> pivot_of_col(cols, -1);
    std::vector<std::size_t> pivot_rows;
    for (std::size_t r = 0; r < work.size(); ++r) {
        auto& row = work[r];
        if (std::all_of(row.begin(), row.end(), [](int x) { return x == 0; })) continue;
        std::size_t c = cols;
        for (std::size_t k = cols; k-- > 0;)
            if (pivot_of_col[k] < 0 && std::abs(row[k]) == 1) {
                c = k;
                break;
            }
        if (c == cols) throw std::runtime_error("resolve_constraints: no unit pivot available");
        if (row[c] == -1)
            for (auto& x : row) x = -x;
        for (std::size_t o = 0; o < work.size(); ++o) {
            if (o == r || work[o][c] == 0) continue;
            const int factor = work[o][c];
            for (std::size_t k = 0; k < cols; ++k) work[o][k] -= factor * row[k];
        }
        pivot_of_col[c] = static_cast<int>(r);
        pivot_rows.push_back(r);
    }

    std::vector<std::size_t> free_cols;
    for (std::size_t k = 0; k < cols; ++k)
        if (pivot_of_col[k] < 0) free_cols.push_back(k);
    cs.n_free = static_cast<int>(free_cols.size());
    cs.param.assign(cols, std::vector<int>(free_cols.size(), 0));
    for (std::size_t f = 0; f < free_cols.size(); ++f) cs.param[free_cols[f]][f] = 1;
    for (std::size_t c = 0; c < cols; ++c) {
        if (pivot_of_col[c] < 0) continue;
        const auto& row = work[static_cast<std::size_t>(pivot_of_col[c])];
        for (std::size_t f = 0; f < free_cols.size(); ++f) cs.param[c][f] = -row[free_cols[f]];
    }

    for (const auto& row : cs.matrix)
        for (std::size_t f = 0; f < free_cols.size(); ++f) {
            long s = 0;
            for (std::size_t k = 0; k < cols; ++k) s += long(row[k]) * cs.param[k][f];
            if (s != 0) throw std::logic_error("resolve_constraints: parametrization violates a constraint");
        }
    return cs;
}

bool momentum_conserved(const ConstraintSystem& cs, const FeynmanGraph& g) {
    for (int f = 0; f < cs.n_free; ++f) {
        long s = 0;
        for (std::size_t j = 0; j < g.lines.size(); ++j) {
            const auto first = static_cast<std::size_t>(cs.slot_offset[j]);
            const auto last = first + static_cast<std::size_t>(g.lines[j].total());
            s += cs.param[first][static_cast<std::size_t>(f)] - cs.param[last][static_cast<std::size_t>(f)];
        }
        if (s != 0) return false;
    }
    return true;
}

// ---- time simplex -------------------------------------------------------

namespace {

struct Nodes {
    std::vector<double> x;  // on [0, 1]
    std::vector<double> w;
};

const Nodes& unit_nodes() {
    static const Nodes nodes = [] {
        using rule = boost::math::quadrature::gauss<double, 10>;
        Nodes n;
        const auto& a = rule::abscissa();
        const auto& w = rule::weights();
        for (std::size_t i = 0; i < a.size(); ++i) {
            if (a[i] == 0.0) {
                n.x.push_back(0.5);
                n.w.push_back(0.5 * w[i]);
                continue;
            }
            n.x.push_back(0.5 * (1.0 - a[i]));
            n.w.push_back(0.5 * w[i]);
            n.x.push_back(0.5 * (1.0 + a[i]));
            n.w.push_back(0.5 * w[i]);
        }
        return n;
    }();
    return nodes;
}

std::complex<double> phi(const double* e, std::size_t m, double t, double panel) {
    if (m == 0) return std::polar(1.0, -t * e[0]);
    if (t <= 0.0) return 0.0;
    const auto& nodes = unit_nodes();
    const auto panels = static_cast<std::size_t>(std::max(1.0, std::ceil(t / panel - 1e-12)));
    const double h = t / static_cast<double>(panels);
    std::complex<double> acc = 0.0;
    for (std::size_t k = 0; k < panels; ++k)
        for (std::size_t i = 0; i < nodes.x.size(); ++i) {
            const double s = (static_cast<double>(k) + nodes.x[i]) * h;
            acc += nodes.w[i] * h * std::polar(1.0, -s * e[m]) * phi(e, m - 1, t - s, panel);
        }
    return acc;
}

}  // namespace

std::complex<double> simplex_phase_integral(const std::vector<double>& energies, double t, double panel) {
    if (energies.empty()) throw std::invalid_argument("simplex_phase_integral: need at least one energy");
    if (!(t >= 0.0)) throw std::invalid_argument("simplex_phase_integral: t must be >= 0");
    if (!(panel > 0.0)) throw std::invalid_argument("simplex_phase_integral: panel must be > 0");
    return phi(energies.data(), energies.size() - 1, t, panel);
}

// ---- amplitudes ---------------------------------------------------------

namespace {

void check_observables(const std::vector<LineDegrees>& degrees, const std::vector<LineObservable>& obs,
                       const InitialProfile& J, const LatticeSpec& spec) {
    if (obs.size() != degrees.size()) throw std::invalid_argument("need one observable per particle line");
    for (const auto& o : obs)
        if (o.f.size() != spec.sites() || o.g.size() != spec.sites())
            throw std::invalid_argument("test function size does not match the lattice");
    if (!(J.grid() == MomentumGrid::of(spec))) throw std::invalid_argument("J must live on the lattice dual grid");
}

std::complex<double> i_power(int k) {
    static const std::complex<double> table[] = {{1, 0}, {0, 1}, {-1, 0}, {0, -1}};
    return table[((k % 4) + 4) % 4];
}

class PhiCache {
public:
    PhiCache(double t, double panel) : t_(t), panel_(panel) {}
    std::complex<double> operator()(std::vector<double> e) {
        std::sort(e.begin(), e.end());  // Phi is symmetric in its energies
        auto it = cache_.find(e);
        if (it != cache_.end()) return it->second;
        const auto v = simplex_phase_integral(e, t_, panel_);
        cache_.emplace(std::move(e), v);
        return v;
    }

private:
    double t_, panel_;
    std::map<std::vector<double>, std::complex<double>> cache_;
};

}  // namespace

std::complex<double> amplitude(const FeynmanGraph& g, const std::vector<LineObservable>& obs, const InitialProfile& J,
                               double eta, double t, const LatticeSpec& spec, AmplitudeOptions opts) {
    g.validate();
    check_observables(g.lines, obs, J, spec);
    if (g.total_vertices() > 4) throw std::invalid_argument("amplitude: more than 4 interaction vertices");
    if (spec.side() > 16) throw std::invalid_argument("amplitude: L must be <= 16");
    if (spec.dim() > 2) throw std::invalid_argument("amplitude: d must be <= 2");
    if (!(eta >= 0.0) || !(t >= 0.0)) throw std::invalid_argument("amplitude: eta and t must be >= 0");

    const auto cs = resolve_constraints(g);
    if (!momentum_conserved(cs, g)) throw std::logic_error("amplitude: constraint system violates momentum conservation");

    const auto grid = MomentumGrid::of(spec);
    const DispersionTable energy(grid);
    const int d = spec.dim();
    const int L = spec.side();
    const auto n_free = static_cast<std::size_t>(cs.n_free);
    const auto n_slots = static_cast<std::size_t>(cs.n_slots);

    std::complex<double> prefactor = 1.0;
    for (const auto& l : g.lines) prefactor *= std::pow(eta, l.total()) * i_power(l.n) * i_power(-l.n_tilde);
    if (prefactor == 0.0) return 0.0;

    PhiCache cache(t, opts.panel);
    std::vector<int> free_coords(n_free * static_cast<std::size_t>(d), -L / 2);
    std::vector<std::size_t> slot_index(n_slots);
    std::vector<int> k(static_cast<std::size_t>(d));
    std::complex<double> sum = 0.0;

    while (true) {
        for (std::size_t s = 0; s < n_slots; ++s) {
            for (int a = 0; a < d; ++a) {
                long c = 0;
                for (std::size_t f = 0; f < n_free; ++f)
                    c += long(cs.param[s][f]) * free_coords[f * static_cast<std::size_t>(d) + static_cast<std::size_t>(a)];
                k[static_cast<std::size_t>(a)] = static_cast<int>(c % L);
            }
            slot_index[s] = grid.index_of(k);
        }
        std::complex<double> term = 1.0;
        for (std::size_t j = 0; j < g.lines.size() && term != 0.0; ++j) {
            const auto base = static_cast<std::size_t>(cs.slot_offset[j]);
            const auto n = static_cast<std::size_t>(g.lines[j].n);
            const auto last = base + static_cast<std::size_t>(g.lines[j].total());
            term *= J[slot_index[base + n]] * std::conj(obs[j].f[slot_index[base]]) * obs[j].g[slot_index[last]];
            if (term == 0.0) break;
            std::vector<double> left, right;
            for (std::size_t s = base; s <= base + n; ++s) left.push_back(energy[slot_index[s]]);
            for (std::size_t s = base + n; s <= last; ++s) right.push_back(energy[slot_index[s]]);
            term *= std::conj(cache(std::move(left))) * cache(std::move(right));
        }
        sum += term;

        std::size_t pos = 0;
        for (; pos < free_coords.size(); ++pos) {
            if (++free_coords[pos] < L / 2) break;
            free_coords[pos] = -L / 2;
        }
        if (pos == free_coords.size()) break;
    }
    return prefactor * sum * std::pow(static_cast<double>(spec.sites()), -static_cast<double>(n_free));
}

std::complex<double> pairing_sum(const std::vector<LineDegrees>& degrees, const std::vector<LineObservable>& obs,
                                 const InitialProfile& J, double eta, double t, const LatticeSpec& spec,
                                 AmplitudeOptions opts) {
    const auto s = pairing_sum_by_connectivity(degrees, obs, J, eta, t, spec, opts);
    return s.disconnected + s.non_disconnected;
}

PairingSplit pairing_sum_by_connectivity(const std::vector<LineDegrees>& degrees,
                                         const std::vector<LineObservable>& obs, const InitialProfile& J,
                                         double eta, double t, const LatticeSpec& spec, AmplitudeOptions opts) {
    check_observables(degrees, obs, J, spec);
    int total = 0;
    for (const auto& l : degrees) total += l.total();
    PairingSplit out{0.0, 0.0};
    if (total % 2 != 0) return out;  // odd Gaussian moments vanish
    for (const auto& g : enumerate_pairings(degrees)) {
        const auto a = amplitude(g, obs, J, eta, t, spec, opts);
        (connectivity(g) == Connectivity::completely_disconnected ? out.disconnected : out.non_disconnected) += a;
    }
    return out;
}

// ---- Wick oracle --------------------------------------------------------

double WickReport::z() const { return std::max(std::abs(z_re), std::abs(z_im)); }

WickReport wick_oracle(const std::vector<LineDegrees>& degrees, const std::vector<LineObservable>& obs,
                       const InitialProfile& J, double eta, double t, const LatticeSpec& spec,
                       const EnsemblePlan& plan, double dt, int workers, AmplitudeOptions opts) {
    check_observables(degrees, obs, J, spec);
    const auto exact = pairing_sum(degrees, obs, J, eta, t, spec, opts);
    const std::size_t n = spec.sites();
    const double inv_volume = 1.0 / static_cast<double>(n);

    struct Ctx {
        SplitStepPropagator prop;
        std::vector<std::vector<cplx>> f_levels, g_levels;
    };
    struct Acc {
        RunningStats re, im;
    };
    const Acc total = ordered_reduce(
        plan.size(), workers, Acc{}, [&] { return Ctx{SplitStepPropagator(spec), {}, {}}; },
        [&](Ctx& ctx, Acc& acc, std::size_t i) {
            const auto w = sample_disorder(spec, plan.seed(i));
            std::complex<double> value = 1.0;
            for (std::size_t j = 0; j < degrees.size(); ++j) {
                ctx.f_levels.assign(static_cast<std::size_t>(degrees[j].n) + 1, {});
                ctx.f_levels[0] = obs[j].f;
                ctx.prop.duhamel(ctx.f_levels, w, eta, t, dt);
                ctx.g_levels.assign(static_cast<std::size_t>(degrees[j].n_tilde) + 1, {});
                ctx.g_levels[0] = obs[j].g;
                ctx.prop.duhamel(ctx.g_levels, w, eta, t, dt);
                const auto& fn = ctx.f_levels.back();
                const auto& gn = ctx.g_levels.back();
                std::complex<double> inner = 0.0;
                for (std::size_t p = 0; p < n; ++p) inner += J[p] * std::conj(fn[p]) * gn[p];
                value *= inner * inv_volume;
            }
            acc.re.add(value.real());
            acc.im.add(value.imag());
        },
        [](Acc& a, const Acc& b) {
            a.re.merge(b.re);
            a.im.merge(b.im);
        });

    WickReport r;
    r.mc_value = {total.re.mean, total.im.mean};
    r.stderr_re = total.re.std_error();
    r.stderr_im = total.im.std_error();
    r.pairing_sum = exact;
    // deterministic floor: quadrature tolerance and rounding of components that vanish identically
    const double floor = 1e-9 * std::max(std::abs(exact), std::abs(r.mc_value));
    auto zscore = [floor](double diff, double se) {
        const double scale = std::hypot(se, floor);
        if (scale > 0.0) return diff / scale;
        return diff == 0.0 ? 0.0 : std::copysign(INFINITY, diff);
    };
    r.z_re = zscore(r.mc_value.real() - exact.real(), r.stderr_re);
    r.z_im = zscore(r.mc_value.imag() - exact.imag(), r.stderr_im);
    r.n_realizations = plan.size();
    return r;
}

WickReport wick_oracle(int n, int n_tilde, const LineObservable& obs, const InitialProfile& J, double eta, double t,
                       const LatticeSpec& spec, const EnsemblePlan& plan, double dt, int workers,
                       AmplitudeOptions opts) {
    return wick_oracle({LineDegrees{n, n_tilde}}, {obs}, J, eta, t, spec, plan, dt, workers, opts);
}

}  // namespace kinlab
