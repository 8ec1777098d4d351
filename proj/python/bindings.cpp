#include "kinlab/boltzmann.hpp"
#include "kinlab/diagrams.hpp"
#include "kinlab/disorder.hpp"
#include "kinlab/distribution.hpp"
#include "kinlab/experiments.hpp"
#include "kinlab/lattice.hpp"
#include "kinlab/microdynamics.hpp"
#include "kinlab/quasifree.hpp"

#include <pybind11/complex.h>
#include <pybind11/eigen.h>
#include <pybind11/numpy.h>
#include <pybind11/operators.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <algorithm>

namespace py = pybind11;
using namespace kinlab;

namespace {

template <class T>
py::array_t<T> to_array(const std::vector<T>& v) {
    py::array_t<T> out(static_cast<py::ssize_t>(v.size()));
    std::copy(v.begin(), v.end(), out.mutable_data());
    return out;
}

std::vector<double> to_vector(const py::array_t<double, py::array::c_style | py::array::forcecast>& a) {
    return {a.data(), a.data() + a.size()};
}

std::vector<cplx> to_cvector(const py::array_t<cplx, py::array::c_style | py::array::forcecast>& a) {
    return {a.data(), a.data() + a.size()};
}

}  // namespace

PYBIND11_MODULE(_kinlab, m) {
    m.doc() = "Random Schroedinger evolution on the lattice torus, Boltzmann limit and pairing diagrams";

    // ---- lattice ----------------------------------------------------------

    py::class_<LatticeSpec>(m, "LatticeSpec")
        .def(py::init<int, int>(), py::arg("d"), py::arg("L"))
        .def_property_readonly("d", &LatticeSpec::dim)
        .def_property_readonly("L", &LatticeSpec::side)
        .def_property_readonly("sites", &LatticeSpec::sites)
        .def(py::self == py::self)
        .def("__repr__", [](const LatticeSpec& s) {
            return "LatticeSpec(d=" + std::to_string(s.dim()) + ", L=" + std::to_string(s.side()) + ")";
        });

    py::class_<MomentumGrid>(m, "MomentumGrid")
        .def(py::init<int, int>(), py::arg("d"), py::arg("per_axis"))
        .def_static("of", &MomentumGrid::of)
        .def_property_readonly("d", &MomentumGrid::dim)
        .def_property_readonly("per_axis", &MomentumGrid::per_axis)
        .def_property_readonly("size", &MomentumGrid::size)
        .def("coords", &MomentumGrid::coords)
        .def("momenta", &MomentumGrid::momenta)
        .def("index_of", [](const MomentumGrid& g, const std::vector<int>& k) { return g.index_of(k); })
        .def("negated", &MomentumGrid::negated)
        .def("half_shifted", &MomentumGrid::half_shifted)
        .def("energies", [](const MomentumGrid& g) {
            const DispersionTable t(g);
            return to_array(std::vector<double>(t.values().begin(), t.values().end()));
        });

    m.def("dispersion", [](const std::vector<double>& p) { return dispersion(p); }, py::arg("p"),
          "E(p) = sum_j cos(2 pi p_j)");

    py::enum_<Representation>(m, "Representation")
        .value("position", Representation::position)
        .value("momentum", Representation::momentum);

    py::class_<ComplexField>(m, "ComplexField")
        .def(py::init([](const LatticeSpec& s, Representation r,
                         py::array_t<cplx, py::array::c_style | py::array::forcecast> v) {
                 return ComplexField(s, r, to_cvector(v));
             }),
             py::arg("spec"), py::arg("representation"), py::arg("values"))
        .def_readonly("spec", &ComplexField::spec)
        .def_readonly("representation", &ComplexField::representation)
        .def_property_readonly("values", [](const ComplexField& f) { return to_array(f.values); })
        .def("norm", &ComplexField::norm);

    m.def("forward_transform", &forward_transform);
    m.def("inverse_transform", &inverse_transform);
    m.def("nearest_momentum", [](const std::vector<double>& p, const LatticeSpec& s) { return nearest_momentum(p, s); });

    // ---- disorder ---------------------------------------------------------

    py::class_<DisorderField>(m, "DisorderField")
        .def_readonly("spec", &DisorderField::spec)
        .def_readonly("seed", &DisorderField::seed)
        .def_property_readonly("omega", [](const DisorderField& w) { return to_array(w.omega); });

    m.def("sample_disorder", &sample_disorder, py::arg("spec"), py::arg("seed"));
    m.def("multiply_potential", &multiply_potential, py::arg("f"), py::arg("w"), py::arg("eta"));

    py::class_<EnsemblePlan>(m, "EnsemblePlan")
        .def(py::init<std::uint64_t, std::size_t>(), py::arg("base_seed"), py::arg("n_realizations"))
        .def_property_readonly("base_seed", &EnsemblePlan::base_seed)
        .def_property_readonly("size", &EnsemblePlan::size)
        .def("seed", &EnsemblePlan::seed);

    // ---- microdynamics ----------------------------------------------------

    py::class_<EvolutionParams>(m, "EvolutionParams")
        .def(py::init<LatticeSpec, double, double, double>(), py::arg("spec"), py::arg("eta"), py::arg("t"),
             py::arg("dt"))
        .def_readonly("spec", &EvolutionParams::spec)
        .def_readonly("eta", &EvolutionParams::eta)
        .def_readonly("t", &EvolutionParams::t)
        .def_readonly("dt", &EvolutionParams::dt)
        .def_property_readonly("steps", &EvolutionParams::steps)
        .def_property_readonly("step", &EvolutionParams::step);

    py::class_<KineticSchedule>(m, "KineticSchedule")
        .def(py::init<double, double>(), py::arg("T"), py::arg("eta"))
        .def_property_readonly("T", &KineticSchedule::T)
        .def_property_readonly("eta", &KineticSchedule::eta)
        .def_property_readonly("t", &KineticSchedule::t);

    m.def("fermi_dirac", &fermi_dirac, py::arg("energy"), py::arg("beta"), py::arg("mu"));

    py::class_<InitialProfile>(m, "InitialProfile")
        .def_static("fermi_dirac", &InitialProfile::fermi_dirac, py::arg("grid"), py::arg("beta"), py::arg("mu"))
        .def_static("constant", &InitialProfile::constant, py::arg("grid"), py::arg("c"))
        .def_static(
            "bump",
            [](const MomentumGrid& g, const std::vector<double>& c, double width, double height) {
                return InitialProfile::bump(g, c, width, height);
            },
            py::arg("grid"), py::arg("center"), py::arg("width"), py::arg("height") = 1.0)
        .def_static(
            "from_values",
            [](const MomentumGrid& g, py::array_t<double, py::array::c_style | py::array::forcecast> v) {
                return InitialProfile::from_values(g, to_vector(v));
            },
            py::arg("grid"), py::arg("values"))
        .def_property_readonly("grid", &InitialProfile::grid)
        .def_property_readonly("values", [](const InitialProfile& J) {
            return to_array(std::vector<double>(J.values().begin(), J.values().end()));
        })
        .def("as_distribution", &InitialProfile::as_distribution);

    py::class_<MomentumDistribution>(m, "MomentumDistribution")
        .def(py::init([](const MomentumGrid& g, py::array_t<double, py::array::c_style | py::array::forcecast> v) {
                 return MomentumDistribution(g, to_vector(v));
             }),
             py::arg("grid"), py::arg("values"))
        .def_readonly("grid", &MomentumDistribution::grid)
        .def_property_readonly("F", [](const MomentumDistribution& d) { return to_array(d.F); })
        .def("mass", &MomentumDistribution::mass);

    py::class_<DistributionEstimate>(m, "DistributionEstimate")
        .def_readonly("dist", &DistributionEstimate::dist)
        .def_property_readonly("std_error", [](const DistributionEstimate& e) { return to_array(e.std_error); })
        .def_readonly("n_samples", &DistributionEstimate::n_samples);

    m.def("evolve", &evolve, py::arg("f0"), py::arg("w"), py::arg("params"), "e^{-itH} f0 by split-step");
    m.def("evolve_adjoint", &evolve_adjoint, py::arg("f0"), py::arg("w"), py::arg("params"));
    m.def("duhamel_terms", &duhamel_terms, py::arg("f0"), py::arg("w"), py::arg("params"), py::arg("N"));
    m.def("momentum_density", &momentum_density, py::arg("J"), py::arg("plan"), py::arg("schedule"),
          py::arg("params"), py::arg("phases"), py::arg("workers") = 1);

    // ---- boltzmann --------------------------------------------------------

    py::class_<EnergyShells>(m, "EnergyShells")
        .def_readonly("grid", &EnergyShells::grid)
        .def_readonly("n_bins", &EnergyShells::n_bins)
        .def_readonly("e_min", &EnergyShells::e_min)
        .def_readonly("e_max", &EnergyShells::e_max)
        .def_readonly("width", &EnergyShells::width)
        .def_property_readonly("bin_of", [](const EnergyShells& s) { return to_array(s.bin_of); })
        .def_property_readonly("dos", [](const EnergyShells& s) { return to_array(s.dos); })
        .def_property_readonly("rate", [](const EnergyShells& s) { return to_array(s.rate); })
        .def("population", &EnergyShells::population)
        .def("center", &EnergyShells::center);

    m.def("shell_index", &shell_index, py::arg("energy"), py::arg("e_min"), py::arg("e_max"), py::arg("n_bins"));
    m.def("build_shells", &build_shells, py::arg("grid"), py::arg("d"), py::arg("n_bins"));
    m.def("shell_averages", &shell_averages);
    m.def("collision_apply", &collision_apply);
    m.def("solve_exact", &solve_exact, py::arg("F0"), py::arg("shells"), py::arg("T"));
    m.def("solve_ode", &solve_ode, py::arg("F0"), py::arg("shells"), py::arg("T"), py::arg("h"));
    m.def("solve_collision_history", &solve_collision_history, py::arg("F0"), py::arg("shells"), py::arg("T"),
          py::arg("n_paths"), py::arg("seed"), py::arg("workers") = 1);
    m.def("stationarity_residual", &stationarity_residual);

    py::class_<Quadruple>(m, "Quadruple")
        .def(py::init([](std::vector<double> p1, std::vector<double> p2, std::vector<double> q1,
                         std::vector<double> q2) { return Quadruple{p1, p2, q1, q2}; }),
             py::arg("p1"), py::arg("p2"), py::arg("q1"), py::arg("q2"));
    m.def("buu_detailed_balance", &buu_detailed_balance, py::arg("beta"), py::arg("mu"), py::arg("q"), py::arg("d"));
    m.def("buu_lipschitz_constant", &buu_lipschitz_constant);
    m.def("energy_violation", &energy_violation);

    // ---- diagrams ---------------------------------------------------------

    py::class_<LineDegrees>(m, "LineDegrees")
        .def(py::init<int, int>(), py::arg("n"), py::arg("n_tilde"))
        .def_readonly("n", &LineDegrees::n)
        .def_readonly("n_tilde", &LineDegrees::n_tilde);

    py::class_<FeynmanGraph>(m, "FeynmanGraph")
        .def_property_readonly("lines", [](const FeynmanGraph& g) { return g.lines; })
        .def_property_readonly("pairing",
                               [](const FeynmanGraph& g) {
                                   py::list out;
                                   for (const auto& [a, b] : g.pairing)
                                       out.append(py::make_tuple(py::make_tuple(a.line, a.position),
                                                                 py::make_tuple(b.line, b.position)));
                                   return out;
                               })
        .def("to_json", [](const FeynmanGraph& g) { return graph_to_json(g); })
        .def_static("from_json", &graph_from_json);

    m.def("enumerate_pairings", [](const std::vector<std::pair<int, int>>& deg) {
        std::vector<LineDegrees> d;
        for (auto [n, nt] : deg) d.push_back({n, nt});
        return enumerate_pairings(d);
    }, py::arg("degrees"), "All pairings for a list of (n, n_tilde) line degrees");
    m.def("double_factorial_odd", &double_factorial_odd);
    m.def("classify", [](const FeynmanGraph& g) {
        const auto c = classify(g);
        py::dict d;
        d["kind"] = to_string(c.kind);
        d["immediate_recollision"] = c.has_immediate_recollision;
        d["decorated_ladder"] = c.decorated_ladder;
        d["basic_ladder"] = c.basic_ladder;
        d["crossing"] = c.crossing;
        d["nesting"] = c.nesting;
        return d;
    });
    m.def("connectivity", [](const FeynmanGraph& g) { return std::string(to_string(connectivity(g))); });
    m.def("verify_dichotomy", [](int max_nbar) {
        const auto r = verify_dichotomy(max_nbar);
        return py::make_tuple(r.holds(), r.graphs_checked);
    }, py::arg("max_nbar"), "(holds, graphs_checked)");
    m.def("simplex_phase_integral", &simplex_phase_integral, py::arg("energies"), py::arg("t"),
          py::arg("panel") = 0.5);

    py::class_<LineObservable>(m, "LineObservable")
        .def(py::init([](py::array_t<cplx, py::array::c_style | py::array::forcecast> f,
                         py::array_t<cplx, py::array::c_style | py::array::forcecast> g) {
                 return LineObservable{to_cvector(f), to_cvector(g)};
             }),
             py::arg("f"), py::arg("g"));

    py::class_<WickReport>(m, "WickReport")
        .def_readonly("mc_value", &WickReport::mc_value)
        .def_readonly("stderr_re", &WickReport::stderr_re)
        .def_readonly("stderr_im", &WickReport::stderr_im)
        .def_readonly("pairing_sum", &WickReport::pairing_sum)
        .def_readonly("n_realizations", &WickReport::n_realizations)
        .def_property_readonly("z", &WickReport::z);

    m.def(
        "pairing_sum",
        [](int n, int n_tilde, const LineObservable& obs, const InitialProfile& J, double eta, double t,
           const LatticeSpec& spec) { return pairing_sum({{n, n_tilde}}, {obs}, J, eta, t, spec); },
        py::arg("n"), py::arg("n_tilde"), py::arg("obs"), py::arg("J"), py::arg("eta"), py::arg("t"), py::arg("spec"));
    m.def(
        "wick_oracle",
        [](int n, int n_tilde, const LineObservable& obs, const InitialProfile& J, double eta, double t,
           const LatticeSpec& spec, const EnsemblePlan& plan, double dt, int workers) {
            return wick_oracle(n, n_tilde, obs, J, eta, t, spec, plan, dt, workers);
        },
        py::arg("n"), py::arg("n_tilde"), py::arg("obs"), py::arg("J"), py::arg("eta"), py::arg("t"), py::arg("spec"),
        py::arg("plan"), py::arg("dt"), py::arg("workers") = 1);

    py::class_<ScheduleParams>(m, "ScheduleParams")
        .def_readonly("log_inv_epsilon", &ScheduleParams::log_inv_epsilon)
        .def_readonly("r", &ScheduleParams::r)
        .def_readonly("N", &ScheduleParams::N)
        .def_readonly("log_kappa", &ScheduleParams::log_kappa)
        .def_readonly("log_N_factorial", &ScheduleParams::log_N_factorial)
        .def_readonly("factorial_lower", &ScheduleParams::factorial_lower)
        .def_readonly("factorial_upper", &ScheduleParams::factorial_upper)
        .def_readonly("kappa_power", &ScheduleParams::kappa_power)
        .def_readonly("kappa_power_margin", &ScheduleParams::kappa_power_margin)
        .def_property_readonly("kappa", &ScheduleParams::kappa);
    m.def("schedule", &schedule, py::arg("epsilon"), py::arg("r") = 1);
    m.def("schedule_from_log", &schedule_from_log, py::arg("log_inv_epsilon"), py::arg("r") = 1);

    // ---- quasifree --------------------------------------------------------

    py::class_<TestFunctionSet>(m, "TestFunctionSet")
        .def_static("bumps", &TestFunctionSet::bumps, py::arg("spec"), py::arg("centers"), py::arg("width"))
        .def_property_readonly("r", &TestFunctionSet::r);

    py::class_<TwoPointMatrix>(m, "TwoPointMatrix")
        .def_readonly("m", &TwoPointMatrix::m)
        .def_readonly("seed", &TwoPointMatrix::seed);
    m.def("two_point_matrix", &two_point_matrix, py::arg("tset"), py::arg("J"), py::arg("w"), py::arg("params"));
    m.def("point_function_2r", &point_function_2r);

    py::class_<GapReport>(m, "GapReport")
        .def_readonly("r", &GapReport::r)
        .def_readonly("eta", &GapReport::eta)
        .def_readonly("t", &GapReport::t)
        .def_readonly("n_realizations", &GapReport::n_realizations)
        .def_readonly("mean_det", &GapReport::mean_det)
        .def_readonly("det_mean", &GapReport::det_mean)
        .def_readonly("gap", &GapReport::gap)
        .def_readonly("std_error", &GapReport::std_error);
    m.def("quasifreeness_gap", &quasifreeness_gap, py::arg("tset"), py::arg("J"), py::arg("plan"), py::arg("params"),
          py::arg("workers") = 1);

    // ---- convergence ------------------------------------------------------

    py::class_<ConvergenceRow>(m, "ConvergenceRow")
        .def_readonly("eta", &ConvergenceRow::eta)
        .def_readonly("t", &ConvergenceRow::t)
        .def_readonly("steps", &ConvergenceRow::steps)
        .def_readonly("n_samples", &ConvergenceRow::n_samples)
        .def_readonly("err", &ConvergenceRow::err)
        .def_readonly("err_se", &ConvergenceRow::err_se)
        .def_readonly("mass", &ConvergenceRow::mass)
        .def_readonly("mass_initial", &ConvergenceRow::mass_initial);

    py::class_<ConvergenceResult>(m, "ConvergenceResult")
        .def_readonly("rows", &ConvergenceResult::rows)
        .def_readonly("empirical", &ConvergenceResult::empirical)
        .def_readonly("boltzmann", &ConvergenceResult::boltzmann)
        .def_readonly("shells", &ConvergenceResult::shells)
        .def_readonly("decreasing", &ConvergenceResult::decreasing);

    m.def(
        "run_convergence",
        [](int d, int L, std::vector<double> etas, double T, int n_bins, std::size_t realizations, int phases,
           double dt, std::uint64_t seed, double beta, double mu, int workers) {
            ConvergenceConfig cfg;
            cfg.spec = LatticeSpec(d, L);
            cfg.continuum_per_axis = L;
            cfg.n_bins = n_bins;
            cfg.T = T;
            cfg.etas = std::move(etas);
            cfg.profile.kind = "fermi_dirac";
            cfg.profile.beta = beta;
            cfg.profile.mu = mu;
            cfg.realizations = realizations;
            cfg.phases = phases;
            cfg.dt = dt;
            cfg.seed = seed;
            cfg.workers = workers;
            py::gil_scoped_release release;
            return run_convergence(cfg);
        },
        py::arg("d") = 3, py::arg("L") = 32, py::arg("etas") = std::vector<double>{0.8, 0.4, 0.2}, py::arg("T") = 1.0,
        py::arg("n_bins") = 64, py::arg("realizations") = 100, py::arg("phases") = 4, py::arg("dt") = 0.05,
        py::arg("seed") = 1, py::arg("beta") = 2.0, py::arg("mu") = 0.5, py::arg("workers") = 1,
        "Lattice momentum density at t = T / eta^2 against the Boltzmann solution at T");
}
