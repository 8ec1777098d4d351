#include "config.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <set>

namespace kinlab::cli {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

[[noreturn]] void fail(const std::string& field, const std::string& message) {
    throw ConfigError("config field '" + field + "': " + message);
}

void check_keys(const json& obj, const std::string& where, const std::set<std::string>& allowed) {
    if (!obj.is_object()) fail(where.empty() ? "<root>" : where, "must be an object");
    for (const auto& [k, v] : obj.items())
        if (!allowed.count(k)) fail(where.empty() ? k : where + "." + k, "unknown key");
}

double get_number(const json& v, const std::string& field) {
    if (v.is_string()) {
        const auto s = v.get<std::string>();
        if (s == "inf" || s == "+inf" || s == "infinity") return std::numeric_limits<double>::infinity();
        fail(field, "expected a number, got the string '" + s + "'");
    }
    if (!v.is_number()) fail(field, "expected a number");
    return v.get<double>();
}

long long get_integer(const json& v, const std::string& field) {
    if (v.is_number_integer() || v.is_number_unsigned()) return v.get<long long>();
    if (v.is_number_float()) {
        const double x = v.get<double>();
        if (x == std::floor(x) && std::abs(x) < 9e15) return static_cast<long long>(x);
    }
    fail(field, "expected an integer");
}

std::vector<double> get_number_list(const json& v, const std::string& field) {
    if (v.is_number() || v.is_string()) return {get_number(v, field)};
    if (!v.is_array()) fail(field, "expected a number or a list of numbers");
    std::vector<double> out;
    for (std::size_t i = 0; i < v.size(); ++i) out.push_back(get_number(v[i], field + "[" + std::to_string(i) + "]"));
    return out;
}

std::vector<double> get_vector(const json& v, const std::string& field, int d) {
    auto out = get_number_list(v, field);
    if (static_cast<int>(out.size()) != d) fail(field, "expected " + std::to_string(d) + " components");
    return out;
}

void require(bool ok, const std::string& field, const std::string& message) {
    if (!ok) fail(field, message);
}

ExperimentConfig parse_one(const json& doc, const std::string& kind) {
    check_keys(doc, "",
               {"experiment", "experiments", "lattice", "continuum", "eta", "T", "t", "dt", "ensemble", "ode_step",
                "profile", "state", "seed", "diagrams", "quasifree", "schedule", "budget_seconds", "out", "workers"});
    ExperimentConfig c;
    c.kind = kind;
    if (std::find(experiment_kinds().begin(), experiment_kinds().end(), kind) == experiment_kinds().end())
        fail("experiment", "unknown experiment kind '" + kind + "'");

    if (doc.contains("lattice")) {
        const auto& l = doc["lattice"];
        check_keys(l, "lattice", {"d", "L"});
        if (l.contains("d")) c.d = static_cast<int>(get_integer(l["d"], "lattice.d"));
        if (l.contains("L")) c.L = static_cast<int>(get_integer(l["L"], "lattice.L"));
    }
    require(c.d >= 1 && c.d <= 6, "lattice.d", "must be in 1..6");
    require(c.L >= 2 && c.L % 2 == 0, "lattice.L", "must be even and >= 2");
    require(std::pow(double(c.L), c.d) <= 1 << 24, "lattice", "L^d must not exceed 2^24 sites");
    c.M = c.L;
    if (doc.contains("continuum")) {
        const auto& m = doc["continuum"];
        check_keys(m, "continuum", {"M", "n_bins"});
        if (m.contains("M")) c.M = static_cast<int>(get_integer(m["M"], "continuum.M"));
        if (m.contains("n_bins")) c.n_bins = static_cast<int>(get_integer(m["n_bins"], "continuum.n_bins"));
    }
    require(c.M >= 2 && c.M % 2 == 0, "continuum.M", "must be even and >= 2");
    require(std::pow(double(c.M), c.d) <= 1 << 24, "continuum.M", "M^d must not exceed 2^24 points");
    require(c.n_bins >= 2, "continuum.n_bins", "must be >= 2");

    if (doc.contains("eta")) c.etas = get_number_list(doc["eta"], "eta");
    require(!c.etas.empty(), "eta", "must not be empty");
    for (double e : c.etas) require(std::isfinite(e) && e >= 0.0, "eta", "values must be finite and >= 0");
    if (doc.contains("T")) c.T = get_number(doc["T"], "T");
    require(std::isfinite(c.T) && c.T > 0.0, "T", "must be finite and > 0");
    if (doc.contains("t")) {
        c.t = get_number(doc["t"], "t");
        require(std::isfinite(*c.t) && *c.t >= 0.0, "t", "must be finite and >= 0");
    }
    if (doc.contains("dt")) c.dt = get_number(doc["dt"], "dt");
    require(std::isfinite(c.dt) && c.dt > 0.0, "dt", "must be finite and > 0");
    if (doc.contains("ode_step")) c.ode_step = get_number(doc["ode_step"], "ode_step");
    require(std::isfinite(c.ode_step) && c.ode_step > 0.0, "ode_step", "must be finite and > 0");

    if (doc.contains("ensemble")) {
        const auto& e = doc["ensemble"];
        check_keys(e, "ensemble", {"realizations", "phases", "paths"});
        if (e.contains("realizations")) {
            const auto r = get_integer(e["realizations"], "ensemble.realizations");
            require(r >= 1, "ensemble.realizations", "must be >= 1");
            c.realizations = static_cast<std::size_t>(r);
        }
        if (e.contains("phases")) c.phases = static_cast<int>(get_integer(e["phases"], "ensemble.phases"));
        if (e.contains("paths")) {
            const auto p = get_integer(e["paths"], "ensemble.paths");
            require(p >= 1, "ensemble.paths", "must be >= 1");
            c.paths = static_cast<std::size_t>(p);
        }
    }
    require(c.phases >= 1, "ensemble.phases", "must be >= 1");

    if (doc.contains("profile")) {
        const auto& p = doc["profile"];
        check_keys(p, "profile", {"kind", "beta", "mu", "c", "center", "width", "height"});
        if (p.contains("kind")) {
            require(p["kind"].is_string(), "profile.kind", "must be a string");
            c.profile.kind = p["kind"].get<std::string>();
        }
        if (p.contains("beta")) c.profile.beta = get_number(p["beta"], "profile.beta");
        if (p.contains("mu")) c.profile.mu = get_number(p["mu"], "profile.mu");
        if (p.contains("c")) c.profile.c = get_number(p["c"], "profile.c");
        if (p.contains("center")) c.profile.center = get_vector(p["center"], "profile.center", c.d);
        if (p.contains("width")) c.profile.width = get_number(p["width"], "profile.width");
        if (p.contains("height")) c.profile.height = get_number(p["height"], "profile.height");
    }
    const auto& pk = c.profile.kind;
    require(pk == "fermi_dirac" || pk == "constant" || pk == "bump", "profile.kind",
            "must be one of fermi_dirac, constant, bump");
    require(!std::isnan(c.profile.beta) && c.profile.beta >= 0.0, "profile.beta", "must be >= 0 (or \"inf\")");
    require(std::isfinite(c.profile.mu), "profile.mu", "must be finite");
    require(c.profile.c >= 0.0 && c.profile.c <= 1.0, "profile.c", "must lie in [0, 1]");
    require(c.profile.width > 0.0 && std::isfinite(c.profile.width), "profile.width", "must be > 0");
    require(c.profile.height >= 0.0 && c.profile.height <= 1.0, "profile.height", "must lie in [0, 1]");

    if (doc.contains("state")) {
        const auto& s = doc["state"];
        check_keys(s, "state", {"kind", "center", "width"});
        if (s.contains("kind")) {
            require(s["kind"].is_string(), "state.kind", "must be a string");
            c.state.kind = s["kind"].get<std::string>();
        }
        if (s.contains("center")) c.state.center = get_vector(s["center"], "state.center", c.d);
        if (s.contains("width")) c.state.width = get_number(s["width"], "state.width");
    }
    require(c.state.kind == "bump" || c.state.kind == "delta", "state.kind", "must be bump or delta");
    require(c.state.width > 0.0 && std::isfinite(c.state.width), "state.width", "must be > 0");
    if (c.state.center.empty()) c.state.center.assign(static_cast<std::size_t>(c.d), 0.125);

    if (doc.contains("seed")) {
        const auto& s = doc["seed"];
        require(s.is_number_unsigned() || (s.is_number_integer() && s.get<long long>() >= 0), "seed",
                "must be a non-negative integer");
        c.seed = s.get<std::uint64_t>();
    }

    if (doc.contains("diagrams")) {
        const auto& g = doc["diagrams"];
        check_keys(g, "diagrams", {"max_nbar", "terms", "panel"});
        if (g.contains("max_nbar")) c.max_nbar = static_cast<int>(get_integer(g["max_nbar"], "diagrams.max_nbar"));
        if (g.contains("panel")) c.quad_panel = get_number(g["panel"], "diagrams.panel");
        if (g.contains("terms")) {
            require(g["terms"].is_array(), "diagrams.terms", "must be a list of [n, n_tilde] pairs");
            c.wick_terms.clear();
            for (std::size_t i = 0; i < g["terms"].size(); ++i) {
                const auto& t = g["terms"][i];
                const std::string f = "diagrams.terms[" + std::to_string(i) + "]";
                require(t.is_array() && t.size() == 2, f, "must be a pair [n, n_tilde]");
                const int n = static_cast<int>(get_integer(t[0], f));
                const int nt = static_cast<int>(get_integer(t[1], f));
                require(n >= 0 && nt >= 0 && n + nt <= 4, f, "needs n, n_tilde >= 0 and n + n_tilde <= 4");
                c.wick_terms.push_back({n, nt});
            }
        }
    }
    require(c.max_nbar >= 0 && c.max_nbar <= 5, "diagrams.max_nbar", "must be in 0..5");
    require(c.quad_panel > 0.0 && std::isfinite(c.quad_panel), "diagrams.panel", "must be > 0");

    int qf_r = 2;
    if (doc.contains("quasifree")) {
        const auto& q = doc["quasifree"];
        check_keys(q, "quasifree", {"r", "centers", "width"});
        if (q.contains("r")) qf_r = static_cast<int>(get_integer(q["r"], "quasifree.r"));
        if (q.contains("width")) c.qf_width = get_number(q["width"], "quasifree.width");
        if (q.contains("centers")) {
            require(q["centers"].is_array(), "quasifree.centers", "must be a list of momenta");
            for (std::size_t i = 0; i < q["centers"].size(); ++i)
                c.qf_centers.push_back(
                    get_vector(q["centers"][i], "quasifree.centers[" + std::to_string(i) + "]", c.d));
            qf_r = static_cast<int>(c.qf_centers.size());
        }
    }
    require(qf_r >= 1 && qf_r <= 4, "quasifree.r", "must be in 1..4");
    require(c.qf_width > 0.0 && std::isfinite(c.qf_width), "quasifree.width", "must be > 0");
    if (c.qf_centers.empty())
        for (int j = 0; j < qf_r; ++j) {
            std::vector<double> ctr(static_cast<std::size_t>(c.d), 0.0);
            ctr[0] = qf_r == 1 ? 0.2 : 0.2 - 0.4 * j / (qf_r - 1);
            c.qf_centers.push_back(ctr);
        }

    if (doc.contains("schedule")) {
        const auto& s = doc["schedule"];
        check_keys(s, "schedule", {"epsilon", "r"});
        if (s.contains("epsilon")) c.epsilons = get_number_list(s["epsilon"], "schedule.epsilon");
        if (s.contains("r")) c.schedule_r = static_cast<int>(get_integer(s["r"], "schedule.r"));
    }
    for (double e : c.epsilons)
        require(e > 0.0 && e < std::exp(-std::exp(1.0)), "schedule.epsilon", "values must lie in (0, e^-e)");
    require(c.schedule_r >= 1, "schedule.r", "must be >= 1");

    if (doc.contains("budget_seconds")) c.budget_seconds = get_number(doc["budget_seconds"], "budget_seconds");
    require(c.budget_seconds > 0.0, "budget_seconds", "must be > 0");

    // kind-specific requirements
    if (kind == "converge") {
        require(c.realizations >= 2, "ensemble.realizations", "converge needs at least 2 realizations");
        for (std::size_t i = 0; i < c.etas.size(); ++i) {
            require(c.etas[i] > 0.0, "eta", "converge needs eta > 0");
            if (i > 0) require(c.etas[i] < c.etas[i - 1], "eta", "converge needs a strictly decreasing list");
        }
    }
    if (kind == "density")
        for (double e : c.etas) require(e > 0.0, "eta", "kinetic time T/eta^2 needs eta > 0");
    if (kind == "quasifree" && !c.t)
        for (double e : c.etas) require(e > 0.0, "eta", "eta = 0 needs an explicit microscopic time 't'");
    if (kind == "wick") {
        require(c.d <= 2, "lattice.d", "wick oracle needs d <= 2");
        require(c.L <= 16, "lattice.L", "wick oracle needs L <= 16");
    }
    if (kind == "evolve" && !c.t) require(c.etas.front() > 0.0, "t", "required when eta = 0");
    if (pk == "bump" && c.profile.center.empty()) c.profile.center.assign(static_cast<std::size_t>(c.d), 0.0);
    return c;
}

json merged(const json& base, const json& entry) {
    json out = base;
    out.erase("experiments");
    out.merge_patch(entry);
    return out;
}

std::string kind_of(const json& doc, const std::string& field) {
    if (!doc.contains("experiment")) fail(field, "missing 'experiment'");
    if (!doc["experiment"].is_string()) fail(field, "'experiment' must be a string");
    return doc["experiment"].get<std::string>();
}

}  // namespace

SuiteConfig parse_config(const json& doc, const std::optional<std::string>& kind, const Overrides& ov) {
    if (!doc.is_object()) throw ConfigError("config must be a JSON object");
    SuiteConfig suite;
    if (doc.contains("out")) {
        if (!doc["out"].is_string()) fail("out", "must be a string");
        suite.options.out = doc["out"].get<std::string>();
    }
    if (doc.contains("workers")) suite.options.workers = static_cast<int>(get_integer(doc["workers"], "workers"));
    if (ov.out) suite.options.out = *ov.out;
    if (ov.workers) suite.options.workers = *ov.workers;
    if (suite.options.workers < 1) fail("workers", "must be >= 1");

    json base = doc;
    if (ov.seed) base["seed"] = *ov.seed;

    if (kind) {
        json single = base;
        single.erase("experiments");
        suite.experiments.push_back(parse_one(single, *kind));
    } else if (doc.contains("experiments")) {
        const auto& list = doc["experiments"];
        if (!list.is_array()) fail("experiments", "must be a list");
        for (std::size_t i = 0; i < list.size(); ++i) {
            const std::string field = "experiments[" + std::to_string(i) + "]";
            if (!list[i].is_object()) fail(field, "must be an object");
            const json entry = merged(base, list[i]);
            suite.experiments.push_back(parse_one(entry, kind_of(entry, field)));
        }
    } else if (doc.contains("experiment")) {
        suite.experiments.push_back(parse_one(base, kind_of(base, "experiment")));
    }
    return suite;
}

SuiteConfig load_config(const std::string& path, const std::optional<std::string>& kind, const Overrides& ov) {
    json doc = json::object();
    if (!path.empty()) {
        std::ifstream in(path);
        if (!in) throw ConfigError("cannot open config file '" + path + "'");
        try {
            doc = json::parse(in);
        } catch (const json::parse_error& e) {
            throw ConfigError("config file '" + path + "' is not valid JSON: " + e.what());
        }
    }
    return parse_config(doc, kind, ov);
}

ordered_json ExperimentConfig::to_json() const {
    ordered_json j;
    j["experiment"] = kind;
    j["lattice"] = {{"d", d}, {"L", L}};
    j["continuum"] = {{"M", M}, {"n_bins", n_bins}};
    j["eta"] = etas;
    j["T"] = T;
    if (t) j["t"] = *t;
    j["dt"] = dt;
    j["ensemble"] = {{"realizations", realizations}, {"phases", phases}, {"paths", paths}};
    j["ode_step"] = ode_step;
    ordered_json p;
    p["kind"] = profile.kind;
    if (std::isinf(profile.beta))
        p["beta"] = "inf";
    else
        p["beta"] = profile.beta;
    p["mu"] = profile.mu;
    p["c"] = profile.c;
    p["center"] = profile.center;
    p["width"] = profile.width;
    p["height"] = profile.height;
    j["profile"] = p;
    j["state"] = {{"kind", state.kind}, {"center", state.center}, {"width", state.width}};
    j["seed"] = seed;
    ordered_json terms = ordered_json::array();
    for (const auto& t : wick_terms) terms.push_back({t.n, t.n_tilde});
    j["diagrams"] = {{"max_nbar", max_nbar}, {"terms", terms}, {"panel", quad_panel}};
    j["quasifree"] = {{"centers", qf_centers}, {"width", qf_width}};
    j["schedule"] = {{"epsilon", epsilons}, {"r", schedule_r}};
    j["budget_seconds"] = budget_seconds;
    return j;
}

std::string config_hash(const ExperimentConfig& cfg) {
    const auto text = cfg.to_json().dump();
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char ch : text) {
        h ^= ch;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

double estimate_seconds(const ExperimentConfig& c) {
    const LatticeSpec spec(c.d, c.L);
    auto steps = [&](double t) { return std::max(1.0, std::ceil(t / c.dt)); };
    auto kinetic_t = [&](double eta) { return eta > 0.0 ? c.T / (eta * eta) : 0.0; };
    const double R = static_cast<double>(c.realizations);
    double s = 0.0;
    if (c.kind == "evolve") {
        s = propagation_cost_seconds(spec, steps(c.t ? *c.t : kinetic_t(c.etas.front())));
    } else if (c.kind == "density") {
        s = R * c.phases * propagation_cost_seconds(spec, steps(kinetic_t(c.etas.front())));
    } else if (c.kind == "converge") {
        for (double e : c.etas) s += R * c.phases * propagation_cost_seconds(spec, steps(kinetic_t(e)));
    } else if (c.kind == "quasifree") {
        for (double e : c.etas)
            s += R * 2.0 * static_cast<double>(c.qf_centers.size()) * propagation_cost_seconds(spec, steps(kinetic_t(e)));
    } else if (c.kind == "wick") {
        const double t = c.t ? *c.t : 2.0;
        for (const auto& term : c.wick_terms)
            s += R * (term.n + term.n_tilde + 2) * propagation_cost_seconds(spec, steps(t));
    } else if (c.kind == "boltzmann") {
        const double points = std::pow(double(c.M), c.d);
        s = points * static_cast<double>(c.paths) * 5e-8 + points * 4.0 * (c.T / c.ode_step) * 2e-8;
    }
    return s;
}

}  // namespace kinlab::cli
