#include "kinlab/diagrams.hpp"

#include <json.hpp>

#include <algorithm>
#include <stdexcept>

namespace kinlab {

// ---- graphs -------------------------------------------------------------

int FeynmanGraph::total_vertices() const {
    int s = 0;
    for (const auto& l : lines) s += l.total();
    return s;
}

int FeynmanGraph::nbar() const {
    if (lines.size() != 1) throw std::invalid_argument("nbar is defined for a single particle line");
    return lines[0].total() / 2;
}

VertexAddress FeynmanGraph::partner(VertexAddress v) const {
    for (const auto& [a, b] : pairing) {
        if (a == v) return b;
        if (b == v) return a;
    }
    throw std::invalid_argument("vertex is not part of the pairing");
}

void FeynmanGraph::validate() const {
    if (lines.empty()) throw std::invalid_argument("graph has no particle lines");
    std::vector<std::vector<int>> seen(lines.size());
    for (std::size_t j = 0; j < lines.size(); ++j) {
        if (lines[j].n < 0 || lines[j].n_tilde < 0) throw std::invalid_argument("negative line degree");
        seen[j].assign(static_cast<std::size_t>(lines[j].total()) + 1, 0);
    }
    for (const auto& [a, b] : pairing) {
        for (const auto& v : {a, b}) {
            if (v.line < 0 || v.line >= static_cast<int>(lines.size()) || v.position < 1 ||
                v.position > lines[static_cast<std::size_t>(v.line)].total())
                throw std::invalid_argument("vertex address out of range");
            ++seen[static_cast<std::size_t>(v.line)][static_cast<std::size_t>(v.position)];
        }
        if (!(a < b)) throw std::invalid_argument("pair must be stored with first < second");
    }
    for (const auto& line : seen)
        for (std::size_t p = 1; p < line.size(); ++p)
            if (line[p] != 1) throw std::invalid_argument("pairing is not a perfect matching");
}

std::uint64_t double_factorial_odd(int k) {
    if (k < 0) throw std::invalid_argument("double_factorial_odd: negative argument");
    std::uint64_t r = 1;
    for (int j = 2 * k - 1; j > 1; j -= 2) r *= static_cast<std::uint64_t>(j);
    return r;
}

namespace {

void match(std::vector<VertexAddress>& free, std::vector<std::pair<VertexAddress, VertexAddress>>& current,
           const std::vector<LineDegrees>& degrees, std::vector<FeynmanGraph>& out) {
    if (free.empty()) {
        out.push_back({degrees, current});
        return;
    }
    const VertexAddress first = free.front();
    for (std::size_t k = 1; k < free.size(); ++k) {
        const VertexAddress other = free[k];
        std::vector<VertexAddress> rest;
        rest.reserve(free.size() - 2);
        for (std::size_t m = 1; m < free.size(); ++m)
            if (m != k) rest.push_back(free[m]);
        current.emplace_back(first, other);
        match(rest, current, degrees, out);
        current.pop_back();
    }
}

}  // namespace

std::vector<FeynmanGraph> enumerate_pairings(const std::vector<LineDegrees>& degrees) {
    if (degrees.empty()) throw std::invalid_argument("enumerate_pairings: no particle lines");
    std::vector<VertexAddress> vertices;
    for (std::size_t j = 0; j < degrees.size(); ++j) {
        if (degrees[j].n < 0 || degrees[j].n_tilde < 0)
            throw std::invalid_argument("enumerate_pairings: negative degree");
        for (int p = 1; p <= degrees[j].total(); ++p) vertices.push_back({static_cast<int>(j), p});
    }
    if (vertices.size() % 2 != 0) throw std::invalid_argument("enumerate_pairings: odd number of vertices");
    if (vertices.size() > 12) throw std::invalid_argument("enumerate_pairings: more than 12 vertices");
    std::vector<FeynmanGraph> out;
    std::vector<std::pair<VertexAddress, VertexAddress>> current;
    match(vertices, current, degrees, out);
    return out;
}

// ---- classification -----------------------------------------------------

const char* to_string(GraphKind k) {
    switch (k) {
        case GraphKind::basic_ladder: return "basic_ladder";
        case GraphKind::decorated_ladder: return "decorated_ladder";
        case GraphKind::crossing: return "crossing";
        case GraphKind::nesting: return "nesting";
        case GraphKind::other_nonladder: return "other_nonladder";
    }
    return "unknown";
}

const char* to_string(Connectivity c) {
    return c == Connectivity::completely_disconnected ? "completely_disconnected" : "non_disconnected";
}

GraphClass classify(const FeynmanGraph& g) {
    if (g.lines.size() != 1) throw std::invalid_argument("classify: the ladder taxonomy needs a single particle line");
    g.validate();
    const int n = g.lines[0].n;
    const int total = g.lines[0].total();
    std::vector<int> partner(static_cast<std::size_t>(total) + 1);
    for (const auto& [a, b] : g.pairing) {
        partner[static_cast<std::size_t>(a.position)] = b.position;
        partner[static_cast<std::size_t>(b.position)] = a.position;
    }
    auto same_side = [n](int a, int b) { return (a <= n && b <= n) || (a >= n + 1 && b >= n + 1); };
    auto immediate = [&](int a, int b) { return b == a + 1 && same_side(a, b); };
    auto rung = [n](int a, int b) { return a <= n && b >= n + 1; };

    GraphClass c{GraphKind::other_nonladder, false, true, false, false, false};
    std::vector<std::pair<int, int>> rungs;
    for (const auto& [va, vb] : g.pairing) {
        const int a = va.position, b = vb.position;
        if (immediate(a, b))
            c.has_immediate_recollision = true;
        else if (rung(a, b))
            rungs.emplace_back(a, b);
        else
            c.decorated_ladder = false;
    }
    std::sort(rungs.begin(), rungs.end());
    for (std::size_t k = 1; k < rungs.size(); ++k)
        if (!(rungs[k].second < rungs[k - 1].second)) c.decorated_ladder = false;
    c.basic_ladder = c.decorated_ladder && !c.has_immediate_recollision;

    for (const auto& [a1, b1] : g.pairing)
        for (const auto& [a2, b2] : g.pairing) {
            const int l = a1.position, lp = b1.position, j = a2.position, jp = b2.position;
            if (l < j && j < lp && lp < jp) c.crossing = true;
        }

    for (const auto& [va, vb] : g.pairing) {
        const int a = va.position, b = vb.position;
        if (!same_side(a, b) || b - a < 3 || (b - a) % 2 == 0) continue;
        bool progression = true;
        for (int j = a + 1; j < b; j += 2) progression = progression && partner[static_cast<std::size_t>(j)] == j + 1;
        if (progression) c.nesting = true;
    }

    if (c.basic_ladder)
        c.kind = GraphKind::basic_ladder;
    else if (c.decorated_ladder)
        c.kind = GraphKind::decorated_ladder;
    else if (c.crossing)
        c.kind = GraphKind::crossing;
    else if (c.nesting)
        c.kind = GraphKind::nesting;
    return c;
}

Connectivity connectivity(const FeynmanGraph& g) {
    g.validate();
    for (const auto& [a, b] : g.pairing)
        if (a.line != b.line) return Connectivity::non_disconnected;
    return Connectivity::completely_disconnected;
}

DichotomyReport verify_dichotomy(int max_nbar) {
    if (max_nbar < 0 || max_nbar > 5) throw std::invalid_argument("verify_dichotomy: max_nbar must be in 0..5");
    DichotomyReport report{max_nbar, 0, {}, {}};
    for (int nbar = 1; nbar <= max_nbar; ++nbar) {
        for (int n = 0; n <= 2 * nbar; ++n) {
            const LineDegrees deg{n, 2 * nbar - n};
            DichotomyReport::Split split{deg.n, deg.n_tilde, 0, {}};
            for (const auto& g : enumerate_pairings({deg})) {
                const auto c = classify(g);
                ++split.counts[c.kind];
                ++split.graphs;
                if (!(c.decorated_ladder || c.crossing || c.nesting)) report.counterexamples.push_back(g);
            }
            report.graphs_checked += split.graphs;
            report.splits.push_back(std::move(split));
        }
    }
    return report;
}

// ---- JSON ---------------------------------------------------------------

std::string graph_to_json(const FeynmanGraph& g, bool with_class) {
    nlohmann::ordered_json j;
    j["lines"] = nlohmann::ordered_json::array();
    for (const auto& l : g.lines) j["lines"].push_back({{"n", l.n}, {"n_tilde", l.n_tilde}});
    j["pairing"] = nlohmann::ordered_json::array();
    for (const auto& [a, b] : g.pairing)
        j["pairing"].push_back({{a.line, a.position}, {b.line, b.position}});
    if (with_class) {
        if (g.lines.size() == 1) {
            const auto c = classify(g);
            j["class"] = {{"kind", to_string(c.kind)},
                          {"immediate_recollision", c.has_immediate_recollision},
                          {"decorated_ladder", c.decorated_ladder},
                          {"basic_ladder", c.basic_ladder},
                          {"crossing", c.crossing},
                          {"nesting", c.nesting}};
        }
        j["connectivity"] = to_string(connectivity(g));
    }
    return j.dump();
}

FeynmanGraph graph_from_json(const std::string& text) {
    const auto j = nlohmann::json::parse(text);
    FeynmanGraph g;
    for (const auto& l : j.at("lines")) g.lines.push_back({l.at("n").get<int>(), l.at("n_tilde").get<int>()});
    for (const auto& p : j.at("pairing")) {
        VertexAddress a{p.at(0).at(0).get<int>(), p.at(0).at(1).get<int>()};
        VertexAddress b{p.at(1).at(0).get<int>(), p.at(1).at(1).get<int>()};
        if (b < a) std::swap(a, b);
        g.pairing.emplace_back(a, b);
    }
    std::sort(g.pairing.begin(), g.pairing.end());
    g.validate();
    return g;
}

}  // namespace kinlab
