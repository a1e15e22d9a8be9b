#include "distobs/scenario.hpp"

#include <fstream>
#include <cstdint>
#include <functional>
#include <iomanip>
#include <ostream>
#include <sstream>

namespace distobs {

namespace {

template <class F>
auto schema(const std::string& where, F&& f) -> decltype(f()) {
    try {
        return f();
    } catch (const nlohmann::json::exception& e) {
        throw SchemaError(where + ": " + e.what());
    }
}

Vector vector_from_json(const Json& j) {
    if (!j.is_array()) throw SchemaError("expected an array of numbers");
    Vector v(j.size());
    for (size_t k = 0; k < j.size(); ++k) v(k) = j[k].get<double>();
    return v;
}

Json row_to_json(const WeightRow& w) {
    Json j = Json::array();
    for (const auto& [l, v] : w) j.push_back({l, v});
    return j;
}

WeightRow row_from_json(const Json& j) {
    WeightRow w;
    for (const auto& e : j) w[e.at(0).get<NodeId>()] = e.at(1).get<double>();
    return w;
}

Json rows_to_json(const std::map<NodeId, WeightRow>& rows) {
    Json j = Json::array();
    for (const auto& [i, w] : rows) j.push_back({{"node", i}, {"w", row_to_json(w)}});
    return j;
}

std::map<NodeId, WeightRow> rows_from_json(const Json& j) {
    std::map<NodeId, WeightRow> rows;
    for (const auto& e : j) rows[e.at("node").get<NodeId>()] = row_from_json(e.at("w"));
    return rows;
}

Json complex_to_json(Complex z) { return {z.real(), z.imag()}; }

std::vector<Matrix> matrices_from_json(const Json& j) {
    std::vector<Matrix> out;
    for (const auto& m : j) out.push_back(matrix_from_json(m));
    return out;
}

Json matrices_to_json(const std::vector<Matrix>& ms) {
    Json j = Json::array();
    for (const auto& m : ms) j.push_back(matrix_to_json(m));
    return j;
}

// FNV-1a, so the hash is the same across standard libraries.
std::string hex_hash(const std::string& s) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ull;
    }
    std::ostringstream os;
    os << std::hex << std::setw(16) << std::setfill('0') << h;
    return os.str();
}

ToleranceConfig tol_from_json(const Json& j) {
    ToleranceConfig t;
    if (j.contains("rank")) t.rank_tol = j["rank"].get<double>();
    if (j.contains("eig")) t.eig_cluster_tol = j["eig"].get<double>();
    if (j.contains("schur_margin")) t.schur_margin = j["schur_margin"].get<double>();
    t.validate();
    return t;
}

DesignOptions options_from_json(const Json& j, int n) {
    DesignOptions o;
    if (j.contains("tol")) o.tol = tol_from_json(j["tol"]);
    if (j.contains("poles")) o.poles.value = j["poles"].get<double>();
    if (j.contains("max_parents")) o.max_parents = j["max_parents"].get<int>();
    if (j.contains("order")) o.order = j["order"].get<std::vector<NodeId>>();
    if (j.contains("transformation")) {
        o.transformation = matrix_from_json(j["transformation"]);
        if (o.transformation->rows() != n || o.transformation->cols() != n)
            throw SchemaError("options.transformation must be " + std::to_string(n) + "x" + std::to_string(n));
    }
    if (j.contains("substate_dims")) o.substate_dims = j["substate_dims"].get<std::vector<int>>();
    if (j.contains("gains")) o.gains = matrices_from_json(j["gains"]);
    if (j.contains("weights"))
        for (const auto& e : j["weights"])
            o.weights.push_back({e.at("node").get<NodeId>(), e.at("neighbor").get<NodeId>(),
                                 e.at("w").get<std::vector<double>>()});
    return o;
}

EdgeSet edges_from_json(const Json& j) {
    EdgeSet s;
    for (const auto& e : j) s.insert({e.at(0).get<NodeId>(), e.at(1).get<NodeId>()});
    return s;
}

SimulationSpec simulation_from_json(const Json& j, const Plant& p) {
    SimulationSpec s;
    s.x0 = vector_from_json(j.at("x0"));
    if (s.x0.size() != p.n()) throw ShapeError("simulation.x0 must have " + std::to_string(p.n()) + " entries");
    if (j.contains("est0"))
        for (const auto& e : j["est0"]) s.est0.push_back(vector_from_json(e));
    s.K = j.at("K").get<int>();
    if (s.K < 1) throw SchemaError("simulation.K must be at least 1");
    if (j.contains("switching")) {
        const Json& w = j["switching"];
        SwitchingSpec sw;
        sw.T = w.at("T").get<int>();
        if (w.contains("schedule")) {
            SwitchingSignal sig;
            sig.window_T = sw.T;
            for (const auto& m : w.at("modes")) sig.modes.push_back(edges_from_json(m));
            sig.schedule = w["schedule"].get<std::vector<int>>();
            sw.fixed = sig;
        } else {
            sw.drop_prob = w.value("drop_prob", 0.0);
            sw.seed = w.value("seed", std::uint64_t{0});
        }
        s.switching = sw;
    }
    return s;
}

}  // namespace

Json matrix_to_json(const Matrix& M) {
    if (M.rows() == 0 || M.cols() == 0) return {{"rows", M.rows()}, {"cols", M.cols()}};
    Json j = Json::array();
    for (Eigen::Index r = 0; r < M.rows(); ++r) {
        Json row = Json::array();
        for (Eigen::Index c = 0; c < M.cols(); ++c) row.push_back(M(r, c));
        j.push_back(row);
    }
    return j;
}

Matrix matrix_from_json(const Json& j) {
    return schema("matrix", [&] {
        if (j.is_object()) return Matrix(j.at("rows").get<int>(), j.at("cols").get<int>());
        if (!j.is_array()) throw SchemaError("matrix must be a nested array");
        if (j.empty()) return Matrix(0, 0);
        const size_t cols = j[0].size();
        Matrix M(j.size(), cols);
        for (size_t r = 0; r < j.size(); ++r) {
            if (!j[r].is_array() || j[r].size() != cols) throw SchemaError("matrix rows have unequal lengths");
            for (size_t c = 0; c < cols; ++c) M(r, c) = j[r][c].get<double>();
        }
        return M;
    });
}

Scenario parse_scenario(const Json& j) {
    return schema("scenario", [&] {
        Scenario s;
        s.name = j.value("name", std::string("scenario"));
        s.hash = hex_hash(j.dump());
        const Json& pl = j.at("plant");
        s.plant.A = matrix_from_json(pl.at("A"));
        const int n = static_cast<int>(s.plant.A.rows());
        for (const auto& c : pl.at("C")) {
            Matrix Ci = matrix_from_json(c);
            if (Ci.size() == 0) Ci.resize(0, n);
            s.plant.C.push_back(Ci);
        }
        s.plant.validate();
        const Json& gr = j.at("graph");
        const int N = gr.at("nodes").get<int>();
        if (N != s.plant.n_nodes())
            throw ShapeError("graph.nodes = " + std::to_string(N) + " but the plant lists " +
                             std::to_string(s.plant.n_nodes()) + " measurement matrices");
        s.graph = Digraph(N);
        for (const auto& e : gr.at("edges")) s.graph.add_edge(e.at(0).get<NodeId>(), e.at(1).get<NodeId>());
        if (j.contains("options")) {
            const Json& o = j["options"];
            s.options = options_from_json(o, n);
            if (o.contains("scheme")) s.scheme = parse_scheme(o["scheme"].get<std::string>());
        }
        if (j.contains("simulation")) s.simulation = simulation_from_json(j["simulation"], s.plant);
        return s;
    });
}

Scenario load_scenario(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw SchemaError("cannot open " + path);
    Json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw SchemaError(path + ": " + e.what());
    }
    return parse_scenario(j);
}

Json report_to_json(const FeasibilityReport& r) {
    Json j;
    j["format_version"] = kFormatVersion;
    Json eig = Json::array();
    for (const auto& c : r.eig.classes)
        eig.push_back({{"lambda", complex_to_json(c.value)},
                       {"conjugate_pair", c.conjugate_pair},
                       {"algebraic", c.algebraic},
                       {"geometric", c.geometric},
                       {"unstable", is_unstable(c.value)}});
    j["eigenvalues"] = eig;
    Json det = Json::array();
    for (size_t i = 0; i < r.per_node_detectable.size(); ++i) {
        Json lams = Json::array();
        for (int c : r.per_node_detectable[i]) lams.push_back(complex_to_json(r.eig.classes[c].value));
        det.push_back({{"node", i + 1}, {"detectable", lams}});
    }
    j["per_node_detectable"] = det;
    Json roots = Json::array();
    for (size_t k = 0; k < r.unstable.size(); ++k)
        roots.push_back({{"lambda", complex_to_json(r.eig.classes[r.unstable[k]].value)}, {"roots", r.root_sets[k]}});
    j["root_sets"] = roots;
    j["source_components"] = r.source_comps;
    Json c1 = Json::array();
    for (const auto& v : r.cond1_detail) {
        Json und = Json::array();
        for (const auto& l : v.undetectable) und.push_back(complex_to_json(l));
        c1.push_back({{"component", v.nodes}, {"detectable", v.detectable}, {"undetectable", und}});
    }
    j["condition1"] = {{"holds", r.cond1}, {"components", c1}};
    Json c2 = Json::array();
    for (const auto& e : r.cond2_table)
        c2.push_back({{"component", e.component}, {"lambda", complex_to_json(e.lambda)}, {"roots", e.roots}});
    j["condition2"] = {{"holds", r.cond2}, {"table", c2}};
    return j;
}

std::string report_to_text(const FeasibilityReport& r) {
    auto nodes = [](const std::vector<NodeId>& v) {
        std::string s = "{";
        for (size_t k = 0; k < v.size(); ++k) s += (k ? "," : "") + std::to_string(v[k]);
        return s + "}";
    };
    std::ostringstream os;
    os << "eigenvalues:";
    for (const auto& c : r.eig.classes) {
        os << ' ' << format_complex(c.value);
        if (c.conjugate_pair) os << " (pair)";
        os << " [a=" << c.algebraic << ", g=" << c.geometric << (is_unstable(c.value) ? ", unstable]" : "]");
    }
    os << "\nsource components:";
    for (const auto& c : r.source_comps) os << ' ' << nodes(c);
    os << "\nroot nodes:";
    if (r.unstable.empty()) os << " none needed (A is Schur stable)";
    for (size_t k = 0; k < r.unstable.size(); ++k)
        os << "\n  lambda " << format_complex(r.eig.classes[r.unstable[k]].value) << ": " << nodes(r.root_sets[k]);
    os << "\ncondition 1 (source components detectable): " << (r.cond1 ? "holds" : "fails");
    for (const auto& v : r.cond1_detail) {
        if (v.detectable) continue;
        os << "\n  component " << nodes(v.nodes) << " cannot detect";
        for (const auto& l : v.undetectable) os << ' ' << format_complex(l);
    }
    os << "\ncondition 2 (root node per unstable eigenvalue in every source component): "
       << (r.cond2 ? "holds" : "fails");
    for (const auto& e : r.cond2_table)
        if (e.roots.empty())
            os << "\n  component " << nodes(e.component) << " has no root node for lambda " << format_complex(e.lambda);
    os << '\n';
    return os.str();
}

namespace {

Json parents_to_json(const std::vector<ParentSet>& ps) {
    Json j = Json::array();
    for (const auto& p : ps) j.push_back({{"channel", p.channel}, {"node", p.node}, {"parents", p.parents}});
    return j;
}

std::vector<ParentSet> parents_from_json(const Json& j) {
    std::vector<ParentSet> out;
    for (const auto& e : j)
        out.push_back({e.at("channel").get<std::string>(), e.at("node").get<NodeId>(),
                       e.at("parents").get<std::vector<NodeId>>()});
    return out;
}

Json c1_to_json(const CompactObserverBank& b) {
    Json j;
    j["scheme"] = "c1";
    j["A"] = matrix_to_json(b.A);
    j["certified"] = b.certified;
    Json comps = Json::array();
    for (const auto& cb : b.components) {
        const auto& d = cb.decomp;
        Json c;
        c["nodes"] = cb.nodes;
        c["decomposition"] = {{"order", d.order},     {"dims", d.dims},
                              {"u_dim", d.u_dim},     {"T", matrix_to_json(d.T)},
                              {"T_inv", matrix_to_json(d.T_inv)}, {"Abar", matrix_to_json(d.Abar)},
                              {"A", matrix_to_json(d.A)},         {"C", matrices_to_json(d.C)},
                              {"Cbar", matrices_to_json(d.Cbar)}};
        c["gains"] = matrices_to_json(cb.gains);
        Json ws = Json::array();
        for (const auto& w : cb.weights)
            ws.push_back({{"slot", w.slot}, {"source", w.source}, {"topo_order", w.topo_order}, {"rows", rows_to_json(w.rows)}});
        c["weights"] = ws;
        c["N"] = matrix_to_json(cb.N_mat);
        c["projectors"] = matrices_to_json(cb.projectors);
        Json nbs = Json::array();
        for (const auto& nb : cb.node_banks) {
            Json g = Json::array();
            for (const auto& [l, G] : nb.G) g.push_back({{"neighbor", l}, {"G", matrix_to_json(G)}});
            nbs.push_back({{"node", nb.node}, {"slot", nb.slot}, {"C", matrix_to_json(nb.C)},
                           {"TH", matrix_to_json(nb.TH)}, {"G", g}});
        }
        c["node_banks"] = nbs;
        Json subs = Json::array();
        for (const auto& s : cb.report.substates)
            subs.push_back({{"slot", s.slot}, {"source", s.source}, {"order", s.order}, {"rho", s.rho}});
        c["report"] = {{"substates", subs},
                       {"rho_AU", cb.report.rho_AU},
                       {"margin", cb.report.margin},
                       {"verdict", cb.report.verdict}};
        comps.push_back(c);
    }
    j["components"] = comps;
    Json ns = Json::array();
    for (const auto& r : b.nonsource) ns.push_back({{"node", r.node}, {"w", row_to_json(r.weights)}});
    j["nonsource"] = ns;
    j["parents"] = parents_to_json(b.parents);
    return j;
}

CompactObserverBank c1_from_json(const Json& j) {
    CompactObserverBank b;
    b.A = matrix_from_json(j.at("A"));
    b.certified = j.at("certified").get<bool>();
    for (const auto& c : j.at("components")) {
        ComponentBank cb;
        cb.nodes = c.at("nodes").get<std::vector<NodeId>>();
        const Json& dj = c.at("decomposition");
        auto& d = cb.decomp;
        d.order = dj.at("order").get<std::vector<NodeId>>();
        d.dims = dj.at("dims").get<std::vector<int>>();
        d.u_dim = dj.at("u_dim").get<int>();
        d.T = matrix_from_json(dj.at("T"));
        d.T_inv = matrix_from_json(dj.at("T_inv"));
        d.Abar = matrix_from_json(dj.at("Abar"));
        d.A = matrix_from_json(dj.at("A"));
        d.C = matrices_from_json(dj.at("C"));
        d.Cbar = matrices_from_json(dj.at("Cbar"));
        cb.gains = matrices_from_json(c.at("gains"));
        for (const auto& w : c.at("weights")) {
            SubstateWeights sw;
            sw.slot = w.at("slot").get<int>();
            sw.source = w.at("source").get<NodeId>();
            sw.topo_order = w.at("topo_order").get<std::vector<NodeId>>();
            sw.rows = rows_from_json(w.at("rows"));
            cb.weights.push_back(sw);
        }
        cb.N_mat = matrix_from_json(c.at("N"));
        cb.projectors = matrices_from_json(c.at("projectors"));
        for (const auto& nj : c.at("node_banks")) {
            NodeBank nb;
            nb.node = nj.at("node").get<NodeId>();
            nb.slot = nj.at("slot").get<int>();
            nb.C = matrix_from_json(nj.at("C"));
            nb.TH = matrix_from_json(nj.at("TH"));
            for (const auto& g : nj.at("G")) nb.G[g.at("neighbor").get<NodeId>()] = matrix_from_json(g.at("G"));
            cb.node_banks.push_back(nb);
        }
        const Json& rj = c.at("report");
        for (const auto& s : rj.at("substates")) {
            SubstateStability ss;
            ss.slot = s.at("slot").get<int>();
            ss.source = s.at("source").get<NodeId>();
            ss.order = s.at("order").get<std::vector<NodeId>>();
            ss.rho = s.at("rho").get<double>();
            cb.report.substates.push_back(ss);
        }
        cb.report.rho_AU = rj.at("rho_AU").get<double>();
        cb.report.margin = rj.at("margin").get<double>();
        cb.report.verdict = rj.at("verdict").get<bool>();
        b.components.push_back(std::move(cb));
    }
    for (const auto& r : j.at("nonsource")) b.nonsource.push_back({r.at("node").get<NodeId>(), row_from_json(r.at("w"))});
    b.parents = parents_from_json(j.at("parents"));
    return b;
}

Json c2_to_json(const C2ObserverBank& b) {
    Json j;
    j["scheme"] = "c2";
    j["A"] = matrix_to_json(b.A);
    j["certified"] = b.certified;
    Json classes = Json::array();
    for (const auto& c : b.jordan.classes)
        classes.push_back({{"lambda", complex_to_json(c.eig.value)},
                           {"conjugate_pair", c.eig.conjugate_pair},
                           {"algebraic", c.eig.algebraic},
                           {"geometric", c.eig.geometric},
                           {"offset", c.offset},
                           {"dim", c.dim},
                           {"J", matrix_to_json(c.J)}});
    j["jordan"] = {{"T", matrix_to_json(b.jordan.T)}, {"T_inv", matrix_to_json(b.jordan.T_inv)}, {"classes", classes}};
    Json nodes = Json::array();
    for (const auto& o : b.nodes) {
        const auto& s = o.split;
        nodes.push_back({{"node", o.node},
                         {"detectable", s.detectable},
                         {"undetectable", s.undetectable},
                         {"perm", s.perm},
                         {"J_O", matrix_to_json(s.J_O)},
                         {"J_UO", matrix_to_json(s.J_UO)},
                         {"C_O", matrix_to_json(s.C_O)},
                         {"C_UO", matrix_to_json(s.C_UO)},
                         {"Tbar", matrix_to_json(s.Tbar)},
                         {"w_O_dim", s.w_O_dim},
                         {"G_O", matrix_to_json(s.G_O)},
                         {"G_UO", matrix_to_json(s.G_UO)},
                         {"H_O", matrix_to_json(s.H_O)},
                         {"JJ", matrix_to_json(s.JJ)},
                         {"FF", matrix_to_json(s.FF)},
                         {"LL", matrix_to_json(o.LL)},
                         {"C", matrix_to_json(o.C)},
                         {"observer_dim", o.observer_dim()}});
    }
    j["nodes"] = nodes;
    Json ws = Json::array();
    for (const auto& w : b.weights)
        ws.push_back({{"class", w.cls}, {"roots", w.roots}, {"topo_order", w.topo_order}, {"rows", rows_to_json(w.rows)}});
    j["weights"] = ws;
    Json rc = Json::array();
    for (const auto& [c, r] : b.report.rho_consensus) rc.push_back({c, r});
    j["report"] = {{"rho_local", b.report.rho_local},
                   {"rho_consensus", rc},
                   {"margin", b.report.margin},
                   {"verdict", b.report.verdict}};
    j["parents"] = parents_to_json(b.parents);
    return j;
}

C2ObserverBank c2_from_json(const Json& j) {
    C2ObserverBank b;
    b.A = matrix_from_json(j.at("A"));
    b.certified = j.at("certified").get<bool>();
    const Json& jj = j.at("jordan");
    b.jordan.T = matrix_from_json(jj.at("T"));
    b.jordan.T_inv = matrix_from_json(jj.at("T_inv"));
    for (const auto& c : jj.at("classes")) {
        JordanClass jc;
        jc.eig.value = Complex(c.at("lambda").at(0).get<double>(), c.at("lambda").at(1).get<double>());
        jc.eig.conjugate_pair = c.at("conjugate_pair").get<bool>();
        jc.eig.algebraic = c.at("algebraic").get<int>();
        jc.eig.geometric = c.at("geometric").get<int>();
        jc.offset = c.at("offset").get<int>();
        jc.dim = c.at("dim").get<int>();
        jc.J = matrix_from_json(c.at("J"));
        b.jordan.classes.push_back(jc);
    }
    const int n = static_cast<int>(b.A.rows());
    for (const auto& o : j.at("nodes")) {
        C2NodeObserver ob;
        ob.node = o.at("node").get<NodeId>();
        auto& s = ob.split;
        s.node = ob.node;
        s.detectable = o.at("detectable").get<std::vector<int>>();
        s.undetectable = o.at("undetectable").get<std::vector<int>>();
        s.perm = o.at("perm").get<std::vector<int>>();
        if (static_cast<int>(s.perm.size()) != n) throw SchemaError("permutation has the wrong length");
        s.P = Matrix::Zero(n, n);
        for (int k = 0; k < n; ++k) s.P(s.perm[k], k) = 1.0;
        s.J_O = matrix_from_json(o.at("J_O"));
        s.J_UO = matrix_from_json(o.at("J_UO"));
        s.C_O = matrix_from_json(o.at("C_O"));
        s.C_UO = matrix_from_json(o.at("C_UO"));
        s.Tbar = matrix_from_json(o.at("Tbar"));
        s.w_O_dim = o.at("w_O_dim").get<int>();
        s.G_O = matrix_from_json(o.at("G_O"));
        s.G_UO = matrix_from_json(o.at("G_UO"));
        s.H_O = matrix_from_json(o.at("H_O"));
        s.JJ = matrix_from_json(o.at("JJ"));
        s.FF = matrix_from_json(o.at("FF"));
        ob.LL = matrix_from_json(o.at("LL"));
        ob.C = matrix_from_json(o.at("C"));
        ob.s_dim = static_cast<int>(s.JJ.rows());
        ob.uo_dim = s.uo_dim();
        b.jordan.nodes.push_back(s);
        b.nodes.push_back(std::move(ob));
    }
    for (const auto& w : j.at("weights")) {
        ClassWeights cw;
        cw.cls = w.at("class").get<int>();
        cw.roots = w.at("roots").get<std::vector<NodeId>>();
        cw.topo_order = w.at("topo_order").get<std::vector<NodeId>>();
        cw.rows = rows_from_json(w.at("rows"));
        b.weights.push_back(cw);
    }
    const Json& r = j.at("report");
    b.report.rho_local = r.at("rho_local").get<std::vector<double>>();
    for (const auto& e : r.at("rho_consensus")) b.report.rho_consensus[e.at(0).get<int>()] = e.at(1).get<double>();
    b.report.margin = r.at("margin").get<double>();
    b.report.verdict = r.at("verdict").get<bool>();
    b.parents = parents_from_json(j.at("parents"));
    return b;
}

}  // namespace

Json bank_to_json(const ObserverBank& bank) {
    Json j = std::visit(
        [](const auto& b) {
            if constexpr (std::is_same_v<std::decay_t<decltype(b)>, CompactObserverBank>)
                return c1_to_json(b);
            else
                return c2_to_json(b);
        },
        bank);
    j["format_version"] = kFormatVersion;
    return j;
}

ObserverBank bank_from_json(const Json& j) {
    return schema("bank", [&]() -> ObserverBank {
        if (j.at("format_version").get<int>() != kFormatVersion)
            throw SchemaError("unsupported bank format_version " + j["format_version"].dump());
        const std::string scheme = j.at("scheme").get<std::string>();
        if (scheme == "c1") return c1_from_json(j);
        if (scheme == "c2") return c2_from_json(j);
        throw SchemaError("unknown bank scheme '" + scheme + "'");
    });
}

std::optional<SwitchingSignal> scenario_signal(const Scenario& s, const ObserverBank& bank,
                                               std::optional<std::uint64_t> seed) {
    if (!s.simulation || !s.simulation->switching) return std::nullopt;
    const auto& sw = *s.simulation->switching;
    if (sw.fixed) return sw.fixed;
    return make_assumption2_signal(bank_parents(bank), s.graph, sw.T, s.simulation->K, sw.drop_prob,
                                   seed.value_or(sw.seed));
}

SimulationTrace run_scenario(const Scenario& s, const ObserverBank& bank, std::optional<std::uint64_t> seed) {
    if (!s.simulation) throw SchemaError("scenario has no simulation section");
    const auto signal = scenario_signal(s, bank, seed);
    SimulationSetup setup;
    setup.x0 = s.simulation->x0;
    setup.est0 = s.simulation->est0;
    setup.K = s.simulation->K;
    setup.signal = signal ? &*signal : nullptr;
    SimulationTrace tr = simulate(s.plant, s.graph, bank, setup);
    tr.scenario_hash = s.hash;
    if (signal && s.simulation->switching && !s.simulation->switching->fixed)
        tr.seed = seed.value_or(s.simulation->switching->seed);
    return tr;
}

void write_trace_csv(std::ostream& os, const SimulationTrace& tr) {
    if (tr.records.empty()) return;
    const int n = static_cast<int>(tr.records.front().x.size());
    const int N = tr.n_nodes();
    os << "step,mode";
    for (int a = 1; a <= n; ++a) os << ",x_" << a;
    for (int i = 1; i <= N; ++i) {
        for (int a = 1; a <= n; ++a) os << ",xhat_" << i << '_' << a;
        os << ",err_" << i << ",relerr_" << i;
    }
    os << '\n';
    os << std::setprecision(17);
    for (const auto& r : tr.records) {
        os << r.step << ',' << r.mode;
        for (int a = 0; a < n; ++a) os << ',' << r.x(a);
        for (int i = 0; i < N; ++i) {
            for (int a = 0; a < n; ++a) os << ',' << r.xhat[i](a);
            os << ',' << r.err[i] << ',' << r.relerr[i];
        }
        os << '\n';
    }
}

Json summary_to_json(const SimulationTrace& tr, double eps) {
    Json j;
    j["format_version"] = kFormatVersion;
    j["seed"] = tr.seed;
    j["scenario_hash"] = tr.scenario_hash;
    j["K"] = static_cast<int>(tr.records.size()) - 1;
    j["eps"] = eps;
    Json nodes = Json::array();
    for (const auto& m : convergence_metrics(tr, eps))
        nodes.push_back({{"node", m.node},
                         {"final_rel_error", m.final_rel_error},
                         {"first_step_below", m.first_step_below},
                         {"monotone_tail", m.monotone_tail}});
    j["nodes"] = nodes;
    return j;
}

}  // namespace distobs
