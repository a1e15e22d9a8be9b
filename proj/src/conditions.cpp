#include "distobs/conditions.hpp"

#include <algorithm>
#include <string>

namespace distobs {

namespace {

void check_graph(const Plant& p, const Digraph& g) {
    p.validate();
    if (g.n_nodes() != p.n_nodes())
        throw ShapeError("graph has " + std::to_string(g.n_nodes()) + " nodes but the plant has " +
                         std::to_string(p.n_nodes()) + " sensors");
}

}  // namespace

std::vector<int> detectable_set(const Matrix& A, const Matrix& C_i, const EigenInfo& eig, const ToleranceConfig& tol) {
    std::vector<int> out;
    for (size_t j = 0; j < eig.classes.size(); ++j)
        if (pbh_detectable(A, C_i, eig.classes[j].value, tol)) out.push_back(static_cast<int>(j));
    return out;
}

std::vector<int> detectable_set(const Matrix& A, const Matrix& C_i, const ToleranceConfig& tol) {
    return detectable_set(A, C_i, eigen_info(A, tol), tol);
}

bool check_condition1(const Plant& p, const Digraph& g, const ToleranceConfig& tol,
                      std::vector<ComponentVerdict>* detail) {
    check_graph(p, g);
    const EigenInfo eig = eigen_info(p.A, tol);
    bool all = true;
    for (const auto& comp : source_components(g)) {
        ComponentVerdict v;
        v.nodes = comp;
        const Matrix Cs = p.stacked_C(comp);
        for (int j : eig.unstable_classes(tol)) {
            if (!pbh_detectable(p.A, Cs, eig.classes[j].value, tol)) {
                v.detectable = false;
                v.undetectable.push_back(eig.classes[j].value);
            }
        }
        all = all && v.detectable;
        if (detail) detail->push_back(std::move(v));
    }
    return all;
}

bool check_condition2(const Plant& p, const Digraph& g, const ToleranceConfig& tol, std::vector<RootEntry>* table) {
    check_graph(p, g);
    const EigenInfo eig = eigen_info(p.A, tol);
    std::vector<std::vector<int>> det;
    for (NodeId i = 1; i <= p.n_nodes(); ++i) det.push_back(detectable_set(p.A, p.C_of(i), eig, tol));
    bool all = true;
    for (const auto& comp : source_components(g)) {
        for (int j : eig.unstable_classes(tol)) {
            RootEntry e;
            e.component = comp;
            e.lambda = eig.classes[j].value;
            for (NodeId l : comp)
                if (std::find(det[l - 1].begin(), det[l - 1].end(), j) != det[l - 1].end()) e.roots.push_back(l);
            all = all && !e.roots.empty();
            if (table) table->push_back(std::move(e));
        }
    }
    return all;
}

FeasibilityReport analyze(const Plant& p, const Digraph& g, const ToleranceConfig& tol) {
    check_graph(p, g);
    FeasibilityReport r;
    r.eig = eigen_info(p.A, tol);
    r.unstable = r.eig.unstable_classes(tol);
    for (NodeId i = 1; i <= p.n_nodes(); ++i) r.per_node_detectable.push_back(detectable_set(p.A, p.C_of(i), r.eig, tol));
    for (int j : r.unstable) {
        std::vector<NodeId> roots;
        for (NodeId i = 1; i <= p.n_nodes(); ++i) {
            const auto& d = r.per_node_detectable[i - 1];
            if (std::find(d.begin(), d.end(), j) != d.end()) roots.push_back(i);
        }
        r.root_sets.push_back(roots);
    }
    r.source_comps = source_components(g);
    r.cond1 = check_condition1(p, g, tol, &r.cond1_detail);
    r.cond2 = check_condition2(p, g, tol, &r.cond2_table);
    if (r.cond2 && !r.cond1)
        throw NumericalError("inconsistent verdicts: every source component has root nodes but is not detectable");
    return r;
}

}  // namespace distobs
