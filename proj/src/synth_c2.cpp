#include "distobs/synth_c2.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace distobs {

const ClassWeights* C2ObserverBank::weights_for(int cls) const {
    for (const auto& w : weights)
        if (w.cls == cls) return &w;
    return nullptr;
}

Matrix local_observer(const NodeSplit& split, const PolePolicy& policy, const ToleranceConfig& tol) {
    try {
        return place_detectable_gain(split.JJ, split.FF, policy, tol);
    } catch (const NotObservable&) {
        throw NumericalError("local pair of node " + std::to_string(split.node) + " is not detectable");
    }
}

std::vector<ClassWeights> eig_consensus_weights(const Digraph& g, const JordanSystem& js, const ToleranceConfig& tol,
                                                int max_parents) {
    std::vector<ClassWeights> out;
    for (size_t j = 0; j < js.classes.size(); ++j) {
        const Complex lam = js.classes[j].eig.value;
        if (!is_unstable(lam, tol)) continue;
        ClassWeights w;
        w.cls = static_cast<int>(j);
        for (const auto& s : js.nodes)
            if (std::find(s.detectable.begin(), s.detectable.end(), w.cls) != s.detectable.end())
                w.roots.push_back(s.node);
        if (w.roots.empty()) {
            std::vector<int> all;
            for (NodeId i = 1; i <= g.n_nodes(); ++i) all.push_back(i);
            throw Condition2Infeasible(lam, all);
        }
        SpanningStructure st;
        try {
            st = spanning_dag(g, w.roots, max_parents);
        } catch (const NotSpanning& e) {
            throw Condition2Infeasible(lam, e.unreachable());
        }
        w.topo_order = st.topo_order;
        for (const auto& [node, ps] : st.parents) {
            WeightRow row;
            for (NodeId l : ps) row[l] = 1.0 / static_cast<double>(ps.size());
            w.rows[node] = row;
        }
        out.push_back(std::move(w));
    }
    return out;
}

namespace {

// Follower block of a class layer: rows and columns are the non-root nodes in
// topological order.
Matrix follower_block(const ClassWeights& w) {
    std::vector<NodeId> followers;
    for (NodeId v : w.topo_order)
        if (!std::binary_search(w.roots.begin(), w.roots.end(), v)) followers.push_back(v);
    std::map<NodeId, int> pos;
    for (size_t a = 0; a < followers.size(); ++a) pos[followers[a]] = static_cast<int>(a);
    Matrix W = Matrix::Zero(followers.size(), followers.size());
    for (const auto& [i, row] : w.rows)
        for (const auto& [l, v] : row)
            if (pos.count(l) && pos.count(i)) W(pos[i], pos[l]) += v;
    return W;
}

}  // namespace

C2ObserverBank assemble_c2_bank(const Plant& p, const JordanSystem& js, const std::vector<Matrix>& gains,
                                const std::vector<ClassWeights>& weights, const ToleranceConfig& tol) {
    p.validate();
    if (static_cast<int>(js.nodes.size()) != p.n_nodes() || static_cast<int>(gains.size()) != p.n_nodes())
        throw ShapeError("need one local split and one gain per node");
    C2ObserverBank b;
    b.A = p.A;
    b.jordan = js;
    b.weights = weights;
    b.report.margin = tol.schur_margin;
    bool ok = true;
    for (NodeId i = 1; i <= p.n_nodes(); ++i) {
        const NodeSplit& s = js.nodes[i - 1];
        C2NodeObserver o;
        o.node = i;
        o.split = s;
        o.LL = gains[i - 1];
        o.C = p.C_of(i);
        o.s_dim = static_cast<int>(s.JJ.rows());
        o.uo_dim = s.uo_dim();
        if (o.LL.rows() != o.s_dim || o.LL.cols() != s.FF.rows())
            throw ShapeError("local gain of node " + std::to_string(i) + " has the wrong shape");
        for (int j : s.undetectable)
            if (!b.weights_for(j))
                throw InvalidWeights("node " + std::to_string(i) + " has no consensus layer for an undetectable class");
        const double rho = o.s_dim ? structured_spectral_radius(s.JJ - o.LL * s.FF, tol) : 0.0;
        b.report.rho_local.push_back(rho);
        ok = ok && rho <= 1.0 - tol.schur_margin;
        b.nodes.push_back(std::move(o));
    }
    for (const auto& w : weights) {
        for (const auto& [i, row] : w.rows) {
            double sum = 0.0;
            for (const auto& [l, v] : row) {
                if (v < 0.0) throw InvalidWeights("negative consensus weight at node " + std::to_string(i));
                sum += v;
            }
            if (std::abs(sum - 1.0) > 1e-9)
                throw InvalidWeights("consensus weights of node " + std::to_string(i) + " do not sum to one");
        }
        const Matrix W = follower_block(w);
        const double rho = W.size() ? structured_spectral_radius(W, tol) * spectral_radius(js.classes[w.cls].J) : 0.0;
        b.report.rho_consensus[w.cls] = rho;
        ok = ok && rho <= 1.0 - tol.schur_margin;

        for (const auto& [i, row] : w.rows) {
            ParentSet ps;
            ps.channel = "class" + std::to_string(w.cls + 1);
            ps.node = i;
            for (const auto& [l, v] : row)
                if (l != i && v > 0) ps.parents.push_back(l);
            b.parents.push_back(ps);
        }
    }
    b.report.verdict = ok;
    b.certified = ok;
    return b;
}

}  // namespace distobs
