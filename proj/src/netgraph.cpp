#include "distobs/netgraph.hpp"

#include <algorithm>
#include <functional>
#include <string>

namespace distobs {

Digraph::Digraph(int n_nodes) : n_(n_nodes), in_(n_nodes), out_(n_nodes) {
    if (n_nodes < 1) throw SchemaError("graph needs at least one node");
}

Digraph::Digraph(int n_nodes, const std::vector<std::pair<NodeId, NodeId>>& edges) : Digraph(n_nodes) {
    for (const auto& [j, i] : edges) add_edge(j, i);
}

void Digraph::check(NodeId v) const {
    if (v < 1 || v > n_) throw SchemaError("node id " + std::to_string(v) + " out of range 1.." + std::to_string(n_));
}

void Digraph::add_edge(NodeId from, NodeId to) {
    check(from);
    check(to);
    if (from == to) return;  // self-loops are implicit
    if (!edges_.insert({from, to}).second) return;
    auto ins = [](std::vector<NodeId>& v, NodeId x) { v.insert(std::lower_bound(v.begin(), v.end(), x), x); };
    ins(in_[to - 1], from);
    ins(out_[from - 1], to);
}

bool Digraph::has_edge(NodeId from, NodeId to) const { return edges_.count({from, to}) > 0; }

Digraph Digraph::induced(const std::vector<NodeId>& nodes) const {
    std::set<NodeId> keep(nodes.begin(), nodes.end());
    Digraph h(n_);
    for (const auto& [j, i] : edges_)
        if (keep.count(j) && keep.count(i)) h.add_edge(j, i);
    return h;
}

std::vector<std::vector<NodeId>> strong_components(const Digraph& g) {
    const int n = g.n_nodes();
    std::vector<int> index(n + 1, -1), low(n + 1, 0);
    std::vector<bool> on_stack(n + 1, false);
    std::vector<NodeId> stack;
    std::vector<std::vector<NodeId>> out;
    int counter = 0;
    std::function<void(NodeId)> visit = [&](NodeId v) {
        index[v] = low[v] = counter++;
        stack.push_back(v);
        on_stack[v] = true;
        for (NodeId w : g.out_neighbors(v)) {
            if (index[w] < 0) {
                visit(w);
                low[v] = std::min(low[v], low[w]);
            } else if (on_stack[w]) {
                low[v] = std::min(low[v], index[w]);
            }
        }
        if (low[v] == index[v]) {
            std::vector<NodeId> comp;
            NodeId w;
            do {
                w = stack.back();
                stack.pop_back();
                on_stack[w] = false;
                comp.push_back(w);
            } while (w != v);
            std::sort(comp.begin(), comp.end());
            out.push_back(std::move(comp));
        }
    };
    for (NodeId v = 1; v <= n; ++v)
        if (index[v] < 0) visit(v);
    return out;
}

std::vector<std::vector<NodeId>> source_components(const Digraph& g) {
    std::vector<std::vector<NodeId>> out;
    for (auto& comp : strong_components(g)) {
        std::set<NodeId> members(comp.begin(), comp.end());
        bool source = true;
        for (NodeId i : comp)
            for (NodeId j : g.in_neighbors(i))
                if (!members.count(j)) source = false;
        if (source) out.push_back(comp);
    }
    std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.front() < b.front(); });
    return out;
}

SpanningStructure spanning_dag(const Digraph& g, const std::vector<NodeId>& roots, int max_parents) {
    std::vector<NodeId> all(g.n_nodes());
    for (NodeId v = 1; v <= g.n_nodes(); ++v) all[v - 1] = v;
    return spanning_dag_within(g, roots, max_parents, all);
}

SpanningStructure spanning_dag_within(const Digraph& g, const std::vector<NodeId>& roots_in, int max_parents,
                                      const std::vector<NodeId>& scope) {
    if (max_parents < 1) throw SchemaError("max_parents must be at least 1");
    if (roots_in.empty()) throw SchemaError("spanning structure needs at least one root");
    SpanningStructure s;
    s.roots = roots_in;
    std::sort(s.roots.begin(), s.roots.end());
    s.roots.erase(std::unique(s.roots.begin(), s.roots.end()), s.roots.end());

    std::vector<bool> in_scope(g.n_nodes() + 1, false);
    for (NodeId v : scope) in_scope.at(v) = true;
    for (NodeId r : s.roots)
        if (r < 1 || r > g.n_nodes() || !in_scope[r]) throw SchemaError("root " + std::to_string(r) + " outside the node set");
    std::vector<int> layer(g.n_nodes() + 1, -1);
    std::vector<int> position(g.n_nodes() + 1, -1);
    std::vector<NodeId> current = s.roots;
    int depth = 0;
    while (!current.empty()) {
        for (NodeId v : current) {
            layer[v] = depth;
            position[v] = static_cast<int>(s.topo_order.size());
            s.topo_order.push_back(v);
            s.layer[v] = depth;
        }
        std::set<NodeId> next;
        for (NodeId v : current)
            for (NodeId w : g.out_neighbors(v))
                if (in_scope[w] && layer[w] < 0) next.insert(w);
        current.assign(next.begin(), next.end());
        ++depth;
    }
    std::vector<NodeId> missing;
    for (NodeId v = 1; v <= g.n_nodes(); ++v)
        if (in_scope[v] && layer[v] < 0) missing.push_back(v);
    if (!missing.empty()) throw NotSpanning(missing);

    // Parents: in-neighbors of the previous layer first, then earlier nodes
    // of the same layer, each group in ascending id.
    for (NodeId v : s.topo_order) {
        if (layer[v] == 0) continue;
        std::vector<NodeId> prev, same;
        for (NodeId u : g.in_neighbors(v)) {
            if (layer[u] == layer[v] - 1)
                prev.push_back(u);
            else if (layer[u] == layer[v] && position[u] < position[v])
                same.push_back(u);
        }
        std::vector<NodeId> ps = prev;
        ps.insert(ps.end(), same.begin(), same.end());
        if (static_cast<int>(ps.size()) > max_parents) ps.resize(max_parents);
        s.parents[v] = ps;
    }
    return s;
}

SpanningStructure spanning_forest(const Digraph& g, const std::vector<NodeId>& roots) {
    return spanning_dag(g, roots, 1);
}

SpanningStructure bfs_tree(const Digraph& g, NodeId root) { return spanning_dag(g, {root}, 1); }

}  // namespace distobs
