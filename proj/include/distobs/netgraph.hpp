#pragma once

#include <map>
#include <set>
#include <utility>
#include <vector>

#include "distobs/errors.hpp"

namespace distobs {

using NodeId = int;  // 1-based

class Digraph {
public:
    Digraph() = default;
    explicit Digraph(int n_nodes);
    Digraph(int n_nodes, const std::vector<std::pair<NodeId, NodeId>>& edges);

    // j -> i: node i receives information from node j
    void add_edge(NodeId from, NodeId to);
    bool has_edge(NodeId from, NodeId to) const;

    int n_nodes() const { return n_; }
    const std::set<std::pair<NodeId, NodeId>>& edges() const { return edges_; }
    const std::vector<NodeId>& in_neighbors(NodeId i) const { return in_[i - 1]; }
    const std::vector<NodeId>& out_neighbors(NodeId i) const { return out_[i - 1]; }

    Digraph induced(const std::vector<NodeId>& nodes) const;  // same ids, only edges inside `nodes`

private:
    void check(NodeId v) const;

    int n_ = 0;
    std::set<std::pair<NodeId, NodeId>> edges_;
    std::vector<std::vector<NodeId>> in_;
    std::vector<std::vector<NodeId>> out_;
};

struct SpanningStructure {
    std::vector<NodeId> roots;                    // ascending
    std::map<NodeId, std::vector<NodeId>> parents;  // non-root node -> parents, in preference order
    std::vector<NodeId> topo_order;               // roots first, then BFS layers in ascending id
    std::map<NodeId, int> layer;

    bool contains(NodeId v) const { return layer.count(v) > 0; }
};

// Strongly connected components, sinks of the condensation first. Each
// component is sorted ascending.
std::vector<std::vector<NodeId>> strong_components(const Digraph& g);

// Components without incoming edges from the rest of the graph, ordered by
// their smallest node id.
std::vector<std::vector<NodeId>> source_components(const Digraph& g);

SpanningStructure bfs_tree(const Digraph& g, NodeId root);

SpanningStructure spanning_forest(const Digraph& g, const std::vector<NodeId>& roots);

SpanningStructure spanning_dag(const Digraph& g, const std::vector<NodeId>& roots, int max_parents);

// As spanning_dag, restricted to the nodes in `scope` (edges leaving the scope are ignored).
SpanningStructure spanning_dag_within(const Digraph& g, const std::vector<NodeId>& roots, int max_parents,
                                      const std::vector<NodeId>& scope);

}  // namespace distobs
