#include <doctest.h>

#include "support/generators.hpp"

using namespace distobs;
using namespace distobs::testgen;

namespace {

using Comps = std::vector<std::vector<NodeId>>;

Comps sorted(Comps c) {
    std::sort(c.begin(), c.end());
    return c;
}

std::vector<std::vector<bool>> reachability(const Digraph& g) {
    const int N = g.n_nodes();
    std::vector<std::vector<bool>> r(N, std::vector<bool>(N, false));
    for (int i = 0; i < N; ++i) r[i][i] = true;
    for (const auto& [a, b] : g.edges()) r[a - 1][b - 1] = true;
    for (int k = 0; k < N; ++k)
        for (int i = 0; i < N; ++i)
            for (int j = 0; j < N; ++j)
                if (r[i][k] && r[k][j]) r[i][j] = true;
    return r;
}

// Parents precede children in topo_order, every parent edge exists, and all
// reachable nodes are covered.
void check_structure(const Digraph& g, const SpanningStructure& s) {
    std::map<NodeId, int> pos;
    for (size_t k = 0; k < s.topo_order.size(); ++k) pos[s.topo_order[k]] = static_cast<int>(k);
    for (NodeId r : s.roots) CHECK(s.parents.count(r) == 0);
    for (const auto& [v, ps] : s.parents) {
        CHECK_FALSE(ps.empty());
        for (NodeId p : ps) {
            CHECK(g.has_edge(p, v));
            CHECK(pos.at(p) < pos.at(v));
        }
    }
    CHECK(s.topo_order.size() == s.roots.size() + s.parents.size());
}

}  // namespace

TEST_SUITE("netgraph") {

TEST_CASE("edges and neighborhoods") {
    Digraph g(3, {{1, 2}, {2, 1}, {2, 3}});
    CHECK(g.has_edge(2, 3));
    CHECK_FALSE(g.has_edge(3, 2));
    CHECK(g.in_neighbors(3) == std::vector<NodeId>{2});
    CHECK(g.out_neighbors(2) == std::vector<NodeId>{1, 3});
    CHECK_THROWS(g.add_edge(1, 4));
    g.add_edge(2, 2);
    CHECK_FALSE(g.has_edge(2, 2));
    const Digraph h = g.induced({1, 2});
    CHECK(h.edges().size() == 2);
}

TEST_CASE("strong components") {
    CHECK(sorted(strong_components(Digraph(3, {{1, 2}, {2, 1}}))) == Comps{{1, 2}, {3}});
    CHECK(strong_components(Digraph(3, {{1, 2}, {2, 1}, {1, 3}, {3, 1}, {2, 3}, {3, 2}})) == Comps{{1, 2, 3}});
    CHECK(sorted(strong_components(Digraph(3, {{1, 2}, {2, 3}}))) == Comps{{1}, {2}, {3}});
}

TEST_CASE("source components") {
    CHECK(source_components(Digraph(3, {{1, 2}, {2, 1}})) == Comps{{1, 2}, {3}});
    CHECK(source_components(Digraph(3, {{1, 2}, {2, 1}, {2, 3}})) == Comps{{1, 2}});
    CHECK(source_components(Digraph(3, {{1, 2}, {2, 3}, {3, 1}})) == Comps{{1, 2, 3}});
}

TEST_CASE("BFS trees") {
    SUBCASE("star-like graph rooted at 1") {
        const auto t = bfs_tree(Digraph(3, {{1, 2}, {1, 3}, {2, 1}}), 1);
        CHECK(t.parents.at(2) == std::vector<NodeId>{1});
        CHECK(t.parents.at(3) == std::vector<NodeId>{1});
        CHECK(t.topo_order == std::vector<NodeId>{1, 2, 3});
    }
    SUBCASE("path") {
        const auto t = bfs_tree(Digraph(3, {{1, 2}, {2, 3}}), 1);
        CHECK(t.parents.at(2) == std::vector<NodeId>{1});
        CHECK(t.parents.at(3) == std::vector<NodeId>{2});
        CHECK(t.layer.at(3) == 2);
    }
    SUBCASE("rooted at the middle node") {
        const auto t = bfs_tree(Digraph(3, {{1, 2}, {2, 1}, {2, 3}}), 2);
        CHECK(t.parents.at(1) == std::vector<NodeId>{2});
        CHECK(t.parents.at(3) == std::vector<NodeId>{2});
    }
}

TEST_CASE("spanning forests") {
    const Digraph g(3, {{1, 2}, {2, 1}, {2, 3}});
    const auto f = spanning_forest(g, {1, 2});
    CHECK(f.roots == std::vector<NodeId>{1, 2});
    CHECK(f.parents.at(3) == std::vector<NodeId>{2});
    try {
        spanning_forest(Digraph(3, {{1, 2}, {2, 1}}), {3});
        FAIL("expected NotSpanning");
    } catch (const NotSpanning& e) {
        CHECK(e.unreachable() == std::vector<int>{1, 2});
    }
}

TEST_CASE("spanning DAGs") {
    const auto d = spanning_dag(Digraph(3, {{1, 2}, {1, 3}, {2, 3}}), {1}, 2);
    CHECK(d.parents.at(2) == std::vector<NodeId>{1});
    CHECK(d.parents.at(3) == std::vector<NodeId>{1, 2});
    const auto e = spanning_dag(Digraph(3, {{1, 2}, {1, 3}, {2, 1}}), {1}, 2);
    CHECK(e.parents.at(2) == std::vector<NodeId>{1});
    CHECK(e.parents.at(3) == std::vector<NodeId>{1});
    const auto w = spanning_dag_within(Digraph(3, {{1, 2}, {2, 3}, {3, 1}}), {1}, 2, {1, 2});
    CHECK_FALSE(w.contains(3));
}

TEST_CASE("property: random strongly connected graphs are spanned from any root") {
    Rng rng(21);
    for (int t = 0; t < 100; ++t) {
        const int N = uniform_int(rng, 1, 8);
        const Digraph g = random_strongly_connected(rng, N);
        const NodeId r = uniform_int(rng, 1, N);
        const auto d = spanning_dag(g, {r}, uniform_int(rng, 1, 3));
        CHECK(static_cast<int>(d.topo_order.size()) == N);
        check_structure(g, d);
    }
}

TEST_CASE("property: parent relation is strictly lower triangular in topo order") {
    Rng rng(22);
    for (int t = 0; t < 200; ++t) {
        const int N = uniform_int(rng, 2, 9);
        const Digraph g = random_digraph(rng, N, 0.4);
        const auto srcs = source_components(g);
        std::vector<NodeId> roots;
        for (const auto& c : srcs) roots.push_back(c.front());
        const auto d = spanning_dag(g, roots, uniform_int(rng, 1, 3));
        std::map<NodeId, int> pos;
        for (size_t k = 0; k < d.topo_order.size(); ++k) pos[d.topo_order[k]] = static_cast<int>(k);
        Matrix W = Matrix::Zero(N, N);
        for (const auto& [v, ps] : d.parents)
            for (NodeId p : ps) W(pos.at(v), pos.at(p)) = 1.0;
        CHECK(W.triangularView<Eigen::Upper>().toDenseMatrix().isZero());
        check_structure(g, d);
    }
}

TEST_CASE("property: source components match a brute-force scan") {
    Rng rng(23);
    for (int t = 0; t < 200; ++t) {
        const int N = uniform_int(rng, 1, 9);
        const Digraph g = random_digraph(rng, N, uniform(rng, 0.05, 0.5));
        const auto reach = reachability(g);
        const Comps sccs = strong_components(g);
        // strong components are the mutual-reachability classes
        std::vector<int> comp_of(N, -1);
        for (size_t c = 0; c < sccs.size(); ++c)
            for (NodeId v : sccs[c]) comp_of[v - 1] = static_cast<int>(c);
        for (int a = 0; a < N; ++a)
            for (int b = 0; b < N; ++b) CHECK((comp_of[a] == comp_of[b]) == (reach[a][b] && reach[b][a]));
        Comps expect;
        for (const auto& c : sccs) {
            bool entered = false;
            for (const auto& [a, b] : g.edges())
                if (comp_of[a - 1] != comp_of[b - 1] && std::find(c.begin(), c.end(), b) != c.end()) entered = true;
            if (!entered) expect.push_back(c);
        }
        CHECK(sorted(source_components(g)) == sorted(expect));
    }
}

TEST_CASE("property: a single-root forest is the BFS tree") {
    Rng rng(24);
    for (int t = 0; t < 200; ++t) {
        const int N = uniform_int(rng, 1, 8);
        const Digraph g = random_digraph(rng, N, 0.4);
        const NodeId r = uniform_int(rng, 1, N);
        const auto reach = reachability(g);
        bool all = true;
        for (int v = 0; v < N; ++v) all = all && reach[r - 1][v];
        if (!all) {
            CHECK_THROWS_AS(spanning_forest(g, {r}), NotSpanning);
            continue;
        }
        const auto f = spanning_forest(g, {r});
        const auto b = bfs_tree(g, r);
        CHECK(f.parents == b.parents);
        CHECK(f.topo_order == b.topo_order);
    }
}

}  // TEST_SUITE
