#include <doctest.h>

#include "distobs/scenario.hpp"
#include "support/generators.hpp"
#include "support/util.hpp"

using namespace distobs;
using namespace distobs::testgen;
using distobs::testutil::mat;

namespace {

Scenario scenario(const std::string& name) { return load_scenario(testutil::scenario_path(name)); }

// Decoupled modes behind a random rotation, with eigenvalues drawn from a
// short list so repeats are common. Each node sees a random subset of the
// modes, so a repeated unstable eigenvalue can be detectable by a group of
// nodes without any single node detecting it.
Plant partial_plant(Rng& rng, int n, int N) {
    const double values[] = {1.5, -1.3, 0.6};
    Matrix D = Matrix::Zero(n, n);
    for (int k = 0; k < n; ++k) D(k, k) = values[uniform_int(rng, 0, 2)];
    const Matrix Q = random_orthogonal(rng, n);
    Plant p{Q * D * Q.transpose(), {}};
    for (int i = 0; i < N; ++i) {
        Matrix C = Matrix::Zero(1, n);
        for (int k = 0; k < n; ++k)
            if (coin(rng, 0.4)) C(0, k) = uniform(rng, 0.5, 1.5);
        p.C.push_back(C * Q.transpose());
    }
    return p;
}

}  // namespace

TEST_SUITE("conditions") {

TEST_CASE("detectable sets") {
    const Scenario r = scenario("remark1.json");
    CHECK(detectable_set(r.plant.A, r.plant.C_of(1)).empty());
    CHECK(detectable_set(r.plant.A, r.plant.C_of(3)) == std::vector<int>{0});
    const Scenario s = scenario("three_node.json");
    CHECK(detectable_set(s.plant.A, s.plant.C_of(3)).empty());
    // stable classes count as detected by every node
    CHECK(detectable_set(mat({{0.5, 0}, {0, 2}}), Matrix::Zero(0, 2)).size() == 1);
}

TEST_CASE("condition 1 examples") {
    const Scenario r = scenario("remark1.json");
    CHECK(check_condition1(r.plant, r.graph));
    const Scenario s = scenario("three_node.json");
    CHECK(check_condition1(s.plant, s.graph));

    const Plant p{mat({{1.2}}), {mat({{1}}), Matrix::Zero(0, 1)}};
    std::vector<ComponentVerdict> detail;
    CHECK_FALSE(check_condition1(p, Digraph(2), {}, &detail));
    bool named = false;
    for (const auto& v : detail)
        if (!v.detectable && v.nodes == std::vector<NodeId>{2}) named = true;
    CHECK(named);
}

TEST_CASE("condition 2 examples") {
    const Scenario r = scenario("remark1.json");
    CHECK_FALSE(check_condition2(r.plant, r.graph));
    const Scenario i = scenario("illustrative.json");
    CHECK(check_condition2(i.plant, i.graph));
    const Plant stable{mat({{0.3, 1}, {0, -0.5}}), {Matrix::Zero(0, 2), Matrix::Zero(0, 2)}};
    CHECK(check_condition2(stable, Digraph(2)));
    CHECK(check_condition1(stable, Digraph(2)));
}

TEST_CASE("report contents") {
    const Scenario r = scenario("remark1.json");
    const FeasibilityReport rep = analyze(r.plant, r.graph);
    CHECK(rep.cond1);
    CHECK_FALSE(rep.cond2);
    REQUIRE(rep.unstable.size() == 1);
    CHECK(rep.root_sets[0] == std::vector<NodeId>{3});
    CHECK(rep.source_comps.size() == 2);
    CHECK(rep.per_node_detectable.size() == 3);
}

TEST_CASE("property: condition 2 implies condition 1") {
    Rng rng(41);
    int c2 = 0, c1_only = 0;
    for (int t = 0; t < 300; ++t) {
        PlantSpec ps;
        ps.n = uniform_int(rng, 1, 5);
        ps.N = uniform_int(rng, 1, 5);
        ps.u_dim = uniform_int(rng, 0, ps.n - 1);
        ps.rho_obs = uniform(rng, 0.5, 2.0);
        const Plant p = coin(rng) ? random_plant(rng, ps).plant : partial_plant(rng, ps.n, ps.N);
        const Digraph g = random_digraph(rng, ps.N, uniform(rng, 0.1, 0.8));
        const FeasibilityReport rep = analyze(p, g);
        CAPTURE(t);
        CHECK(rep.cond1 == check_condition1(p, g));
        CHECK(rep.cond2 == check_condition2(p, g));
        if (rep.cond2) {
            CHECK(rep.cond1);
            ++c2;
        } else if (rep.cond1) {
            ++c1_only;
        }
    }
    CHECK(c2 > 0);
    CHECK(c1_only > 0);
}

TEST_CASE("property: detectable sets match the single-node decomposition") {
    Rng rng(42);
    for (int t = 0; t < 200; ++t) {
        PlantSpec ps;
        ps.n = uniform_int(rng, 1, 6);
        ps.N = 1;
        ps.u_dim = uniform_int(rng, 0, ps.n - 1);
        ps.rho_obs = uniform(rng, 0.5, 2.0);
        const Plant p = coin(rng) ? random_plant(rng, ps).plant : partial_plant(rng, ps.n, 1);
        const Matrix& A = p.A;
        const Matrix& C = p.C[0];
        const EigenInfo eig = eigen_info(A);
        const ObservableSplit s = obs_canon_decomp(A, C);
        const int u = ps.n - s.n_obs;
        const Matrix Au = (s.T.transpose() * A * s.T).bottomRightCorner(u, u);
        const Eigen::VectorXcd hidden = u ? Eigen::VectorXcd(Au.eigenvalues()) : Eigen::VectorXcd();
        std::vector<int> oracle;
        for (size_t j = 0; j < eig.classes.size(); ++j) {
            bool seen = true;
            if (is_unstable(eig.classes[j].value))
                for (Eigen::Index k = 0; k < hidden.size(); ++k)
                    if (std::abs(hidden(k) - eig.classes[j].value) < 1e-6) seen = false;
            if (seen) oracle.push_back(static_cast<int>(j));
        }
        CAPTURE(t);
        CHECK(detectable_set(A, C, eig) == oracle);
    }
}

}  // TEST_SUITE
