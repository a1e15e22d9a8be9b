#include <doctest.h>

#include "distobs/scenario.hpp"
#include "support/generators.hpp"
#include "support/util.hpp"

using namespace distobs;
using namespace distobs::testgen;
using distobs::testutil::mat;

namespace {

Scenario scenario(const std::string& name) { return load_scenario(testutil::scenario_path(name)); }

}  // namespace

TEST_SUITE("synth_c2") {

TEST_CASE("local observer of the scalar example") {
    const Scenario s = scenario("illustrative.json");
    const JordanSystem js = jordan_system(s.plant);
    const Matrix LL = local_observer(js.nodes[0]);
    REQUIRE(LL.rows() == 1);
    REQUIRE(LL.cols() == 1);
    CHECK(std::abs(LL(0, 0) * js.nodes[0].FF(0, 0)) == doctest::Approx(1.5));
    CHECK(structured_spectral_radius(js.nodes[0].JJ - LL * js.nodes[0].FF) == 0.0);
    CHECK(local_observer(js.nodes[1]).size() == 0);
}

TEST_CASE("consensus layers of the scalar example") {
    const Scenario s = scenario("illustrative.json");
    const JordanSystem js = jordan_system(s.plant);
    const auto w = eig_consensus_weights(s.graph, js);
    REQUIRE(w.size() == 1);
    CHECK(w[0].roots == std::vector<NodeId>{1});
    CHECK(w[0].rows.at(2) == WeightRow{{1, 1.0}});
    CHECK(w[0].rows.at(3) == WeightRow{{1, 1.0}});
}

TEST_CASE("deadbeat local observers on a diagonal unstable plant") {
    const Plant p{mat({{1.5, 0, 0}, {0, -2, 0}, {0, 0, 1.1}}), {mat({{1, 1, 0}}), mat({{0, 1, 1}}), mat({{0, 0, 1}})}};
    const JordanSystem js = jordan_system(p);
    for (const auto& s : js.nodes) {
        CAPTURE(s.node);
        CHECK(structured_spectral_radius(s.JJ - local_observer(s) * s.FF) == 0.0);
    }
}

TEST_CASE("every node detecting needs no consensus") {
    const Plant p{mat({{2}}), {mat({{1}}), mat({{3}})}};
    const JordanSystem js = jordan_system(p);
    const auto w = eig_consensus_weights(Digraph(2, {{1, 2}}), js);
    REQUIRE(w.size() == 1);
    CHECK(w[0].rows.empty());
}

TEST_CASE("unreachable nodes make the scheme infeasible") {
    const Scenario s = scenario("remark1.json");
    const JordanSystem js = jordan_system(s.plant);
    try {
        eig_consensus_weights(s.graph, js);
        FAIL("expected Condition2Infeasible");
    } catch (const Condition2Infeasible& e) {
        CHECK(std::abs(e.lambda() - Complex(2, 0)) < 1e-9);
        CHECK(e.unreachable() == std::vector<int>{1, 2});
    }
    CHECK_THROWS_AS(design_c2(s.plant, s.graph), Condition2Infeasible);
}

TEST_CASE("distinct eigenvalues give observers of the state dimension") {
    const Scenario s = scenario("illustrative.json");
    const auto bank = design_c2(s.plant, s.graph);
    CHECK(bank.certified);
    for (const auto& o : bank.nodes) CHECK(o.observer_dim() == s.plant.n());

    const Plant p{mat({{1.5, 0, 0}, {0, -1.2, 0}, {0, 0, 0.4}}), {mat({{1, 0, 1}}), mat({{0, 1, 0}})}};
    const auto b2 = design_c2(p, Digraph(2, {{1, 2}, {2, 1}}));
    CHECK(b2.certified);
    for (const auto& o : b2.nodes) CHECK(o.observer_dim() == 3);
}

TEST_CASE("shape checks on assembly") {
    const Scenario s = scenario("illustrative.json");
    const JordanSystem js = jordan_system(s.plant);
    const auto w = eig_consensus_weights(s.graph, js);
    std::vector<Matrix> gains;
    for (const auto& n : js.nodes) gains.push_back(local_observer(n));
    CHECK_NOTHROW(assemble_c2_bank(s.plant, js, gains, w));
    gains.pop_back();
    CHECK_THROWS_AS(assemble_c2_bank(s.plant, js, gains, w), ShapeError);
    CHECK_THROWS(assemble_c2_bank(s.plant, js, {}, {}));
}

TEST_CASE("property: random eigenvalue-wise designs") {
    Rng rng(61);
    int designed = 0, simulated = 0;
    for (int t = 0; t < 120; ++t) {
        PlantSpec sp;
        sp.n = uniform_int(rng, 1, 5);
        sp.N = uniform_int(rng, 2, 5);
        sp.u_dim = uniform_int(rng, 0, sp.n / 2);
        sp.nilpotent_unobs = true;
        sp.rho_obs = uniform(rng, 0.8, 2.0);
        const Plant p = random_plant(rng, sp).plant;
        const Digraph g = random_strongly_connected(rng, sp.N, 0.4);
        if (!check_condition2(p, g)) continue;
        C2ObserverBank bank;
        try {
            bank = design_c2(p, g);
        } catch (const IllConditionedJordan&) {
            continue;
        }
        ++designed;
        CAPTURE(t);
        CHECK(bank.certified);
        for (const auto& o : bank.nodes) {
            CHECK(o.observer_dim() == p.n() + o.split.w_O_dim);
            // stable directions the node cannot observe keep their own decay rate
            CHECK(structured_spectral_radius(o.split.JJ - o.LL * o.split.FF) <= 1.0 - 1e-6);
        }
        for (const auto& cw : bank.weights) {
            for (const auto& [i, row] : cw.rows) {
                double sum = 0.0;
                for (const auto& [l, x] : row) sum += x;
                CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
                CHECK(std::find(cw.roots.begin(), cw.roots.end(), i) == cw.roots.end());
            }
        }
        for (const auto& [cls, rho] : bank.report.rho_consensus) CHECK(rho == 0.0);

        // Simulate only when the slowest local mode decays fast enough to
        // finish before an unstable plant overflows.
        double slowest = 0.0;
        for (double r : bank.report.rho_local) slowest = std::max(slowest, r);
        if (slowest > 0.9) continue;
        ++simulated;
        SimulationSetup setup;
        setup.x0 = random_matrix(rng, sp.n, 1);
        for (int i = 0; i < sp.N; ++i) setup.est0.push_back(random_matrix(rng, sp.n, 1));
        setup.K = 12 * sp.n * sp.N;
        if (slowest > 0.0) setup.K = std::max(setup.K, static_cast<int>(std::log(1e-12) / std::log(slowest)) + 4 * sp.n);
        const auto tr = simulate(p, g, bank, setup);
        CAPTURE(slowest);
        for (double e : tr.records.back().relerr) CHECK(e < 1e-8);
    }
    CHECK(designed > 20);
    CHECK(simulated > 15);
}

}  // TEST_SUITE
