#include <doctest.h>

#include "distobs/scenario.hpp"
#include "support/generators.hpp"
#include "support/util.hpp"

using namespace distobs;
using namespace distobs::testgen;
using distobs::testutil::mat;

namespace {

Scenario scenario(const std::string& name) { return load_scenario(testutil::scenario_path(name)); }

SimulationSetup setup_for(const Scenario& s, const SwitchingSignal* sig = nullptr) {
    SimulationSetup st;
    st.x0 = s.simulation->x0;
    st.est0 = s.simulation->est0;
    st.K = s.simulation->K;
    st.signal = sig;
    return st;
}

bool same_trace(const SimulationTrace& a, const SimulationTrace& b) {
    if (a.records.size() != b.records.size()) return false;
    for (size_t k = 0; k < a.records.size(); ++k) {
        if (a.records[k].mode != b.records[k].mode || a.records[k].x != b.records[k].x) return false;
        for (size_t i = 0; i < a.records[k].xhat.size(); ++i)
            if (a.records[k].xhat[i] != b.records[k].xhat[i]) return false;
    }
    return true;
}

}  // namespace

TEST_SUITE("simkit") {

TEST_CASE("relative error") {
    CHECK(relative_error(Vector::Zero(2), Vector::Zero(2)) == 0.0);
    Vector x(2), xh(2);
    x << 3, 4;
    xh << 3, 5;
    CHECK(relative_error(xh, x) == doctest::Approx(1.0 / 6.0));
}

TEST_CASE("trace shape") {
    const Scenario s = scenario("three_node.json");
    const auto bank = design(s.plant, s.graph, s.scheme, s.options);
    const auto tr = simulate(s.plant, s.graph, bank, setup_for(s));
    REQUIRE(tr.records.size() == static_cast<size_t>(s.simulation->K + 1));
    CHECK(tr.n_nodes() == 3);
    CHECK(tr.records.back().mode == -1);
    CHECK(tr.records.front().mode == 0);
    for (const auto& r : tr.records)
        for (double e : r.err) CHECK(e >= 0.0);
}

TEST_CASE("given design converges on the three-node example") {
    const Scenario s = scenario("three_node.json");
    const auto bank = design(s.plant, s.graph, s.scheme, s.options);
    const auto tr = simulate(s.plant, s.graph, bank, setup_for(s));
    for (const auto& m : convergence_metrics(tr)) {
        CHECK(m.first_step_below >= 0);
        CHECK(m.first_step_below <= 50);
    }
}

TEST_CASE("zero plant: estimates settle within n+1 steps") {
    const Plant p{Matrix::Zero(3, 3), {mat({{1, 0, 0}}), Matrix::Zero(0, 3)}};
    const Digraph g(2, {{1, 2}, {2, 1}});
    for (Scheme sc : {Scheme::C1, Scheme::C2}) {
        const auto bank = design(p, g, sc);
        SimulationSetup st;
        st.x0 = Vector::Ones(3);
        st.est0 = {Vector::Constant(3, -2.0), Vector::Constant(3, 5.0)};
        st.K = 5;
        const auto tr = simulate(p, g, bank, st);
        for (double e : tr.records[4].err) CHECK(e < 1e-12);
    }
}

TEST_CASE("eigenvalue-wise relay on the scalar example") {
    const Scenario s = scenario("illustrative.json");
    const auto bank = design(s.plant, s.graph, Scheme::C2);
    SimulationSetup st;
    st.x0 = Vector::Constant(1, 0.7);
    st.est0 = {Vector::Constant(1, 3.0), Vector::Constant(1, -1.0), Vector::Constant(1, 2.0)};
    st.K = 8;
    const auto tr = simulate(s.plant, s.graph, bank, st);
    for (int k = 2; k <= 8; ++k)
        for (int i = 0; i < 3; ++i) CHECK(std::abs(tr.records[k].xhat[i](0) - tr.records[k].x(0)) < 1e-12);
}

TEST_CASE("both schemes converge on a scenario that admits both") {
    const Scenario s = scenario("illustrative.json");
    SimulationSetup st;
    st.x0 = Vector::Constant(1, 0.7);
    st.K = 10;
    for (Scheme sc : {Scheme::C1, Scheme::C2}) {
        const auto tr = simulate(s.plant, s.graph, design(s.plant, s.graph, sc), st);
        for (double e : tr.records.back().relerr) CHECK(e < 1e-12);
    }
}

TEST_CASE("metrics on exact and sabotaged observers") {
    const Matrix A = mat({{1.2, 1}, {0, 0.8}});
    const Plant p{A, {mat({{1, 0}})}};
    auto bank = design_c1(p, Digraph(1));
    SimulationSetup st;
    st.x0 = Vector::Ones(2);
    st.K = 30;
    const auto good = convergence_metrics(simulate(p, Digraph(1), bank, st), 1e-12);
    CHECK(good[0].first_step_below >= 0);
    CHECK(good[0].first_step_below <= 3);
    CHECK(good[0].monotone_tail);
    bank.components[0].node_banks[0].TH.setZero();
    st.est0 = {Vector::Zero(2)};
    const auto bad = convergence_metrics(simulate(p, Digraph(1), bank, st), 1e-12);
    CHECK(bad[0].first_step_below == -1);
    CHECK_FALSE(bad[0].monotone_tail);
}

TEST_CASE("input checks") {
    const Scenario s = scenario("three_node.json");
    const auto bank = design(s.plant, s.graph, s.scheme, s.options);
    SimulationSetup st = setup_for(s);
    st.K = 0;
    CHECK_THROWS_AS(simulate(s.plant, s.graph, bank, st), SchemaError);
    st = setup_for(s);
    st.x0 = Vector::Zero(2);
    CHECK_THROWS_AS(simulate(s.plant, s.graph, bank, st), ShapeError);
    st = setup_for(s);
    st.est0.pop_back();
    CHECK_THROWS_AS(simulate(s.plant, s.graph, bank, st), ShapeError);

    SwitchingSignal sig;
    sig.modes = {s.graph.edges()};
    sig.schedule = std::vector<int>(s.simulation->K, 1);
    st = setup_for(s, &sig);
    CHECK_THROWS_AS(simulate(s.plant, s.graph, bank, st), InvalidSignal);
    sig.modes = {{{3, 1}}};
    sig.schedule = std::vector<int>(s.simulation->K, 0);
    CHECK_THROWS_AS(sig.validate(s.graph, s.simulation->K), InvalidSignal);
}

TEST_CASE("link-failure signals") {
    const Scenario s = scenario("three_node_switching.json");
    const auto bank = design(s.plant, s.graph, s.scheme, s.options);
    const auto& parents = bank_parents(bank);
    SUBCASE("no drops keeps the baseline") {
        const auto sig = make_assumption2_signal(parents, s.graph, 4, 50, 0.0, 1);
        REQUIRE(sig.modes.size() == 1);
        CHECK(sig.modes[0] == s.graph.edges());
    }
    SUBCASE("unit windows guarantee a live parent every step") {
        const auto sig = make_assumption2_signal(parents, s.graph, 1, 60, 0.7, 2);
        for (int k = 0; k < 60; ++k)
            for (const auto& ps : parents) {
                bool live = false;
                for (NodeId l : ps.parents) live = live || sig.modes[sig.schedule[k]].count({l, ps.node}) > 0;
                CHECK(live);
            }
        CHECK(validate_assumption2(sig, parents, 1).ok);
    }
    SUBCASE("random drops are repaired") {
        const auto sig = make_assumption2_signal(parents, s.graph, 4, 200, 0.5, 20180611);
        CHECK(sig.modes.size() > 1);
        CHECK_NOTHROW(sig.validate(s.graph, 200));
        CHECK(validate_assumption2(sig, parents, 4).ok);
    }
    SUBCASE("cut-off node is located") {
        SwitchingSignal sig;
        EdgeSet without3 = s.graph.edges();
        std::erase_if(without3, [](const auto& e) { return e.second == 3; });
        sig.modes = {s.graph.edges(), without3};
        sig.window_T = 3;
        sig.schedule = std::vector<int>(20, 0);
        for (int k = 6; k < 12; ++k) sig.schedule[k] = 1;
        const auto chk = validate_assumption2(sig, parents, 3);
        CHECK_FALSE(chk.ok);
        CHECK(chk.node == 3);
        CHECK(chk.window == 2);
    }
    SUBCASE("empty schedule is vacuously fine") {
        SwitchingSignal sig;
        sig.modes = {s.graph.edges()};
        CHECK(validate_assumption2(sig, parents, 4).ok);
    }
    SUBCASE("bad generator arguments") {
        CHECK_THROWS_AS(make_assumption2_signal(parents, s.graph, 0, 10, 0.1, 1), InvalidSignal);
        CHECK_THROWS_AS(make_assumption2_signal(parents, s.graph, 2, 10, 1.0, 1), InvalidSignal);
    }
}

TEST_CASE("determinism: same seed gives the same trace") {
    const Scenario s = scenario("three_node_switching.json");
    const auto bank = design(s.plant, s.graph, s.scheme, s.options);
    const auto a = run_scenario(s, bank, 7);
    const auto b = run_scenario(s, bank, 7);
    CHECK(same_trace(a, b));
    const auto c = run_scenario(s, bank, 8);
    CHECK_FALSE(same_trace(a, c));
}

TEST_CASE("property: switched deadbeat designs converge") {
    Rng rng(71);
    for (int t = 0; t < 30; ++t) {
        PlantSpec sp;
        sp.n = uniform_int(rng, 1, 4);
        sp.N = uniform_int(rng, 2, 4);
        sp.u_dim = uniform_int(rng, 0, sp.n / 2);
        sp.nilpotent_unobs = true;
        sp.rho_obs = uniform(rng, 0.8, 1.5);
        const Plant p = random_plant(rng, sp).plant;
        const Digraph g = random_strongly_connected(rng, sp.N, 0.5);
        DesignOptions opt;
        opt.max_parents = 2;
        const auto bank = design(p, g, Scheme::C1, opt);
        const int T = uniform_int(rng, 1, 3);
        const int K = 20 * T * sp.n;
        const auto sig = make_assumption2_signal(bank_parents(bank), g, T, K, 0.5, rng());
        REQUIRE(validate_assumption2(sig, bank_parents(bank), T).ok);
        SimulationSetup st;
        st.x0 = random_matrix(rng, sp.n, 1);
        st.K = K;
        st.signal = &sig;
        const auto tr = simulate(p, g, bank, st);
        CAPTURE(t);
        for (double e : tr.records.back().relerr) CHECK(e < 1e-6);
    }
}

TEST_CASE("property: certified static designs converge by 8n") {
    Rng rng(72);
    for (int t = 0; t < 40; ++t) {
        PlantSpec sp;
        sp.n = uniform_int(rng, 1, 6);
        sp.N = uniform_int(rng, 1, 5);
        sp.u_dim = uniform_int(rng, 0, sp.n / 2);
        sp.nilpotent_unobs = true;
        sp.rho_obs = uniform(rng, 0.5, 3.0);
        const Plant p = random_plant(rng, sp).plant;
        const Digraph g = random_strongly_connected(rng, sp.N);
        const auto bank = design(p, g, Scheme::C1);
        REQUIRE(certified(bank));
        SimulationSetup st;
        st.x0 = random_matrix(rng, sp.n, 1);
        st.K = 8 * sp.n;
        const auto tr = simulate(p, g, bank, st);
        CAPTURE(t);
        for (double e : tr.records.back().relerr) CHECK(e < 1e-8);
    }
}

}  // TEST_SUITE
