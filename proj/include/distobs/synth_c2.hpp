#pragma once

#include <map>
#include <vector>

#include "distobs/decomp.hpp"
#include "distobs/netgraph.hpp"
#include "distobs/numkit.hpp"
#include "distobs/synth_c1.hpp"

namespace distobs {

// Consensus layer for one unstable eigenvalue class: every node that cannot
// detect it averages the listed neighbors.
struct ClassWeights {
    int cls = 0;  // index into JordanSystem::classes
    std::vector<NodeId> roots;
    std::map<NodeId, WeightRow> rows;
    std::vector<NodeId> topo_order;
};

struct C2NodeObserver {
    NodeId node = 0;
    NodeSplit split;
    Matrix LL;  // local gain on (JJ, FF)
    Matrix C;
    int s_dim = 0;
    int uo_dim = 0;

    int observer_dim() const { return s_dim + uo_dim; }
};

struct C2Report {
    std::vector<double> rho_local;  // per node, rho(JJ - LL FF)
    std::map<int, double> rho_consensus;  // per unstable class
    double margin = 0.0;
    bool verdict = false;
};

struct C2ObserverBank {
    Matrix A;
    JordanSystem jordan;
    std::vector<C2NodeObserver> nodes;  // indexed by id - 1
    std::vector<ClassWeights> weights;
    std::vector<ParentSet> parents;
    C2Report report;
    bool certified = false;

    const ClassWeights* weights_for(int cls) const;
};

Matrix local_observer(const NodeSplit& split, const PolePolicy& policy = {}, const ToleranceConfig& tol = {});

// One layer per unstable class, over a spanning DAG rooted at the nodes that
// detect it. Throws Condition2Infeasible when some node cannot be reached.
std::vector<ClassWeights> eig_consensus_weights(const Digraph& g, const JordanSystem& js,
                                                const ToleranceConfig& tol = {}, int max_parents = 1);

C2ObserverBank assemble_c2_bank(const Plant& p, const JordanSystem& js, const std::vector<Matrix>& gains,
                                const std::vector<ClassWeights>& weights, const ToleranceConfig& tol = {});

}  // namespace distobs
