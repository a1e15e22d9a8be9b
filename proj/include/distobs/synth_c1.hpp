#pragma once

#include <map>
#include <string>
#include <vector>

#include "distobs/decomp.hpp"
#include "distobs/netgraph.hpp"
#include "distobs/numkit.hpp"

namespace distobs {

using WeightRow = std::map<NodeId, double>;  // neighbor (possibly the node itself) -> weight

// Consensus layer of one sub-state: every node other than the source averages
// the neighbors listed in its row.
struct SubstateWeights {
    int slot = 0;
    NodeId source = 0;
    std::map<NodeId, WeightRow> rows;
    std::vector<NodeId> topo_order;  // source first; parents precede children
};

// One entry per slot of the decomposition; empty slots carry no rows.
using ConsensusWeights = std::vector<SubstateWeights>;

// Which neighbors a node listens to on one consensus channel. Used to build and
// validate link-failure schedules.
struct ParentSet {
    std::string channel;
    NodeId node = 0;
    std::vector<NodeId> parents;
};

struct SubstateStability {
    int slot = 0;
    NodeId source = 0;
    std::vector<NodeId> order;                  // block order of M
    Matrix M;
    double rho = 0.0;
    std::vector<std::pair<int, Matrix>> H;      // coupling blocks H_pl, keyed by l < p
};

struct StabilityReport {
    std::vector<SubstateStability> substates;
    double rho_AU = 0.0;
    double margin = 0.0;
    bool verdict = false;
};

struct NodeBank {
    NodeId node = 0;
    int slot = 0;
    Matrix C;
    Matrix TH;                  // T * H_i, n x r_i
    std::map<NodeId, Matrix> G;  // neighbor gains, self included
};

// Compact per-node observers of one source component, all sharing the
// component's decomposition.
struct ComponentBank {
    std::vector<NodeId> nodes;
    MultiSensorDecomposition decomp;
    std::vector<Matrix> gains;  // L per slot
    ConsensusWeights weights;
    Matrix N_mat;
    std::vector<Matrix> projectors;  // per slot, then the unobservable slot
    std::vector<NodeBank> node_banks;
    StabilityReport report;

    // Weight of neighbor l in node i's update of slot j (own slot and the
    // unobservable slot use the node's own estimate).
    double weight(int slot, NodeId i, NodeId l) const;
    const NodeBank& bank_of(NodeId i) const;
};

// Pure consensus for nodes outside every source component.
struct NonsourceRule {
    NodeId node = 0;
    WeightRow weights;
};

struct CompactObserverBank {
    Matrix A;
    std::vector<ComponentBank> components;
    std::vector<NonsourceRule> nonsource;
    std::vector<ParentSet> parents;
    bool certified = false;
};

std::vector<Matrix> design_gains(const MultiSensorDecomposition& d, const PolePolicy& policy = {},
                                 const ToleranceConfig& tol = {});

// Checks user-supplied gains: shapes and rho(A_jj - L_j C_jj) <= 1 - margin.
void verify_gains(const MultiSensorDecomposition& d, const std::vector<Matrix>& gains, const ToleranceConfig& tol = {});

// Uniform weights over each node's parents in `structure` (weight 1 for trees).
SubstateWeights consensus_weights_for_substate(int slot, NodeId source, const SpanningStructure& structure);

ConsensusWeights tree_weights(const Digraph& g, const MultiSensorDecomposition& d, int max_parents = 1);

// Throws InvalidWeights unless every row is non-negative, supported on the
// node's neighborhood, and sums to one.
void validate_weights(const Digraph& g, const MultiSensorDecomposition& d, const ConsensusWeights& w);

StabilityReport certify_stability(const MultiSensorDecomposition& d, const std::vector<Matrix>& gains,
                                  const ConsensusWeights& w, const ToleranceConfig& tol = {});

ComponentBank assemble_compact_bank(const MultiSensorDecomposition& d, const std::vector<Matrix>& gains,
                                    const ConsensusWeights& w, const Digraph& g, const ToleranceConfig& tol = {});

std::vector<NonsourceRule> nonsource_consensus(const Digraph& g, const std::vector<NodeId>& S, int max_parents = 1);

std::vector<ParentSet> parent_sets(const CompactObserverBank& bank);

}  // namespace distobs
