#pragma once

#include <vector>

#include "distobs/netgraph.hpp"
#include "distobs/numkit.hpp"

namespace distobs {

struct Plant {
    Matrix A;
    std::vector<Matrix> C;  // C[i-1] is r_i x n, r_i may be 0

    int n() const { return static_cast<int>(A.rows()); }
    int n_nodes() const { return static_cast<int>(C.size()); }
    const Matrix& C_of(NodeId i) const { return C.at(i - 1); }
    Matrix stacked_C(const std::vector<NodeId>& nodes) const;
    void validate() const;
};

// Sequential observable canonical decomposition, one sensor per step. Slot j
// holds the sub-state newly observable by node order[j]; the last slot (index
// slots()) is the part no sensor observes.
struct MultiSensorDecomposition {
    Matrix A;                  // plant matrices the decomposition was built from
    std::vector<Matrix> C;     // C[j] = C_{order[j]}
    std::vector<NodeId> order;
    std::vector<int> dims;  // o_j per slot, zeros allowed
    int u_dim = 0;
    Matrix T;
    Matrix T_inv;
    Matrix Abar;
    std::vector<Matrix> Cbar;  // same indexing as order: Cbar[j] = C_{order[j]} T

    int n() const { return static_cast<int>(T.rows()); }
    int slots() const { return static_cast<int>(order.size()); }
    int offset(int slot) const;  // slot == slots() addresses the unobservable part
    int dim(int slot) const { return slot == slots() ? u_dim : dims.at(slot); }
    int slot_of(NodeId node) const;  // -1 when the node is not part of the decomposition

    Matrix A_block(int row_slot, int col_slot) const;
    Matrix A_U() const { return A_block(slots(), slots()); }
    Matrix C_block(int node_slot, int col_slot) const;
    Matrix Abar_diag() const;   // block diagonal part
    Matrix Abar_lower() const;  // Abar minus its block diagonal part
    double condition_number() const;
    // Largest entry above the block diagonal of Abar, and in C_i T right of slot i.
    double structure_violation() const;
};

MultiSensorDecomposition multisensor_decompose(const Plant& p, const std::vector<NodeId>& order,
                                               const ToleranceConfig& tol = {});

struct TransformedPlant {
    Matrix Abar;
    std::vector<Matrix> Cbar;
};

TransformedPlant apply_given_transformation(const Plant& p, const Matrix& T);

// Decomposition carried by a caller-supplied transformation and block sizes.
MultiSensorDecomposition decomposition_from_transformation(const Plant& p, const std::vector<NodeId>& order,
                                                           const Matrix& T, const std::vector<int>& dims);

struct JordanClass {
    EigenClass eig;
    int offset = 0;
    int dim = 0;
    Matrix J;
};

// Per-node split of the Jordan-grouped coordinates.
struct NodeSplit {
    NodeId node = 0;
    std::vector<int> detectable;    // class indices
    std::vector<int> undetectable;  // class indices
    std::vector<int> perm;          // zbar[k] = z[perm[k]]: detectable coordinates first
    Matrix P;                       // z = P zbar
    Matrix J_O, J_UO, C_O, C_UO;
    Matrix Tbar;  // observable split of (J_UO, C_UO)
    int w_O_dim = 0;
    Matrix G_O, G_UO, H_O;
    Matrix JJ, FF;  // composite local pair

    int o_dim() const { return static_cast<int>(J_O.rows()); }
    int uo_dim() const { return static_cast<int>(J_UO.rows()); }
};

struct JordanSystem {
    Matrix T;
    Matrix T_inv;
    std::vector<JordanClass> classes;
    std::vector<NodeSplit> nodes;

    Matrix J() const;
};

// T^{-1} A T = diag(J_1, ..., J_gamma), one block per distinct-eigenvalue class.
JordanSystem jordan_grouped(const Matrix& A, const ToleranceConfig& tol = {});

NodeSplit node_local_split(const JordanSystem& js, NodeId i, const Matrix& C_i, const ToleranceConfig& tol = {});

// jordan_grouped followed by node_local_split for every node.
JordanSystem jordan_system(const Plant& p, const ToleranceConfig& tol = {});

}  // namespace distobs
