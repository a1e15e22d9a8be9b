#pragma once

#include <vector>

#include "distobs/decomp.hpp"
#include "distobs/netgraph.hpp"
#include "distobs/numkit.hpp"

namespace distobs {

struct ComponentVerdict {
    std::vector<NodeId> nodes;
    bool detectable = true;
    std::vector<Complex> undetectable;  // unstable eigenvalues the component cannot see
};

struct RootEntry {
    std::vector<NodeId> component;
    Complex lambda;
    std::vector<NodeId> roots;  // component members that detect lambda
};

struct FeasibilityReport {
    EigenInfo eig;
    std::vector<int> unstable;                     // class indices into eig.classes
    std::vector<std::vector<int>> per_node_detectable;  // per node, class indices (stable classes included)
    std::vector<std::vector<NodeId>> root_sets;    // per entry of `unstable`
    std::vector<std::vector<NodeId>> source_comps;
    bool cond1 = false;
    std::vector<ComponentVerdict> cond1_detail;
    bool cond2 = false;
    std::vector<RootEntry> cond2_table;
};

std::vector<int> detectable_set(const Matrix& A, const Matrix& C_i, const EigenInfo& eig,
                                const ToleranceConfig& tol = {});
std::vector<int> detectable_set(const Matrix& A, const Matrix& C_i, const ToleranceConfig& tol = {});

bool check_condition1(const Plant& p, const Digraph& g, const ToleranceConfig& tol = {},
                      std::vector<ComponentVerdict>* detail = nullptr);

bool check_condition2(const Plant& p, const Digraph& g, const ToleranceConfig& tol = {},
                      std::vector<RootEntry>* table = nullptr);

FeasibilityReport analyze(const Plant& p, const Digraph& g, const ToleranceConfig& tol = {});

}  // namespace distobs
