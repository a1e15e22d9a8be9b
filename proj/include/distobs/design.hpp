#pragma once

#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "distobs/conditions.hpp"
#include "distobs/synth_c1.hpp"
#include "distobs/synth_c2.hpp"

namespace distobs {

enum class Scheme { Auto, C1, C2 };

Scheme parse_scheme(const std::string& s);
std::string scheme_name(Scheme s);

// Caller-supplied stacked weight vector w_il: one entry per non-empty
// sub-state slot, in slot order. The entry for node i's own slot is ignored.
struct UserWeight {
    NodeId node = 0;
    NodeId neighbor = 0;
    std::vector<double> w;
};

struct DesignOptions {
    ToleranceConfig tol;
    PolePolicy poles;
    int max_parents = 1;
    std::vector<NodeId> order;  // sensor order for the decomposition; empty means ascending ids
    // Fixed pieces for reproducing a given design. Only valid when the graph
    // has a single source component.
    std::optional<Matrix> transformation;
    std::vector<int> substate_dims;
    std::vector<Matrix> gains;
    std::vector<UserWeight> weights;
};

using ObserverBank = std::variant<CompactObserverBank, C2ObserverBank>;

bool certified(const ObserverBank& b);
const std::vector<ParentSet>& bank_parents(const ObserverBank& b);

ConsensusWeights weights_from_user(const MultiSensorDecomposition& d, const std::vector<UserWeight>& w);

CompactObserverBank design_c1(const Plant& p, const Digraph& g, const DesignOptions& opt = {});
C2ObserverBank design_c2(const Plant& p, const Digraph& g, const DesignOptions& opt = {});

// Auto picks the eigenvalue-wise scheme when every source component has root
// nodes for every unstable eigenvalue, else the sub-state scheme when every
// source component is detectable. Throws Infeasible otherwise.
ObserverBank design(const Plant& p, const Digraph& g, Scheme scheme, const DesignOptions& opt = {});

}  // namespace distobs
