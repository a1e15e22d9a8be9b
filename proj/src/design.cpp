#include "distobs/design.hpp"

#include <algorithm>
#include <set>
#include <sstream>

namespace distobs {

Scheme parse_scheme(const std::string& s) {
    if (s == "auto") return Scheme::Auto;
    if (s == "c1") return Scheme::C1;
    if (s == "c2") return Scheme::C2;
    throw SchemaError("unknown scheme '" + s + "' (expected auto, c1 or c2)");
}

std::string scheme_name(Scheme s) {
    switch (s) {
        case Scheme::Auto: return "auto";
        case Scheme::C1: return "c1";
        case Scheme::C2: return "c2";
    }
    return "auto";
}

bool certified(const ObserverBank& b) {
    return std::visit([](const auto& x) { return x.certified; }, b);
}

const std::vector<ParentSet>& bank_parents(const ObserverBank& b) {
    return std::visit([](const auto& x) -> const std::vector<ParentSet>& { return x.parents; }, b);
}

namespace {

std::string node_list(const std::vector<NodeId>& v) {
    std::ostringstream os;
    os << '{';
    for (size_t k = 0; k < v.size(); ++k) os << (k ? "," : "") << v[k];
    os << '}';
    return os.str();
}

void check_order(const std::vector<NodeId>& order, int n_nodes) {
    if (order.empty()) return;
    std::vector<NodeId> s = order;
    std::sort(s.begin(), s.end());
    for (int k = 0; k < n_nodes; ++k)
        if (static_cast<int>(s.size()) != n_nodes || s[k] != k + 1)
            throw SchemaError("sensor order must list every node exactly once");
}

std::vector<NodeId> component_order(const std::vector<NodeId>& comp, const std::vector<NodeId>& order) {
    if (order.empty()) return comp;
    std::vector<NodeId> out;
    for (NodeId i : order)
        if (std::binary_search(comp.begin(), comp.end(), i)) out.push_back(i);
    return out;
}

bool fixed_pieces(const DesignOptions& opt) {
    return opt.transformation || !opt.substate_dims.empty() || !opt.gains.empty() || !opt.weights.empty();
}

}  // namespace

ConsensusWeights weights_from_user(const MultiSensorDecomposition& d, const std::vector<UserWeight>& uw) {
    std::vector<int> nonempty;
    for (int j = 0; j < d.slots(); ++j)
        if (d.dims[j] > 0) nonempty.push_back(j);
    ConsensusWeights w(d.slots());
    for (int j = 0; j < d.slots(); ++j) {
        w[j].slot = j;
        w[j].source = d.order[j];
    }
    for (const auto& u : uw) {
        if (d.slot_of(u.node) < 0 || d.slot_of(u.neighbor) < 0)
            throw InvalidWeights("weight vector w_" + std::to_string(u.node) + "," + std::to_string(u.neighbor) +
                                 " names a node outside the component");
        if (u.w.size() != nonempty.size())
            throw InvalidWeights("weight vector w_" + std::to_string(u.node) + "," + std::to_string(u.neighbor) +
                                 " needs " + std::to_string(nonempty.size()) + " entries");
        for (size_t k = 0; k < nonempty.size(); ++k) {
            const int j = nonempty[k];
            if (d.order[j] == u.node || u.w[k] == 0.0) continue;
            w[j].rows[u.node][u.neighbor] = u.w[k];
        }
    }
    return w;
}

CompactObserverBank design_c1(const Plant& p, const Digraph& g, const DesignOptions& opt) {
    p.validate();
    opt.tol.validate();
    check_order(opt.order, p.n_nodes());
    std::vector<ComponentVerdict> detail;
    if (!check_condition1(p, g, opt.tol, &detail)) {
        std::ostringstream os;
        os << "sub-state scheme infeasible:";
        for (const auto& v : detail) {
            if (v.detectable) continue;
            os << " source component " << node_list(v.nodes) << " cannot detect";
            for (const auto& lam : v.undetectable) os << ' ' << format_complex(lam);
            os << ';';
        }
        throw Infeasible(os.str());
    }
    const auto comps = source_components(g);
    if (fixed_pieces(opt) && comps.size() != 1)
        throw SchemaError("a fixed transformation, gains or weights need a graph with one source component");

    CompactObserverBank bank;
    bank.A = p.A;
    bank.certified = true;
    std::vector<NodeId> sources;
    for (const auto& comp : comps) {
        const auto order = component_order(comp, opt.order);
        MultiSensorDecomposition d;
        if (opt.transformation) {
            if (opt.substate_dims.empty()) throw SchemaError("a fixed transformation needs its sub-state dimensions");
            d = decomposition_from_transformation(p, order, *opt.transformation, opt.substate_dims);
        } else {
            d = multisensor_decompose(p, order, opt.tol);
        }
        std::vector<Matrix> gains;
        if (!opt.gains.empty()) {
            verify_gains(d, opt.gains, opt.tol);
            gains = opt.gains;
        } else {
            gains = design_gains(d, opt.poles, opt.tol);
        }
        const ConsensusWeights w =
            opt.weights.empty() ? tree_weights(g, d, opt.max_parents) : weights_from_user(d, opt.weights);
        bank.components.push_back(assemble_compact_bank(d, gains, w, g, opt.tol));
        bank.certified = bank.certified && bank.components.back().report.verdict;
        sources.insert(sources.end(), comp.begin(), comp.end());
    }
    std::sort(sources.begin(), sources.end());
    if (static_cast<int>(sources.size()) < p.n_nodes()) bank.nonsource = nonsource_consensus(g, sources, opt.max_parents);
    bank.parents = parent_sets(bank);
    return bank;
}

C2ObserverBank design_c2(const Plant& p, const Digraph& g, const DesignOptions& opt) {
    p.validate();
    opt.tol.validate();
    std::vector<RootEntry> table;
    if (!check_condition2(p, g, opt.tol, &table)) {
        for (const auto& e : table)
            if (e.roots.empty()) throw Condition2Infeasible(e.lambda, e.component);
    }
    if (opt.transformation || !opt.weights.empty())
        throw SchemaError("a fixed transformation or weights only apply to the sub-state scheme");
    const JordanSystem js = jordan_system(p, opt.tol);
    std::vector<Matrix> gains;
    if (!opt.gains.empty()) {
        if (static_cast<int>(opt.gains.size()) != p.n_nodes()) throw SchemaError("need one local gain per node");
        gains = opt.gains;
    } else {
        for (const auto& s : js.nodes) gains.push_back(local_observer(s, opt.poles, opt.tol));
    }
    const auto w = eig_consensus_weights(g, js, opt.tol, opt.max_parents);
    return assemble_c2_bank(p, js, gains, w, opt.tol);
}

ObserverBank design(const Plant& p, const Digraph& g, Scheme scheme, const DesignOptions& opt) {
    switch (scheme) {
        case Scheme::C1: return design_c1(p, g, opt);
        case Scheme::C2: return design_c2(p, g, opt);
        case Scheme::Auto: break;
    }
    if (check_condition2(p, g, opt.tol) && !fixed_pieces(opt)) {
        try {
            return design_c2(p, g, opt);
        } catch (const IllConditionedJordan&) {
            // the sub-state scheme needs no Jordan form
        }
    }
    return design_c1(p, g, opt);
}

}  // namespace distobs
