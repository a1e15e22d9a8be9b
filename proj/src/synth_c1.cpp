#include "distobs/synth_c1.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <string>

namespace distobs {

double ComponentBank::weight(int slot, NodeId i, NodeId l) const {
    const int own = decomp.slot_of(i);
    if (slot == decomp.slots() || slot == own) return l == i ? 1.0 : 0.0;
    if (decomp.dims.at(slot) == 0) return 0.0;
    const auto& rows = weights.at(slot).rows;
    auto r = rows.find(i);
    if (r == rows.end()) return 0.0;
    auto w = r->second.find(l);
    return w == r->second.end() ? 0.0 : w->second;
}

const NodeBank& ComponentBank::bank_of(NodeId i) const {
    for (const auto& b : node_banks)
        if (b.node == i) return b;
    throw ShapeError("node " + std::to_string(i) + " is not part of this component");
}

std::vector<Matrix> design_gains(const MultiSensorDecomposition& d, const PolePolicy& policy, const ToleranceConfig& tol) {
    std::vector<Matrix> gains;
    for (int j = 0; j < d.slots(); ++j) {
        const Matrix Ajj = d.A_block(j, j);
        const Matrix Cjj = d.C_block(j, j);
        try {
            gains.push_back(place_observer_gain(Ajj, Cjj, policy.poles_for(d.dims[j]), tol));
        } catch (const NotObservable&) {
            throw NumericalError("sub-state " + std::to_string(j + 1) + " is not observable by its source node");
        }
    }
    return gains;
}

void verify_gains(const MultiSensorDecomposition& d, const std::vector<Matrix>& gains, const ToleranceConfig& tol) {
    if (static_cast<int>(gains.size()) != d.slots()) throw SchemaError("need one gain per node in the sensor order");
    for (int j = 0; j < d.slots(); ++j) {
        const Matrix& L = gains[j];
        const auto r = d.C[j].rows();
        if (L.rows() != d.dims[j] || L.cols() != r)
            throw ShapeError("gain of sub-state " + std::to_string(j + 1) + " must be " + std::to_string(d.dims[j]) +
                              "x" + std::to_string(r));
        if (d.dims[j] == 0) continue;
        const double rho = structured_spectral_radius(d.A_block(j, j) - L * d.C_block(j, j), tol);
        if (rho > 1.0 - tol.schur_margin)
            throw NumericalError("gain of sub-state " + std::to_string(j + 1) + " leaves spectral radius " +
                                 std::to_string(rho));
    }
}

SubstateWeights consensus_weights_for_substate(int slot, NodeId source, const SpanningStructure& s) {
    if (s.roots != std::vector<NodeId>{source}) throw SchemaError("spanning structure must be rooted at the source");
    SubstateWeights w;
    w.slot = slot;
    w.source = source;
    w.topo_order = s.topo_order;
    for (const auto& [node, ps] : s.parents) {
        WeightRow row;
        for (NodeId l : ps) row[l] = 1.0 / static_cast<double>(ps.size());
        w.rows[node] = row;
    }
    return w;
}

ConsensusWeights tree_weights(const Digraph& g, const MultiSensorDecomposition& d, int max_parents) {
    ConsensusWeights out;
    for (int j = 0; j < d.slots(); ++j) {
        const NodeId source = d.order[j];
        if (d.dims[j] == 0) {
            SubstateWeights empty;
            empty.slot = j;
            empty.source = source;
            out.push_back(empty);
            continue;
        }
        out.push_back(consensus_weights_for_substate(j, source, spanning_dag_within(g, {source}, max_parents, d.order)));
    }
    return out;
}

void validate_weights(const Digraph& g, const MultiSensorDecomposition& d, const ConsensusWeights& w) {
    if (static_cast<int>(w.size()) != d.slots()) throw InvalidWeights("need one weight layer per sub-state slot");
    const std::set<NodeId> members(d.order.begin(), d.order.end());
    for (int j = 0; j < d.slots(); ++j) {
        if (d.dims[j] == 0) continue;
        const NodeId source = d.order[j];
        if (w[j].source != source) throw InvalidWeights("weight layer " + std::to_string(j + 1) + " has the wrong source");
        for (NodeId i : d.order) {
            if (i == source) continue;
            auto it = w[j].rows.find(i);
            if (it == w[j].rows.end())
                throw InvalidWeights("node " + std::to_string(i) + " has no weights for sub-state " + std::to_string(j + 1));
            double sum = 0.0;
            for (const auto& [l, v] : it->second) {
                const auto& in = g.in_neighbors(i);
                const bool neighbor = l == i || std::binary_search(in.begin(), in.end(), l);
                if (!neighbor || !members.count(l))
                    throw InvalidWeights("node " + std::to_string(i) + " weights non-neighbor " + std::to_string(l));
                if (!std::isfinite(v) || v < 0.0)
                    throw InvalidWeights("negative or non-finite weight at node " + std::to_string(i));
                sum += v;
            }
            if (std::abs(sum - 1.0) > 1e-9)
                throw InvalidWeights("weights of node " + std::to_string(i) + " for sub-state " + std::to_string(j + 1) +
                                     " sum to " + std::to_string(sum));
        }
    }
}

namespace {

// Order in which every node comes after the neighbors it listens to. Falls
// back to id order when the listening relation has a cycle.
std::vector<NodeId> listening_order(const SubstateWeights& w, const std::vector<NodeId>& nodes) {
    if (w.topo_order.size() == nodes.size() && !w.topo_order.empty() && w.topo_order.front() == w.source)
        return w.topo_order;
    std::vector<NodeId> out{w.source};
    std::set<NodeId> placed{w.source};
    bool progress = true;
    while (out.size() < nodes.size() && progress) {
        progress = false;
        for (NodeId i : nodes) {
            if (placed.count(i)) continue;
            bool ready = true;
            auto r = w.rows.find(i);
            if (r != w.rows.end())
                for (const auto& [l, v] : r->second)
                    if (l != i && v > 0 && !placed.count(l)) ready = false;
            if (ready) {
                out.push_back(i);
                placed.insert(i);
                progress = true;
            }
        }
    }
    for (NodeId i : nodes)
        if (!placed.count(i)) out.push_back(i);
    return out;
}

Matrix kron_identity(int copies, const Matrix& B) {
    Matrix K = Matrix::Zero(copies * B.rows(), copies * B.cols());
    for (int k = 0; k < copies; ++k) K.block(k * B.rows(), k * B.cols(), B.rows(), B.cols()) = B;
    return K;
}

}  // namespace

StabilityReport certify_stability(const MultiSensorDecomposition& d, const std::vector<Matrix>& gains,
                                  const ConsensusWeights& w, const ToleranceConfig& tol) {
    StabilityReport rep;
    rep.margin = tol.schur_margin;
    const int Nc = d.slots();
    bool ok = true;
    for (int p = 0; p < Nc; ++p) {
        const int o = d.dims[p];
        if (o == 0) continue;
        SubstateStability s;
        s.slot = p;
        s.source = d.order[p];
        s.order = listening_order(w[p], d.order);
        std::map<NodeId, int> pos;
        for (int a = 0; a < Nc; ++a) pos[s.order[a]] = a;
        const Matrix App = d.A_block(p, p);
        s.M = Matrix::Zero(Nc * o, Nc * o);
        s.M.topLeftCorner(o, o) = App - gains[p] * d.C_block(p, p);
        for (int a = 1; a < Nc; ++a) {
            const NodeId i = s.order[a];
            auto r = w[p].rows.find(i);
            if (r == w[p].rows.end()) continue;
            for (const auto& [l, v] : r->second) s.M.block(a * o, pos.at(l) * o, o, o) += v * App;
        }
        s.rho = block_triangular_spectral_radius(s.M, std::vector<int>(Nc, o), tol);
        for (int l = 0; l < p; ++l) {
            if (d.dims[l] == 0) continue;
            const Matrix Apl = d.A_block(p, l);
            Matrix H = Matrix::Zero(Nc * o, Nc * d.dims[l]);
            H.topLeftCorner(o, d.dims[l]) = Apl - gains[p] * d.C_block(p, l);
            if (Nc > 1) H.bottomRightCorner((Nc - 1) * o, (Nc - 1) * d.dims[l]) = kron_identity(Nc - 1, Apl);
            s.H.emplace_back(l, H);
        }
        ok = ok && s.rho <= 1.0 - tol.schur_margin;
        rep.substates.push_back(std::move(s));
    }
    rep.rho_AU = structured_spectral_radius(d.A_U(), tol);
    ok = ok && rep.rho_AU <= 1.0 - tol.schur_margin;
    rep.verdict = ok;
    return rep;
}

ComponentBank assemble_compact_bank(const MultiSensorDecomposition& d, const std::vector<Matrix>& gains,
                                    const ConsensusWeights& w, const Digraph& g, const ToleranceConfig& tol) {
    validate_weights(g, d, w);
    if (static_cast<int>(gains.size()) != d.slots()) throw SchemaError("need one gain per node in the sensor order");
    ComponentBank b;
    b.nodes = d.order;
    std::sort(b.nodes.begin(), b.nodes.end());
    b.decomp = d;
    b.gains = gains;
    b.weights = w;
    const Matrix& T = d.T;
    const Matrix& Ti = d.T_inv;
    b.N_mat = T * d.Abar_lower() * Ti;
    for (int j = 0; j <= d.slots(); ++j) {
        const int off = d.offset(j), dim = d.dim(j);
        b.projectors.push_back(T.middleCols(off, dim) * d.A_block(j, j) * Ti.middleRows(off, dim));
    }
    for (NodeId i : b.nodes) {
        NodeBank nb;
        nb.node = i;
        nb.slot = d.slot_of(i);
        nb.C = d.C[nb.slot];
        const Matrix& L = gains[nb.slot];
        if (L.rows() != d.dims[nb.slot] || L.cols() != nb.C.rows())
            throw SchemaError("gain of node " + std::to_string(i) + " has the wrong shape");
        nb.TH = T.middleCols(d.offset(nb.slot), d.dims[nb.slot]) * L;
        std::vector<NodeId> hood{i};
        for (NodeId l : g.in_neighbors(i))
            if (d.slot_of(l) >= 0) hood.push_back(l);
        for (NodeId l : hood) {
            Matrix G = Matrix::Zero(d.n(), d.n());
            for (int j = 0; j <= d.slots(); ++j) {
                const double v = b.weight(j, i, l);
                if (v != 0.0) G += v * b.projectors[j];
            }
            nb.G[l] = G;
        }
        b.node_banks.push_back(std::move(nb));
    }
    b.report = certify_stability(d, gains, w, tol);
    return b;
}

std::vector<NonsourceRule> nonsource_consensus(const Digraph& g, const std::vector<NodeId>& S, int max_parents) {
    std::vector<NonsourceRule> out;
    const SpanningStructure s = spanning_dag(g, S, max_parents);
    for (const auto& [node, ps] : s.parents) {
        NonsourceRule r;
        r.node = node;
        for (NodeId l : ps) r.weights[l] = 1.0 / static_cast<double>(ps.size());
        out.push_back(r);
    }
    return out;
}

std::vector<ParentSet> parent_sets(const CompactObserverBank& bank) {
    std::vector<ParentSet> out;
    for (size_t c = 0; c < bank.components.size(); ++c) {
        const auto& comp = bank.components[c];
        for (int j = 0; j < comp.decomp.slots(); ++j) {
            if (comp.decomp.dims[j] == 0) continue;
            for (const auto& [i, row] : comp.weights[j].rows) {
                ParentSet p;
                p.channel = "c" + std::to_string(c + 1) + ".s" + std::to_string(j + 1);
                p.node = i;
                for (const auto& [l, v] : row)
                    if (l != i && v > 0) p.parents.push_back(l);
                out.push_back(p);
            }
        }
    }
    for (const auto& r : bank.nonsource) {
        ParentSet p;
        p.channel = "consensus";
        p.node = r.node;
        for (const auto& [l, v] : r.weights)
            if (l != r.node && v > 0) p.parents.push_back(l);
        out.push_back(p);
    }
    return out;
}

}  // namespace distobs
