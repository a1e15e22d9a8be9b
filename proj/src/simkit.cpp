#include "distobs/simkit.hpp"

#include <algorithm>
#include <map>
#include <random>

namespace distobs {

void SwitchingSignal::validate(const Digraph& baseline, int K) const {
    if (window_T < 1) throw InvalidSignal("window length must be at least 1");
    if (static_cast<int>(schedule.size()) < K)
        throw InvalidSignal("schedule covers " + std::to_string(schedule.size()) + " steps, need " + std::to_string(K));
    for (size_t k = 0; k < schedule.size(); ++k)
        if (schedule[k] < 0 || schedule[k] >= static_cast<int>(modes.size()))
            throw InvalidSignal("mode index " + std::to_string(schedule[k]) + " at step " + std::to_string(k) +
                                " is out of range");
    for (size_t m = 0; m < modes.size(); ++m)
        for (const auto& [from, to] : modes[m])
            if (!baseline.has_edge(from, to))
                throw InvalidSignal("mode " + std::to_string(m) + " uses edge " + std::to_string(from) + "->" +
                                    std::to_string(to) + " that is not in the graph");
}

double relative_error(const Vector& xhat, const Vector& x) {
    return (xhat - x).norm() / (1.0 + x.norm());
}

namespace {

// Weights actually used when some links are down: the surviving part of the
// row, reweighted uniformly, or the node's own previous estimate if nothing
// survives.
WeightRow effective(const WeightRow* row, NodeId i, const EdgeSet* active) {
    if (!row) return {{i, 1.0}};
    if (!active) return *row;
    std::vector<NodeId> alive;
    bool all = true;
    for (const auto& [l, v] : *row) {
        if (v <= 0.0) continue;
        if (l == i || active->count({l, i}))
            alive.push_back(l);
        else
            all = false;
    }
    if (all) return *row;
    if (alive.empty()) return {{i, 1.0}};
    WeightRow out;
    for (NodeId l : alive) out[l] = 1.0 / static_cast<double>(alive.size());
    return out;
}

Vector mix(const WeightRow& w, const std::vector<Vector>& vals) {
    Vector s = Vector::Zero(vals.front().size());
    for (const auto& [l, v] : w) s += v * vals[l - 1];
    return s;
}

const WeightRow* find_row(const std::map<NodeId, WeightRow>& rows, NodeId i) {
    auto it = rows.find(i);
    return it == rows.end() ? nullptr : &it->second;
}

void check_setup(const Plant& p, const Digraph& g, const SimulationSetup& s) {
    p.validate();
    if (g.n_nodes() != p.n_nodes()) throw ShapeError("graph and plant disagree on the number of nodes");
    if (s.K < 1) throw SchemaError("the horizon K must be at least 1");
    if (s.x0.size() != p.n()) throw ShapeError("x0 has the wrong dimension");
    if (!s.est0.empty()) {
        if (static_cast<int>(s.est0.size()) != p.n_nodes()) throw ShapeError("need one initial estimate per node");
        for (const auto& e : s.est0)
            if (e.size() != p.n()) throw ShapeError("initial estimate has the wrong dimension");
    }
    if (s.signal) s.signal->validate(g, s.K);
}

// Per-node state of the eigenvalue-wise observer.
struct C2State {
    Vector s;
    Vector z_uo;
};

class Engine {
public:
    Engine(const Plant& p, const ObserverBank& bank) : p_(p), bank_(bank) {}

    void init(std::vector<Vector>& xhat) {
        if (auto* b = std::get_if<C2ObserverBank>(&bank_)) {
            for (const auto& o : b->nodes) {
                const auto& sp = o.split;
                const Vector z = sp.P.transpose() * (b->jordan.T_inv * xhat[o.node - 1]);
                C2State st;
                st.z_uo = z.tail(sp.uo_dim());
                st.s.resize(o.s_dim);
                st.s.head(sp.o_dim()) = z.head(sp.o_dim());
                if (sp.w_O_dim) st.s.tail(sp.w_O_dim) = (sp.Tbar.transpose() * st.z_uo).head(sp.w_O_dim);
                c2_.push_back(st);
            }
        }
    }

    std::vector<Vector> step(const Vector& x, const std::vector<Vector>& xhat, const EdgeSet* active) {
        if (auto* b = std::get_if<CompactObserverBank>(&bank_)) return step_c1(*b, x, xhat, active);
        return step_c2(std::get<C2ObserverBank>(bank_), x, xhat, active);
    }

private:
    std::vector<Vector> step_c1(const CompactObserverBank& b, const Vector& x, const std::vector<Vector>& xhat,
                                const EdgeSet* active) {
        std::vector<Vector> next(xhat.size());
        for (const auto& cb : b.components) {
            const auto& d = cb.decomp;
            for (const auto& nb : cb.node_banks) {
                const NodeId i = nb.node;
                const Vector& xi = xhat[i - 1];
                Vector xn = cb.N_mat * xi + nb.TH * (nb.C * x - nb.C * xi);
                if (!active) {
                    for (const auto& [l, G] : nb.G) xn += G * xhat[l - 1];
                } else {
                    xn += (cb.projectors[nb.slot] + cb.projectors[d.slots()]) * xi;
                    for (int j = 0; j < d.slots(); ++j) {
                        if (j == nb.slot || d.dims[j] == 0) continue;
                        xn += cb.projectors[j] * mix(effective(find_row(cb.weights[j].rows, i), i, active), xhat);
                    }
                }
                next[i - 1] = xn;
            }
        }
        for (const auto& r : b.nonsource) next[r.node - 1] = b.A * mix(effective(&r.weights, r.node, active), xhat);
        for (size_t i = 0; i < next.size(); ++i)
            if (next[i].size() == 0) throw ShapeError("node " + std::to_string(i + 1) + " has no observer rule");
        return next;
    }

    std::vector<Vector> step_c2(const C2ObserverBank& b, const Vector& x, const std::vector<Vector>& xhat,
                                const EdgeSet* active) {
        const auto& js = b.jordan;
        std::vector<Vector> zt;
        zt.reserve(xhat.size());
        for (const auto& v : xhat) zt.push_back(js.T_inv * v);
        std::vector<Vector> next(xhat.size());
        for (const auto& o : b.nodes) {
            const NodeId i = o.node;
            const auto& sp = o.split;
            C2State& st = c2_[i - 1];
            const Vector y = o.C * x;
            const Vector s_next = sp.JJ * st.s + o.LL * (y - sp.FF * st.s);
            Vector v(sp.uo_dim());
            int at = 0;
            for (int j : sp.undetectable) {
                const auto& jc = js.classes[j];
                const ClassWeights* cw = b.weights_for(j);
                const WeightRow w = effective(cw ? find_row(cw->rows, i) : nullptr, i, active);
                Vector acc = Vector::Zero(jc.dim);
                for (const auto& [l, wv] : w) acc += wv * zt[l - 1].segment(jc.offset, jc.dim);
                v.segment(at, jc.dim) = acc;
                at += jc.dim;
            }
            st.s = s_next;
            st.z_uo = sp.J_UO * v;
            Vector z(p_.n());
            z.head(sp.o_dim()) = s_next.head(sp.o_dim());
            z.tail(sp.uo_dim()) = st.z_uo;
            next[i - 1] = js.T * (sp.P * z);
        }
        return next;
    }

    const Plant& p_;
    const ObserverBank& bank_;
    std::vector<C2State> c2_;
};

}  // namespace

SimulationTrace simulate(const Plant& p, const Digraph& g, const ObserverBank& bank, const SimulationSetup& setup) {
    check_setup(p, g, setup);
    const int N = p.n_nodes();
    Vector x = setup.x0;
    std::vector<Vector> xhat = setup.est0.empty() ? std::vector<Vector>(N, Vector::Zero(p.n())) : setup.est0;
    Engine eng(p, bank);
    eng.init(xhat);

    SimulationTrace tr;
    auto record = [&](int k, int mode) {
        TraceRecord r;
        r.step = k;
        r.mode = mode;
        r.x = x;
        r.xhat = xhat;
        for (const auto& e : xhat) {
            r.err.push_back((e - x).norm());
            r.relerr.push_back(relative_error(e, x));
        }
        tr.records.push_back(std::move(r));
    };
    for (int k = 0; k < setup.K; ++k) {
        const EdgeSet* active = nullptr;
        int mode = 0;
        if (setup.signal) {
            mode = setup.signal->schedule[k];
            active = &setup.signal->modes[mode];
        }
        record(k, mode);
        auto next = eng.step(x, xhat, active);
        x = p.A * x;
        xhat = std::move(next);
    }
    record(setup.K, -1);
    return tr;
}

namespace {

bool hears_parent(const EdgeSet& edges, const ParentSet& ps) {
    for (NodeId l : ps.parents)
        if (edges.count({l, ps.node})) return true;
    return false;
}

}  // namespace

SwitchingSignal make_assumption2_signal(const std::vector<ParentSet>& parents, const Digraph& baseline, int T, int K,
                                        double drop_prob, std::uint64_t seed) {
    if (T < 1) throw InvalidSignal("window length must be at least 1");
    if (K < 0) throw InvalidSignal("horizon must be non-negative");
    if (!(drop_prob >= 0.0 && drop_prob < 1.0)) throw InvalidSignal("drop probability must lie in [0, 1)");
    std::mt19937_64 rng(seed);
    std::bernoulli_distribution drop(drop_prob);
    std::vector<EdgeSet> active(K);
    for (int k = 0; k < K; ++k)
        for (const auto& e : baseline.edges())
            if (!drop(rng)) active[k].insert(e);
    for (int start = 0; start < K; start += T) {
        const int end = std::min(start + T, K);
        for (const auto& ps : parents) {
            if (ps.parents.empty()) continue;
            bool heard = false;
            for (int k = start; k < end && !heard; ++k) heard = hears_parent(active[k], ps);
            if (!heard) active[end - 1].insert({*std::min_element(ps.parents.begin(), ps.parents.end()), ps.node});
        }
    }
    SwitchingSignal sig;
    sig.window_T = T;
    std::map<EdgeSet, int> index;
    for (auto& e : active) {
        auto [it, fresh] = index.emplace(e, static_cast<int>(sig.modes.size()));
        if (fresh) sig.modes.push_back(e);
        sig.schedule.push_back(it->second);
    }
    if (sig.modes.empty()) sig.modes.push_back(baseline.edges());
    return sig;
}

Assumption2Check validate_assumption2(const SwitchingSignal& signal, const std::vector<ParentSet>& parents, int T) {
    if (T < 1) throw InvalidSignal("window length must be at least 1");
    const int K = static_cast<int>(signal.schedule.size());
    for (int k = 0; k < K; ++k)
        if (signal.schedule[k] < 0 || signal.schedule[k] >= static_cast<int>(signal.modes.size()))
            throw InvalidSignal("mode index out of range at step " + std::to_string(k));
    Assumption2Check out;
    for (int m = 0; (m + 1) * T <= K - 1; ++m) {
        for (const auto& ps : parents) {
            if (ps.parents.empty()) continue;
            bool heard = false;
            for (int k = m * T; k <= (m + 1) * T && !heard; ++k)
                heard = hears_parent(signal.modes[signal.schedule[k]], ps);
            if (!heard) {
                out.ok = false;
                out.window = m;
                out.node = ps.node;
                out.channel = ps.channel;
                return out;
            }
        }
    }
    return out;
}

std::vector<NodeMetrics> convergence_metrics(const SimulationTrace& trace, double eps) {
    std::vector<NodeMetrics> out;
    const int N = trace.n_nodes();
    const int K = static_cast<int>(trace.records.size()) - 1;
    for (int i = 0; i < N; ++i) {
        NodeMetrics m;
        m.node = i + 1;
        m.final_rel_error = trace.records.back().relerr[i];
        for (int k = 0; k <= K; ++k)
            if (trace.records[k].relerr[i] < eps) {
                m.first_step_below = k;
                break;
            }
        m.monotone_tail = true;
        for (int k = K / 2; k < K; ++k)
            if (trace.records[k + 1].relerr[i] > trace.records[k].relerr[i] + 1e-12) m.monotone_tail = false;
        out.push_back(m);
    }
    return out;
}

}  // namespace distobs
