#pragma once

#include <cstdint>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "distobs/design.hpp"

namespace distobs {

using EdgeSet = std::set<std::pair<NodeId, NodeId>>;  // (from, to)

struct SwitchingSignal {
    std::vector<EdgeSet> modes;
    std::vector<int> schedule;  // schedule[k] = mode active at step k
    int window_T = 1;

    void validate(const Digraph& baseline, int K) const;
};

struct TraceRecord {
    int step = 0;
    int mode = 0;  // -1 on the final record, which has no outgoing transition
    Vector x;
    std::vector<Vector> xhat;  // per node
    std::vector<double> err;
    std::vector<double> relerr;
};

struct SimulationTrace {
    std::vector<TraceRecord> records;
    std::uint64_t seed = 0;
    std::string scenario_hash;

    int n_nodes() const { return records.empty() ? 0 : static_cast<int>(records.front().xhat.size()); }
};

struct SimulationSetup {
    Vector x0;
    std::vector<Vector> est0;  // empty means zero initial estimates
    int K = 0;
    const SwitchingSignal* signal = nullptr;
};

// Synchronous run: every node reads the step-k estimates of its neighbors,
// then all nodes advance together.
SimulationTrace simulate(const Plant& p, const Digraph& g, const ObserverBank& bank, const SimulationSetup& setup);

// Drops each edge independently with probability drop_prob, then restores the
// smallest-id parent edge at the last step of every window of length T in
// which a node heard from none of its parents on some channel.
SwitchingSignal make_assumption2_signal(const std::vector<ParentSet>& parents, const Digraph& baseline, int T, int K,
                                        double drop_prob, std::uint64_t seed);

struct Assumption2Check {
    bool ok = true;
    int window = -1;
    NodeId node = 0;
    std::string channel;
};

// Scans the complete closed windows [mT, (m+1)T] of the schedule.
Assumption2Check validate_assumption2(const SwitchingSignal& signal, const std::vector<ParentSet>& parents, int T);

struct NodeMetrics {
    NodeId node = 0;
    double final_rel_error = 0.0;
    int first_step_below = -1;  // -1 when the threshold is never reached
    bool monotone_tail = false;
};

std::vector<NodeMetrics> convergence_metrics(const SimulationTrace& trace, double eps = 1e-6);

double relative_error(const Vector& xhat, const Vector& x);

}  // namespace distobs
