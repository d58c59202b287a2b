#pragma once

#include <cassert>
#include <cstdint>
#include <numeric>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "qac/digraph.hpp"
#include "qac/fraction.hpp"

namespace qac {

/// One agent's variables.
///
/// Mass variables (y, z) are what the node currently holds and may hand off;
/// z counts how many of the initial unit tokens have merged into this mass.
/// State variables (y_s, z_s) are the committed estimate, updated only when
/// the algorithm's trigger fires; the estimate itself is the unreduced
/// fraction y_s / z_s.
struct NodeState {
    std::int64_t y = 0;
    std::int64_t z = 0;
    std::int64_t y_s = 0;
    std::int64_t z_s = 1;

    Fraction estimate() const { return Fraction(y_s, z_s); }
};

inline NodeState initial_node_state(std::int64_t y0) {
    NodeState s;
    s.y = y0;
    s.z = 1;
    s.y_s = y0;
    s.z_s = 1;
    return s;
}

/// An (y, z) pair in flight on one edge for one round. Zero-counter
/// transmissions are never emitted, so z >= 1 on every message.
struct MassMessage {
    std::int64_t y = 0;
    std::int64_t z = 0;
    int src = -1;
    int dest = -1;
};

/// Randomized-protocol routing: a partition of [0,1) into half-open buckets,
/// self first, then the out-neighbors in adjacency order. cumulative[i] is
/// the upper bound of bucket i.
struct ProbRouting {
    std::vector<int> targets;       // out-neighbors, adjacency order
    std::vector<double> cumulative; // size targets.size() + 1; last entry 1.0

    /// Uniform default: every outcome (self included) gets 1 / (1 + D+).
    static ProbRouting uniform(const Digraph& g, int node) {
        ProbRouting r;
        r.targets = g.out_adj[node];
        const double share = 1.0 / (1.0 + static_cast<double>(r.targets.size()));
        for (std::size_t i = 0; i <= r.targets.size(); ++i)
            r.cumulative.push_back(i + 1 == r.targets.size() + 1 ? 1.0 : share * static_cast<double>(i + 1));
        return r;
    }

    /// Explicit probabilities: probs[0] is the self probability, probs[i]
    /// the i-th out-neighbor's. Every entry must be strictly positive (an
    /// existing edge may not be starved) and the total must be 1.
    static ProbRouting with_probabilities(const Digraph& g, int node, std::span<const double> probs) {
        if (probs.size() != g.out_adj[node].size() + 1)
            throw std::invalid_argument("ProbRouting: need one probability per out-neighbor plus self");
        double total = 0.0;
        for (double p : probs) {
            if (!(p > 0.0) || !(p < 1.0))
                throw std::invalid_argument("ProbRouting: probabilities must lie in (0,1)");
            total += p;
        }
        if (total < 1.0 - 1e-9 || total > 1.0 + 1e-9)
            throw std::invalid_argument("ProbRouting: probabilities must sum to 1");
        ProbRouting r;
        r.targets = g.out_adj[node];
        double acc = 0.0;
        for (std::size_t i = 0; i < probs.size(); ++i) {
            acc += probs[i];
            r.cumulative.push_back(i + 1 == probs.size() ? 1.0 : acc);
        }
        return r;
    }
};

/// Deterministic-protocol routing: a fixed priority order over the
/// out-neighbors, walked cyclically. targets[p] is the neighbor with
/// priority p; cursor is the priority used by the next transmission.
struct RoundRobinRouting {
    std::vector<int> targets;
    int cursor = 0;

    /// Default priorities follow adjacency (i.e. input-file) order.
    static RoundRobinRouting from_adjacency(const Digraph& g, int node) {
        RoundRobinRouting r;
        r.targets = g.out_adj[node];
        return r;
    }

    /// priority[i] is the priority assigned to out-neighbor i in adjacency
    /// order; must be a bijection onto {0..D+-1}.
    static RoundRobinRouting with_priorities(const Digraph& g, int node, std::span<const int> priority) {
        const auto& adj = g.out_adj[node];
        if (priority.size() != adj.size())
            throw std::invalid_argument("RoundRobinRouting: need one priority per out-neighbor");
        RoundRobinRouting r;
        r.targets.assign(adj.size(), -1);
        for (std::size_t i = 0; i < adj.size(); ++i) {
            int p = priority[i];
            if (p < 0 || p >= static_cast<int>(adj.size()) || r.targets[p] != -1)
                throw std::invalid_argument("RoundRobinRouting: priorities must be a bijection");
            r.targets[p] = adj[i];
        }
        return r;
    }

    int peek_target() const { return targets[cursor]; }

    int take_target() {
        int t = targets[cursor];
        cursor = (cursor + 1) % static_cast<int>(targets.size());
        return t;
    }
};

struct ProbNode {
    int id = -1;
    NodeState state;
    ProbRouting routing;
};

struct DetNode {
    int id = -1;
    NodeState state;
    RoundRobinRouting routing;
};

/// Randomized-protocol initialization: unit counter, estimate y0/1, uniform
/// transmission probabilities.
inline ProbNode init_prob(int node, std::int64_t y0, const Digraph& g) {
    ProbNode p;
    p.id = node;
    p.state = initial_node_state(y0);
    p.routing = ProbRouting::uniform(g, node);
    return p;
}

/// Bucket lookup for one uniform draw: nullopt means keep (the self bucket),
/// otherwise the chosen out-neighbor. A node holding no mass always keeps.
inline std::optional<int> prob_choose_target(const ProbNode& node, double draw) {
    assert(draw >= 0.0 && draw < 1.0);
    if (node.state.z == 0) return std::nullopt;
    std::size_t bucket = 0;
    while (bucket < node.routing.cumulative.size() && draw >= node.routing.cumulative[bucket]) ++bucket;
    if (bucket == 0 || bucket > node.routing.targets.size()) return std::nullopt;
    return node.routing.targets[bucket - 1];
}

/// Move the whole held mass onto the wire. State variables are untouched.
inline MassMessage emit_and_clear(NodeState& state, int src, int dest) {
    if (state.z < 1) throw std::logic_error("emit_and_clear: node holds no mass");
    MassMessage m{state.y, state.z, src, dest};
    state.y = 0;
    state.z = 0;
    return m;
}

/// Sum the inbox into the held mass; the retained mass is the self term.
inline void receive_and_sum(NodeState& state, std::span<const MassMessage> inbox) {
    for (const MassMessage& m : inbox) {
        state.y += m.y;
        state.z += m.z;
    }
}

/// Randomized-protocol trigger: commit the mass as the new estimate when the
/// counter reached the committed one (z >= z_s). Returns whether it fired.
inline bool prob_update_state(NodeState& state) {
    if (state.z < state.z_s) return false;
    state.y_s = state.y;
    state.z_s = state.z;
    return true;
}

/// Event conditions of the deterministic protocol:
///   1. the counter grew past the committed one (z > z_s), or
///   2. it matches and the value did not shrink (z == z_s and y >= y_s).
/// A node with z == 0 can never trigger, since z_s >= 1.
inline bool det_event_conditions(const NodeState& state) {
    return state.z > state.z_s || (state.z == state.z_s && state.y >= state.y_s);
}

/// Deterministic-protocol initialization: besides setting the variables, the
/// node immediately sends its unit token to its priority-0 out-neighbor and
/// the cursor moves on.
inline std::pair<DetNode, MassMessage> init_det(int node, std::int64_t y0, const Digraph& g) {
    DetNode d;
    d.id = node;
    d.state = initial_node_state(y0);
    d.routing = RoundRobinRouting::from_adjacency(g, node);
    MassMessage m = emit_and_clear(d.state, node, d.routing.take_target());
    return {d, m};
}

/// One deterministic-protocol decision after the inbox was summed: if the
/// event conditions hold, commit the estimate, transmit the mass to the next
/// round-robin target and clear it. Emits iff the conditions hold.
inline std::optional<MassMessage> det_step(DetNode& node) {
    if (!det_event_conditions(node.state)) return std::nullopt;
    node.state.y_s = node.state.y;
    node.state.z_s = node.state.z;
    return emit_and_clear(node.state, node.id, node.routing.take_target());
}

} // namespace qac
