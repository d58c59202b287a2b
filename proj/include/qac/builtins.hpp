#pragma once

#include <array>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "qac/digraph.hpp"
#include "qac/engine.hpp"
#include "qac/trace.hpp"

namespace qac::builtins {

/// Four nodes, six edges; the graph behind worked example 1.
inline Digraph demo4() {
    return make_digraph(4, {{0, 1}, {0, 2}, {1, 3}, {2, 0}, {2, 1}, {3, 2}});
}

/// Directed four-cycle; the graph behind worked example 2.
inline Digraph ring4() {
    return make_digraph(4, {{0, 1}, {1, 2}, {2, 3}, {3, 0}});
}

/// Seven nodes, thirteen edges; the comparison topology.
inline Digraph net7() {
    return make_digraph(7, {{0, 1},
                            {0, 4},
                            {1, 0},
                            {1, 4},
                            {2, 0},
                            {2, 4},
                            {3, 1},
                            {3, 4},
                            {4, 5},
                            {4, 6},
                            {5, 2},
                            {6, 3},
                            {6, 5}});
}

inline Digraph builtin_graph(const std::string& name) {
    if (name == "demo4") return demo4();
    if (name == "ring4") return ring4();
    if (name == "net7") return net7();
    throw std::invalid_argument("unknown builtin graph '" + name + "' (demo4, ring4, net7)");
}

inline std::vector<std::int64_t> demo4_values() { return {5, 3, 7, 2}; }
inline std::vector<std::int64_t> ring4_values() { return {9, 3, 9, 3}; }
inline std::vector<std::int64_t> net7_values() { return {5, 4, 8, 3, 5, 2, 7}; }

/// The scripted transmissions of worked example 1 (0-based nodes here;
/// the file format and tables use 1-based labels).
inline Schedule demo4_schedule() {
    Schedule s;
    s.set_transmit(0, 0, 1);
    s.set_keep(0, 1);
    s.set_transmit(0, 2, 0);
    s.set_transmit(0, 3, 2);
    s.set_transmit(1, 0, 2);
    s.set_transmit(1, 1, 3);
    s.set_keep(1, 2);
    s.set_keep(2, 2);
    s.set_transmit(2, 3, 2);
    s.set_transmit(3, 2, 0);
    s.set_transmit(4, 0, 1);
    s.set_transmit(5, 1, 3);
    return s;
}

/// One frozen reference table: a round index plus every node's
/// (y, z, y_s, z_s) exactly as in the published example tables.
struct GoldenTable {
    int round;
    std::vector<std::array<std::int64_t, 4>> cells;
};

/// Worked example 1: randomized protocol on demo4 with values 5,3,7,2 under
/// demo4_schedule(). The reference shows the four opening rounds and the
/// first round at which every estimate equals 17/4 (round 6: the merged
/// token reaches the last node three hops after the round-3 merge).
inline const std::vector<GoldenTable>& replay1_tables() {
    static const std::vector<GoldenTable> tables = {
        {0, {{{5, 1, 5, 1}}, {{3, 1, 3, 1}}, {{7, 1, 7, 1}}, {{2, 1, 2, 1}}}},
        {1, {{{7, 1, 7, 1}}, {{8, 2, 8, 2}}, {{2, 1, 2, 1}}, {{0, 0, 2, 1}}}},
        {2, {{{0, 0, 7, 1}}, {{0, 0, 8, 2}}, {{9, 2, 9, 2}}, {{8, 2, 8, 2}}}},
        {3, {{{0, 0, 7, 1}}, {{0, 0, 8, 2}}, {{17, 4, 17, 4}}, {{0, 0, 8, 2}}}},
        {6, {{{0, 0, 17, 4}}, {{0, 0, 17, 4}}, {{0, 0, 17, 4}}, {{17, 4, 17, 4}}}},
    };
    return tables;
}

/// Worked example 2: deterministic protocol on ring4 with values 9,3,9,3.
/// Every estimate equals 12/2 from round 3 on; two tokens carrying (12, 2)
/// keep circulating with period 2.
inline const std::vector<GoldenTable>& replay2_tables() {
    static const std::vector<GoldenTable> tables = {
        {0, {{{9, 1, 9, 1}}, {{3, 1, 3, 1}}, {{9, 1, 9, 1}}, {{3, 1, 3, 1}}}},
        {1, {{{3, 1, 9, 1}}, {{9, 1, 9, 1}}, {{3, 1, 9, 1}}, {{9, 1, 9, 1}}}},
        {2, {{{12, 2, 12, 2}}, {{0, 0, 9, 1}}, {{12, 2, 12, 2}}, {{0, 0, 9, 1}}}},
        {3, {{{0, 0, 12, 2}}, {{12, 2, 12, 2}}, {{0, 0, 12, 2}}, {{12, 2, 12, 2}}}},
    };
    return tables;
}

inline RoundRecord golden_as_round(const GoldenTable& t) {
    RoundRecord rec;
    rec.round = t.round;
    for (const auto& c : t.cells) rec.nodes.push_back(NodeSnapshot{c[0], c[1], c[2], c[3]});
    return rec;
}

/// Run configuration reproducing worked example 1 or 2.
inline std::pair<Digraph, RunConfig> replay_setup(int example) {
    if (example == 1) {
        RunConfig cfg;
        cfg.algorithm = Algorithm::Prob;
        cfg.initial_values = demo4_values();
        cfg.schedule = demo4_schedule();
        cfg.seed = 0;
        cfg.max_steps = 64;
        return {demo4(), cfg};
    }
    if (example == 2) {
        RunConfig cfg;
        cfg.algorithm = Algorithm::Det;
        cfg.initial_values = ring4_values();
        cfg.max_steps = 64;
        return {ring4(), cfg};
    }
    throw std::invalid_argument("replay: example must be 1 or 2");
}

inline const std::vector<GoldenTable>& replay_tables(int example) {
    if (example == 1) return replay1_tables();
    if (example == 2) return replay2_tables();
    throw std::invalid_argument("replay: example must be 1 or 2");
}

} // namespace qac::builtins
