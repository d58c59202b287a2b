#pragma once

#include <cstdint>
#include <cstdio>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "qac/fraction.hpp"
#include "qac/protocol.hpp"

namespace qac {

enum class Algorithm { Prob, Det };

inline const char* algorithm_name(Algorithm a) { return a == Algorithm::Prob ? "prob" : "det"; }

struct NodeSnapshot {
    std::int64_t y = 0;
    std::int64_t z = 0;
    std::int64_t y_s = 0;
    std::int64_t z_s = 1;

    Fraction estimate() const { return Fraction(y_s, z_s); }
};

inline bool operator==(const NodeSnapshot& a, const NodeSnapshot& b) {
    return a.y == b.y && a.z == b.z && a.y_s == b.y_s && a.z_s == b.z_s;
}

/// One row of a run: the state of every node at round k, plus the messages
/// in flight from round k to round k+1.
///
/// Row semantics follow the synchronous round loop: a row shows each node's
/// mass after this round's deliveries were summed and its estimate after the
/// trigger check, but before any mass leaves for the next round. Row 0 is the
/// post-initialization state; the deterministic protocol's initial
/// transmissions therefore appear as round 0's outgoing messages while row 0
/// still shows the full initial masses.
struct RoundRecord {
    int round = 0;
    std::vector<NodeSnapshot> nodes;
    std::vector<MassMessage> outgoing;
};

/// How the run's tokens ended up (see analysis.hpp for the classifier).
struct SummationClass {
    enum Kind { Undetermined, Full, Partial } kind = Undetermined;
    int merge_round = -1;   // Full: first round with one node holding z == n
    int merge_node = -1;    // Full: that node (0-based)
    int alpha = 0;          // Partial: number of circulating tokens
    int period = 0;         // Partial: smallest observed period
    int start_round = -1;   // Partial: first round of the periodic regime
};

inline const char* summation_class_name(const SummationClass& c) {
    switch (c.kind) {
        case SummationClass::Full: return "full";
        case SummationClass::Partial: return "partial";
        default: return "undetermined";
    }
}

struct ConservationViolation {
    int round = 0;
    std::string quantity;  // "y", "z" or "token_count"
    std::int64_t expected = 0;
    std::int64_t actual = 0;
};

struct MetricsRecord {
    std::optional<int> convergence_step;
    std::vector<int> token_counts;  // one entry per recorded round
    SummationClass summation;
    std::vector<ConservationViolation> violations;
};

struct RunTrace {
    Algorithm algorithm = Algorithm::Prob;
    int n = 0;
    Fraction average{0, 1};
    std::vector<RoundRecord> rounds;
    MetricsRecord metrics;
};

/// CSV columns: round,node,y,z,y_s,z_s,q_s with 1-based node ids and the
/// estimate rendered unreduced as "num/den".
inline void write_trace_csv(const RunTrace& trace, std::ostream& out) {
    out << "round,node,y,z,y_s,z_s,q_s\n";
    for (const RoundRecord& rec : trace.rounds) {
        for (std::size_t j = 0; j < rec.nodes.size(); ++j) {
            const NodeSnapshot& s = rec.nodes[j];
            out << rec.round << ',' << (j + 1) << ',' << s.y << ',' << s.z << ',' << s.y_s << ','
                << s.z_s << ',' << to_string(s.estimate()) << '\n';
        }
    }
}

/// Flat key=value metrics record, one key per line.
inline void write_metrics_kv(const RunTrace& trace, std::ostream& out) {
    out << "algorithm=" << algorithm_name(trace.algorithm) << '\n';
    out << "nodes=" << trace.n << '\n';
    out << "rounds=" << (trace.rounds.empty() ? 0 : trace.rounds.back().round) << '\n';
    out << "average=" << to_string(trace.average) << '\n';
    out << "converged=" << (trace.metrics.convergence_step ? "true" : "false") << '\n';
    if (trace.metrics.convergence_step)
        out << "convergence_step=" << *trace.metrics.convergence_step << '\n';
    const SummationClass& c = trace.metrics.summation;
    out << "class=" << summation_class_name(c) << '\n';
    if (c.kind == SummationClass::Full) {
        out << "merge_round=" << c.merge_round << '\n';
        out << "merge_node=" << (c.merge_node + 1) << '\n';
    } else if (c.kind == SummationClass::Partial) {
        out << "alpha=" << c.alpha << '\n';
        out << "period=" << c.period << '\n';
        out << "period_start=" << c.start_round << '\n';
    }
    out << "violations=" << trace.metrics.violations.size() << '\n';
}

/// One round rendered as a fixed-width table, one node per row:
///
///   round 0
///   node       y      z    y_s    z_s      q_s
///   v1         5      1      5      1      5/1
inline std::string render_round_table(const RoundRecord& rec) {
    std::string out = "round " + std::to_string(rec.round) + "\n";
    out += "node       y      z    y_s    z_s      q_s\n";
    char buf[128];
    for (std::size_t j = 0; j < rec.nodes.size(); ++j) {
        const NodeSnapshot& s = rec.nodes[j];
        std::string label = "v" + std::to_string(j + 1);
        std::string q = to_string(s.estimate());
        std::snprintf(buf, sizeof buf, "%-4s %7lld %6lld %6lld %6lld %8s\n", label.c_str(),
                      static_cast<long long>(s.y), static_cast<long long>(s.z),
                      static_cast<long long>(s.y_s), static_cast<long long>(s.z_s), q.c_str());
        out += buf;
    }
    return out;
}

} // namespace qac
