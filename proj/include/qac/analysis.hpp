#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <vector>

#include "qac/digraph.hpp"
#include "qac/fraction.hpp"
#include "qac/trace.hpp"

namespace qac {

/// Number of nodes currently holding mass (z > 0). Merges only ever shrink
/// this, so it is non-increasing along any trace and never drops below 1.
inline int token_count(const RoundRecord& rec) {
    int count = 0;
    for (const NodeSnapshot& s : rec.nodes)
        if (s.z > 0) ++count;
    return count;
}

/// Mass conservation at every recorded round: the y column must sum to the
/// initial total and the z column to n. Expects a full-rate trace.
inline std::vector<ConservationViolation> check_conservation(const RunTrace& trace) {
    std::vector<ConservationViolation> violations;
    for (const RoundRecord& rec : trace.rounds) {
        std::int64_t sum_y = 0, sum_z = 0;
        for (const NodeSnapshot& s : rec.nodes) {
            sum_y += s.y;
            sum_z += s.z;
        }
        if (sum_y != trace.average.num)
            violations.push_back({rec.round, "y", trace.average.num, sum_y});
        if (sum_z != trace.n)
            violations.push_back({rec.round, "z", static_cast<std::int64_t>(trace.n), sum_z});
    }
    return violations;
}

/// Earliest round from which every node's estimate equals q all the way to
/// the end of the trace, provided that stable suffix spans at least `window`
/// rounds. A shorter suffix (e.g. a run truncated right after reaching q) is
/// not enough evidence and reports no convergence.
inline std::optional<int> detect_convergence(const RunTrace& trace, const Fraction& q, int window) {
    if (trace.rounds.empty() || window < 1) return std::nullopt;
    std::size_t first_stable = trace.rounds.size();
    for (std::size_t i = trace.rounds.size(); i-- > 0;) {
        bool all_at_q = true;
        for (const NodeSnapshot& s : trace.rounds[i].nodes) {
            if (!frac_eq(s.estimate(), q)) {
                all_at_q = false;
                break;
            }
        }
        if (!all_at_q) break;
        first_stable = i;
    }
    if (first_stable == trace.rounds.size()) return std::nullopt;
    if (trace.rounds.size() - first_stable < static_cast<std::size_t>(window)) return std::nullopt;
    return trace.rounds[first_stable].round;
}

namespace detail {

/// Full dynamical configuration of a deterministic run at one row: masses,
/// committed estimates, which nodes are about to transmit, and every
/// round-robin cursor (reconstructed from the emission history).
inline std::vector<std::int64_t> det_configuration(const RunTrace& trace, const Digraph& g,
                                                   std::size_t row,
                                                   const std::vector<std::vector<int>>& sent_counts) {
    std::vector<std::int64_t> key;
    const RoundRecord& rec = trace.rounds[row];
    std::vector<std::int64_t> fired(rec.nodes.size(), 0);
    for (const MassMessage& m : rec.outgoing) fired[m.src] = 1;
    for (std::size_t j = 0; j < rec.nodes.size(); ++j) {
        const NodeSnapshot& s = rec.nodes[j];
        key.push_back(s.y);
        key.push_back(s.z);
        key.push_back(s.y_s);
        key.push_back(s.z_s);
        key.push_back(fired[j]);
        key.push_back(sent_counts[row][j] % g.out_degree(static_cast<int>(j)));
    }
    return key;
}

inline bool holders_identical(const RoundRecord& rec, std::int64_t& y, std::int64_t& z) {
    bool first = true;
    for (const NodeSnapshot& s : rec.nodes) {
        if (s.z == 0) continue;
        if (first) {
            y = s.y;
            z = s.z;
            first = false;
        } else if (s.y != y || s.z != z) {
            return false;
        }
    }
    return !first;
}

} // namespace detail

/// Classify how the run's tokens ended up.
///
/// Full: some round shows a single node holding the whole counter mass
/// (z == n). Detected for either algorithm.
///
/// Partial: the run settled into a cycle in which a fixed number of tokens
/// circulate forever, all carrying the identical (y, z) pair. Only claimed
/// for deterministic traces, where one repeated configuration proves the
/// cycle; the reported period is the smallest one observed.
///
/// Undetermined: anything else, e.g. a truncated run or a randomized run
/// whose tokens never fully merged.
inline SummationClass classify_summation(const RunTrace& trace, const Digraph& g) {
    SummationClass result;
    for (const RoundRecord& rec : trace.rounds) {
        for (std::size_t j = 0; j < rec.nodes.size(); ++j) {
            if (rec.nodes[j].z == trace.n) {
                result.kind = SummationClass::Full;
                result.merge_round = rec.round;
                result.merge_node = static_cast<int>(j);
                return result;
            }
        }
    }
    if (trace.algorithm != Algorithm::Det || trace.rounds.size() < 2) return result;

    // Emission counts per node up to and including each row, for cursors.
    const std::size_t rows = trace.rounds.size();
    std::vector<std::vector<int>> sent(rows, std::vector<int>(trace.n, 0));
    for (std::size_t r = 0; r < rows; ++r) {
        if (r > 0) sent[r] = sent[r - 1];
        for (const MassMessage& m : trace.rounds[r].outgoing) ++sent[r][m.src];
    }

    std::map<std::vector<std::int64_t>, std::size_t> first_seen;
    std::size_t cycle_start = rows, cycle_repeat = rows;
    for (std::size_t r = 0; r < rows; ++r) {
        auto key = detail::det_configuration(trace, g, r, sent);
        auto [it, inserted] = first_seen.try_emplace(std::move(key), r);
        if (!inserted) {
            cycle_start = it->second;
            cycle_repeat = r;
            break;
        }
    }
    if (cycle_start == rows) return result;

    int period = static_cast<int>(cycle_repeat - cycle_start);
    // Shrink to the smallest divisor that still matches everywhere observed.
    for (int d = 1; d < period; ++d) {
        if (period % d != 0) continue;
        bool ok = true;
        for (std::size_t r = cycle_start; r + d < rows && ok; ++r)
            ok = detail::det_configuration(trace, g, r, sent) ==
                 detail::det_configuration(trace, g, r + d, sent);
        if (ok) {
            period = d;
            break;
        }
    }

    // Every row of the periodic regime must show identical held pairs and a
    // constant token count; otherwise the run stays unclassified.
    std::int64_t hy = 0, hz = 0;
    int alpha = token_count(trace.rounds[cycle_start]);
    for (std::size_t r = cycle_start; r < rows; ++r) {
        std::int64_t y = 0, z = 0;
        if (!detail::holders_identical(trace.rounds[r], y, z)) return result;
        if (token_count(trace.rounds[r]) != alpha) return result;
        if (r == cycle_start) {
            hy = y;
            hz = z;
        } else if (y != hy || z != hz) {
            return result;
        }
    }

    result.kind = SummationClass::Partial;
    result.alpha = alpha;
    result.period = period;
    result.start_round = trace.rounds[cycle_start].round;
    return result;
}

/// Exhaustive search over all randomized-protocol transmission choices on a
/// tiny instance: is a state where one node holds z == n reachable at all?
/// Breadth-first with memoized configurations, independent of the simulation
/// engine. Guarded to n <= 4 and max_depth <= 12.
inline bool merge_state_reachable(const Digraph& g, std::span<const std::int64_t> initial_values,
                                  int max_depth, std::size_t state_budget = 200000) {
    if (g.n > 4) throw std::invalid_argument("merge_state_reachable: n must be <= 4");
    if (max_depth > 12 || max_depth < 0)
        throw std::invalid_argument("merge_state_reachable: max_depth must be in 0..12");
    if (static_cast<int>(initial_values.size()) != g.n)
        throw std::invalid_argument("merge_state_reachable: value count mismatch");

    using Config = std::vector<std::int64_t>;  // y0, z0, y1, z1, ...
    Config start;
    for (std::int64_t v : initial_values) {
        start.push_back(v);
        start.push_back(1);
    }
    auto merged = [&](const Config& c) {
        for (int j = 0; j < g.n; ++j)
            if (c[2 * j + 1] == g.n) return true;
        return false;
    };
    if (merged(start)) return true;

    std::set<Config> visited{start};
    std::vector<Config> frontier{start};
    for (int depth = 0; depth < max_depth; ++depth) {
        std::vector<Config> next_frontier;
        for (const Config& c : frontier) {
            std::vector<int> holders;
            for (int j = 0; j < g.n; ++j)
                if (c[2 * j + 1] > 0) holders.push_back(j);

            // Odometer over each holder's choices: itself (keep) or any
            // out-neighbor.
            std::vector<int> choice(holders.size(), 0);
            while (true) {
                Config next(2 * g.n, 0);
                for (std::size_t h = 0; h < holders.size(); ++h) {
                    int j = holders[h];
                    int dest = choice[h] == 0 ? j : g.out_adj[j][choice[h] - 1];
                    next[2 * dest] += c[2 * j];
                    next[2 * dest + 1] += c[2 * j + 1];
                }
                if (merged(next)) return true;
                if (visited.insert(next).second) {
                    if (visited.size() > state_budget)
                        throw std::runtime_error("merge_state_reachable: state budget exceeded");
                    next_frontier.push_back(std::move(next));
                }
                std::size_t h = 0;
                for (; h < holders.size(); ++h) {
                    if (++choice[h] <= g.out_degree(holders[h])) break;
                    choice[h] = 0;
                }
                if (h == holders.size()) break;
            }
        }
        frontier = std::move(next_frontier);
        if (frontier.empty()) break;
    }
    return false;
}

/// Fill a trace's metrics record: convergence step, token-count series with
/// monotonicity breaches, conservation check and summation class.
inline MetricsRecord analyze(const RunTrace& trace, const Digraph& g, int window) {
    MetricsRecord m;
    m.convergence_step = detect_convergence(trace, trace.average, window);
    m.violations = check_conservation(trace);
    int previous = trace.n;
    for (const RoundRecord& rec : trace.rounds) {
        int count = token_count(rec);
        m.token_counts.push_back(count);
        if (count > previous)
            m.violations.push_back({rec.round, "token_count", previous, count});
        if (count < 1)
            m.violations.push_back({rec.round, "token_count", 1, count});
        previous = count;
    }
    m.summation = classify_summation(trace, g);
    return m;
}

} // namespace qac
