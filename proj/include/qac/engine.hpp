#pragma once

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "qac/analysis.hpp"
#include "qac/digraph.hpp"
#include "qac/fraction.hpp"
#include "qac/protocol.hpp"
#include "qac/rng.hpp"
#include "qac/trace.hpp"

namespace qac {

/// Scripted transmission decisions for the randomized protocol, keyed by
/// (round, node). A missing entry means Auto: the node follows its own
/// probabilistic rule. nullopt targets mean "keep".
struct Schedule {
    std::map<std::pair<int, int>, std::optional<int>> entries;

    void set_keep(int round, int node) { entries[{round, node}] = std::nullopt; }
    void set_transmit(int round, int node, int target) { entries[{round, node}] = target; }

    const std::optional<int>* find(int round, int node) const {
        auto it = entries.find({round, node});
        return it == entries.end() ? nullptr : &it->second;
    }
};

/// Schedule file: one decision per line, "k j keep" or "k j -> l" with a
/// 0-based round k and 1-based node ids; '#' starts a comment.
inline Schedule parse_schedule(std::string_view text) {
    Schedule sched;
    int line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        std::size_t eol = text.find('\n', pos);
        std::string_view line = text.substr(pos, eol == std::string_view::npos ? text.size() - pos : eol - pos);
        pos = eol == std::string_view::npos ? text.size() + 1 : eol + 1;
        ++line_no;
        line = detail::trim(line);
        if (line.empty() || line.front() == '#') continue;

        std::size_t sp1 = line.find(' ');
        std::size_t sp2 = sp1 == std::string_view::npos ? std::string_view::npos : line.find(' ', sp1 + 1);
        if (sp2 == std::string_view::npos) throw ParseError(line_no, "expected 'k j keep' or 'k j -> l'");
        long long round = 0, node = 0;
        if (!detail::parse_int(detail::trim(line.substr(0, sp1)), round) || round < 0)
            throw ParseError(line_no, "round must be a nonnegative integer");
        if (!detail::parse_int(detail::trim(line.substr(sp1 + 1, sp2 - sp1 - 1)), node) || node < 1)
            throw ParseError(line_no, "node id must be a positive integer");
        std::string_view action = detail::trim(line.substr(sp2 + 1));

        auto key = std::pair<int, int>{static_cast<int>(round), static_cast<int>(node - 1)};
        if (sched.entries.count(key))
            throw ParseError(line_no, "duplicate decision for round " + std::to_string(round) +
                                          ", node " + std::to_string(node));
        if (action == "keep") {
            sched.entries[key] = std::nullopt;
        } else if (action.substr(0, 2) == "->") {
            long long target = 0;
            if (!detail::parse_int(detail::trim(action.substr(2)), target) || target < 1)
                throw ParseError(line_no, "target must be a positive node id");
            sched.entries[key] = static_cast<int>(target - 1);
        } else {
            throw ParseError(line_no, "expected 'keep' or '-> l'");
        }
    }
    return sched;
}

struct RunConfig {
    Algorithm algorithm = Algorithm::Prob;
    std::vector<std::int64_t> initial_values;
    int max_steps = 1000;
    std::uint64_t seed = 0;                 // randomized protocol only
    std::optional<Schedule> schedule;       // randomized protocol only
    int snapshot_every = 1;
    int persistence_window = 0;             // 0 means "use n"
};

/// Flat key=value run configuration: algo, values, seed, max_steps,
/// snapshot_every, window. Unknown keys are rejected.
inline RunConfig parse_run_config(std::string_view text) {
    RunConfig cfg;
    int line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        std::size_t eol = text.find('\n', pos);
        std::string_view line = text.substr(pos, eol == std::string_view::npos ? text.size() - pos : eol - pos);
        pos = eol == std::string_view::npos ? text.size() + 1 : eol + 1;
        ++line_no;
        line = detail::trim(line);
        if (line.empty() || line.front() == '#') continue;
        std::size_t eq = line.find('=');
        if (eq == std::string_view::npos) throw ParseError(line_no, "expected key=value");
        std::string_view key = detail::trim(line.substr(0, eq));
        std::string_view value = detail::trim(line.substr(eq + 1));
        long long number = 0;
        if (key == "algo") {
            if (value == "prob") cfg.algorithm = Algorithm::Prob;
            else if (value == "det") cfg.algorithm = Algorithm::Det;
            else throw ParseError(line_no, "algo must be 'prob' or 'det'");
        } else if (key == "values") {
            cfg.initial_values.clear();
            std::size_t start = 0;
            std::string v{value};
            while (start <= v.size()) {
                std::size_t comma = v.find(',', start);
                std::string_view item = detail::trim(
                    std::string_view(v).substr(start, comma == std::string::npos ? v.size() - start : comma - start));
                if (!detail::parse_int(item, number))
                    throw ParseError(line_no, "values must be a comma-separated integer list");
                cfg.initial_values.push_back(number);
                if (comma == std::string::npos) break;
                start = comma + 1;
            }
        } else if (key == "seed") {
            if (!detail::parse_int(value, number) || number < 0)
                throw ParseError(line_no, "seed must be a nonnegative integer");
            cfg.seed = static_cast<std::uint64_t>(number);
        } else if (key == "max_steps") {
            if (!detail::parse_int(value, number) || number < 1)
                throw ParseError(line_no, "max_steps must be a positive integer");
            cfg.max_steps = static_cast<int>(number);
        } else if (key == "snapshot_every") {
            if (!detail::parse_int(value, number) || number < 1)
                throw ParseError(line_no, "snapshot_every must be a positive integer");
            cfg.snapshot_every = static_cast<int>(number);
        } else if (key == "window") {
            if (!detail::parse_int(value, number) || number < 1)
                throw ParseError(line_no, "window must be a positive integer");
            cfg.persistence_window = static_cast<int>(number);
        } else {
            throw ParseError(line_no, "unknown key '" + std::string(key) + "'");
        }
    }
    return cfg;
}

namespace detail {

inline void validate_schedule(const Schedule& sched, const Digraph& g) {
    for (const auto& [key, target] : sched.entries) {
        const auto& [round, node] = key;
        if (node < 0 || node >= g.n)
            throw std::invalid_argument("schedule: node id out of range at round " + std::to_string(round));
        if (target && !g.has_edge(node, *target))
            throw std::invalid_argument("schedule: node " + std::to_string(node + 1) + " cannot reach " +
                                        std::to_string(*target + 1) + " at round " + std::to_string(round));
    }
}

inline NodeSnapshot snapshot_of(const NodeState& s) { return NodeSnapshot{s.y, s.z, s.y_s, s.z_s}; }

inline bool all_estimates_at(const RoundRecord& rec, const Fraction& q) {
    for (const NodeSnapshot& s : rec.nodes)
        if (!frac_eq(s.estimate(), q)) return false;
    return true;
}

/// Deliver one round's messages: inboxes grouped per receiver, each sorted
/// by sender id so traces are canonical.
inline void deliver(const std::vector<MassMessage>& outgoing, std::vector<std::vector<MassMessage>>& inboxes) {
    for (auto& box : inboxes) box.clear();
    for (const MassMessage& m : outgoing) inboxes[m.dest].push_back(m);
    for (auto& box : inboxes)
        std::sort(box.begin(), box.end(),
                  [](const MassMessage& a, const MassMessage& b) { return a.src < b.src; });
}

} // namespace detail

/// Execute one synchronous run.
///
/// Round semantics: messages emitted in round k are delivered at the start
/// of round k+1. Within a round the randomized protocol transmits its held
/// mass first and then sums its inbox, while the deterministic protocol sums
/// first and transmits only if its event conditions fired; trace rows record
/// the in-between point described in trace.hpp, which reproduces both
/// worked-example table sequences exactly.
///
/// The run stops once every node's estimate has equalled the exact average
/// for `persistence_window` consecutive rows (default: n), or at max_steps.
///
/// Randomized runs draw exactly one uniform value per node per round, even
/// for scheduled or massless nodes, so draw streams stay aligned no matter
/// how a run is scripted.
inline RunTrace run(const Digraph& g, const RunConfig& cfg) {
    if (!is_strongly_connected(g)) throw std::invalid_argument("run: digraph is not strongly connected");
    if (static_cast<int>(cfg.initial_values.size()) != g.n)
        throw std::invalid_argument("run: need exactly one initial value per node");
    if (cfg.max_steps < 1) throw std::invalid_argument("run: max_steps must be >= 1");
    if (cfg.snapshot_every < 1) throw std::invalid_argument("run: snapshot_every must be >= 1");
    if (cfg.schedule) {
        if (cfg.algorithm != Algorithm::Prob)
            throw std::invalid_argument("run: schedules apply to the randomized protocol only");
        detail::validate_schedule(*cfg.schedule, g);
    }

    const int window = cfg.persistence_window > 0 ? cfg.persistence_window : g.n;
    RunTrace trace;
    trace.algorithm = cfg.algorithm;
    trace.n = g.n;
    trace.average = exact_average(cfg.initial_values);

    RoundRecord row0;
    row0.round = 0;
    for (std::int64_t v : cfg.initial_values) row0.nodes.push_back(NodeSnapshot{v, 1, v, 1});
    trace.rounds.push_back(std::move(row0));

    int stable_rows = detail::all_estimates_at(trace.rounds[0], trace.average) ? 1 : 0;
    std::vector<std::vector<MassMessage>> inboxes(g.n);

    if (cfg.algorithm == Algorithm::Prob) {
        std::vector<ProbNode> nodes;
        std::vector<NodeRng> rng;
        for (int j = 0; j < g.n; ++j) {
            nodes.push_back(init_prob(j, cfg.initial_values[j], g));
            rng.emplace_back(cfg.seed, j);
        }
        for (int k = 0; stable_rows < window && k < cfg.max_steps; ++k) {
            std::vector<MassMessage> outgoing;
            for (int j = 0; j < g.n; ++j) {
                double draw = rng[j].next();
                std::optional<int> target;
                if (const auto* scripted = cfg.schedule ? cfg.schedule->find(k, j) : nullptr) {
                    // Scripted transmit with no mass is coerced to keep.
                    target = (*scripted && nodes[j].state.z > 0) ? *scripted : std::nullopt;
                } else {
                    target = prob_choose_target(nodes[j], draw);
                }
                if (target) outgoing.push_back(emit_and_clear(nodes[j].state, j, *target));
            }
            trace.rounds.back().outgoing = outgoing;
            detail::deliver(outgoing, inboxes);

            RoundRecord row;
            row.round = k + 1;
            for (int j = 0; j < g.n; ++j) {
                receive_and_sum(nodes[j].state, inboxes[j]);
                prob_update_state(nodes[j].state);
                row.nodes.push_back(detail::snapshot_of(nodes[j].state));
            }
            stable_rows = detail::all_estimates_at(row, trace.average) ? stable_rows + 1 : 0;
            trace.rounds.push_back(std::move(row));
        }
    } else {
        std::vector<DetNode> nodes;
        for (int j = 0; j < g.n; ++j) {
            auto [node, first] = init_det(j, cfg.initial_values[j], g);
            nodes.push_back(std::move(node));
            trace.rounds[0].outgoing.push_back(first);
        }
        for (int k = 0; stable_rows < window && k < cfg.max_steps; ++k) {
            detail::deliver(trace.rounds.back().outgoing, inboxes);

            RoundRecord row;
            row.round = k + 1;
            std::vector<NodeSnapshot> masses(g.n);
            for (int j = 0; j < g.n; ++j) {
                receive_and_sum(nodes[j].state, inboxes[j]);
                masses[j] = detail::snapshot_of(nodes[j].state);
            }
            for (int j = 0; j < g.n; ++j) {
                if (std::optional<MassMessage> m = det_step(nodes[j])) row.outgoing.push_back(*m);
                // Rows show the mass before it leaves and the estimate after
                // the trigger check.
                masses[j].y_s = nodes[j].state.y_s;
                masses[j].z_s = nodes[j].state.z_s;
            }
            row.nodes = std::move(masses);
            stable_rows = detail::all_estimates_at(row, trace.average) ? stable_rows + 1 : 0;
            trace.rounds.push_back(std::move(row));
        }
    }

    trace.metrics = analyze(trace, g, window);

    if (cfg.snapshot_every > 1) {
        std::vector<RoundRecord> kept;
        for (std::size_t i = 0; i < trace.rounds.size(); ++i)
            if (trace.rounds[i].round % cfg.snapshot_every == 0 || i + 1 == trace.rounds.size())
                kept.push_back(std::move(trace.rounds[i]));
        trace.rounds = std::move(kept);
    }
    return trace;
}

struct BatchJob {
    Digraph graph;
    RunConfig config;
};

struct BatchItem {
    std::uint64_t seed = 0;
    std::optional<MetricsRecord> metrics;
    std::string error;
};

/// Run a set of jobs, optionally on several threads. Results are indexed by
/// job, so output order never depends on scheduling; per-job failures are
/// captured and the batch continues.
inline std::vector<BatchItem> run_batch(std::span<const BatchJob> jobs, int parallelism = 1) {
    std::vector<BatchItem> results(jobs.size());
    auto work = [&](std::size_t i) {
        results[i].seed = jobs[i].config.seed;
        try {
            results[i].metrics = run(jobs[i].graph, jobs[i].config).metrics;
        } catch (const std::exception& e) {
            results[i].error = e.what();
        }
    };
    if (parallelism <= 1 || jobs.size() <= 1) {
        for (std::size_t i = 0; i < jobs.size(); ++i) work(i);
        return results;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    int threads = std::min<int>(parallelism, static_cast<int>(jobs.size()));
    for (int t = 0; t < threads; ++t) {
        pool.emplace_back([&] {
            for (std::size_t i = next.fetch_add(1); i < jobs.size(); i = next.fetch_add(1)) work(i);
        });
    }
    for (auto& th : pool) th.join();
    return results;
}

/// One run per seed on a fixed graph.
inline std::vector<BatchItem> run_batch(const Digraph& g, const RunConfig& base,
                                        std::span<const std::uint64_t> seeds, int parallelism = 1) {
    std::vector<BatchJob> jobs;
    for (std::uint64_t s : seeds) {
        BatchJob job{g, base};
        job.config.seed = s;
        jobs.push_back(std::move(job));
    }
    return run_batch(jobs, parallelism);
}

} // namespace qac
