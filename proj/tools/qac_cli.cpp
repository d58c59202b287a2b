// Command-line front end: single runs, golden replays of the two built-in
// worked examples, and seed batches with CSV summaries.

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "qac/analysis.hpp"
#include "qac/builtins.hpp"
#include "qac/digraph.hpp"
#include "qac/engine.hpp"
#include "qac/trace.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInputError = 1;
constexpr int kExitNoConvergence = 2;
constexpr int kExitGoldenMismatch = 3;

struct GenSpec {
    int n_lo = 0;
    int n_hi = 0;
    double density = 0.0;
    std::optional<std::uint64_t> seed;
};

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

std::vector<std::int64_t> parse_values(const std::string& list) {
    std::vector<std::int64_t> values;
    std::stringstream ss(list);
    std::string item;
    while (std::getline(ss, item, ',')) {
        std::size_t used = 0;
        values.push_back(std::stoll(item, &used));
        if (used != item.size()) throw std::runtime_error("bad value '" + item + "'");
    }
    if (values.empty()) throw std::runtime_error("empty value list");
    return values;
}

/// "A..B" (inclusive) or a single "A".
std::pair<std::int64_t, std::int64_t> parse_range(const std::string& text) {
    std::size_t dots = text.find("..");
    if (dots == std::string::npos) {
        std::int64_t v = std::stoll(text);
        return {v, v};
    }
    std::int64_t lo = std::stoll(text.substr(0, dots));
    std::int64_t hi = std::stoll(text.substr(dots + 2));
    if (hi < lo) throw std::runtime_error("empty range '" + text + "'");
    return {lo, hi};
}

GenSpec parse_gen(const std::string& spec) {
    GenSpec g;
    std::stringstream ss(spec);
    std::string item;
    while (std::getline(ss, item, ',')) {
        std::size_t eq = item.find('=');
        if (eq == std::string::npos) throw std::runtime_error("bad generator spec item '" + item + "'");
        std::string key = item.substr(0, eq), value = item.substr(eq + 1);
        if (key == "n") {
            auto [lo, hi] = parse_range(value);
            if (lo < 2) throw std::runtime_error("generator needs n >= 2");
            g.n_lo = static_cast<int>(lo);
            g.n_hi = static_cast<int>(hi);
        } else if (key == "density") {
            g.density = std::stod(value);
        } else if (key == "seed") {
            g.seed = static_cast<std::uint64_t>(std::stoull(value));
        } else {
            throw std::runtime_error("unknown generator key '" + key + "'");
        }
    }
    if (g.n_lo == 0) throw std::runtime_error("generator spec needs n=...");
    return g;
}

struct GraphSource {
    std::string file;
    std::string builtin;
    std::string gen;

    int count() const { return !file.empty() + !builtin.empty() + !gen.empty(); }

    /// Resolve the graph for one run; `variant` cycles n ranges and seeds
    /// generated graphs in batch mode.
    qac::Digraph resolve(std::uint64_t variant) const {
        if (!file.empty()) return qac::parse_edge_list(read_file(file));
        if (!builtin.empty()) return qac::builtins::builtin_graph(builtin);
        GenSpec g = parse_gen(gen);
        int span = g.n_hi - g.n_lo + 1;
        int n = g.n_lo + static_cast<int>(variant % static_cast<std::uint64_t>(span));
        std::uint64_t seed = g.seed ? *g.seed : variant;
        return qac::random_strongly_connected(n, g.density, seed);
    }
};

void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write '" + path + "'");
    out << content;
}

int cmd_run(const GraphSource& source, qac::RunConfig cfg, const std::string& schedule_file,
            const std::string& trace_out, const std::string& metrics_out) {
    qac::Digraph g = source.resolve(cfg.seed);
    if (!schedule_file.empty()) cfg.schedule = qac::parse_schedule(read_file(schedule_file));
    qac::RunTrace trace = qac::run(g, cfg);

    if (!trace_out.empty()) {
        std::ostringstream csv;
        qac::write_trace_csv(trace, csv);
        write_text_file(trace_out, csv.str());
    }
    std::ostringstream kv;
    qac::write_metrics_kv(trace, kv);
    if (!metrics_out.empty())
        write_text_file(metrics_out, kv.str());
    else
        std::cout << kv.str();
    return trace.metrics.convergence_step ? kExitOk : kExitNoConvergence;
}

int cmd_replay(int example) {
    auto [g, cfg] = qac::builtins::replay_setup(example);
    qac::RunTrace trace = qac::run(g, cfg);
    const auto& goldens = qac::builtins::replay_tables(example);

    std::string produced, expected;
    for (const auto& golden : goldens) {
        const qac::RoundRecord* rec = nullptr;
        for (const auto& r : trace.rounds)
            if (r.round == golden.round) rec = &r;
        if (!rec) {
            std::cerr << "replay: trace has no round " << golden.round << "\n";
            return kExitGoldenMismatch;
        }
        produced += qac::render_round_table(*rec) + "\n";
        expected += qac::render_round_table(qac::builtins::golden_as_round(golden)) + "\n";

        for (std::size_t j = 0; j < golden.cells.size(); ++j) {
            const auto& want = golden.cells[j];
            const auto& got = rec->nodes[j];
            const std::int64_t got_cells[4] = {got.y, got.z, got.y_s, got.z_s};
            static const char* col[4] = {"y", "z", "y_s", "z_s"};
            for (int c = 0; c < 4; ++c) {
                if (got_cells[c] != want[c]) {
                    std::cout << produced;
                    std::cerr << "replay mismatch at k=" << golden.round << " node v" << (j + 1)
                              << " column " << col[c] << ": expected " << want[c] << ", got "
                              << got_cells[c] << "\n";
                    return kExitGoldenMismatch;
                }
            }
        }
    }
    if (produced != expected) {
        std::cout << produced;
        std::cerr << "replay mismatch: rendered tables differ from the embedded reference\n";
        return kExitGoldenMismatch;
    }
    std::cout << produced;
    std::cout << "replay " << example << ": all tables match the embedded reference\n";
    return kExitOk;
}

int cmd_batch(const GraphSource& source, const qac::RunConfig& base, const std::string& seeds_range,
              const std::string& random_values, const std::string& out_csv, int jobs) {
    std::vector<std::uint64_t> seeds;
    if (!seeds_range.empty()) {
        auto [lo, hi] = parse_range(seeds_range);
        if (lo < 0) throw std::runtime_error("seeds must be nonnegative");
        for (std::int64_t s = lo; s <= hi; ++s) seeds.push_back(static_cast<std::uint64_t>(s));
    }

    std::optional<std::pair<std::int64_t, std::int64_t>> value_range;
    if (!random_values.empty()) value_range = parse_range(random_values);

    std::vector<qac::BatchJob> jobs_list;
    for (std::size_t i = 0; i < seeds.size(); ++i) {
        qac::BatchJob job;
        job.graph = source.resolve(seeds[i]);
        job.config = base;
        job.config.seed = seeds[i];
        if (value_range) {
            auto [lo, hi] = *value_range;
            qac::SplitMix64 gen{qac::substream_seed(seeds[i], 1000003)};
            job.config.initial_values.clear();
            for (int v = 0; v < job.graph.n; ++v)
                job.config.initial_values.push_back(lo + static_cast<std::int64_t>(gen.next_below(
                                                             static_cast<std::uint64_t>(hi - lo + 1))));
        }
        jobs_list.push_back(std::move(job));
    }

    std::vector<qac::BatchItem> results = qac::run_batch(jobs_list, jobs);

    std::ostringstream csv;
    csv << "seed,convergence_step,class,alpha,period,error\n";
    std::size_t failures = 0;
    std::vector<int> steps;
    for (const qac::BatchItem& item : results) {
        csv << item.seed << ',';
        if (item.metrics && item.metrics->convergence_step) {
            csv << *item.metrics->convergence_step;
            steps.push_back(*item.metrics->convergence_step);
        } else {
            ++failures;
        }
        csv << ',';
        if (item.metrics) {
            const auto& s = item.metrics->summation;
            csv << qac::summation_class_name(s) << ',';
            if (s.kind == qac::SummationClass::Partial)
                csv << s.alpha << ',' << s.period;
            else
                csv << ',';
        } else {
            csv << ",,";
        }
        csv << ',' << item.error << '\n';
    }
    if (!out_csv.empty())
        write_text_file(out_csv, csv.str());
    else
        std::cout << csv.str();

    std::sort(steps.begin(), steps.end());
    std::cout << "runs=" << results.size() << " converged=" << steps.size() << " failures=" << failures;
    if (!steps.empty()) {
        std::cout << " min=" << steps.front() << " median=" << steps[steps.size() / 2]
                  << " max=" << steps.back();
    }
    std::cout << "\n";
    return failures == 0 ? kExitOk : kExitNoConvergence;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Quantized average consensus simulator"};
    app.require_subcommand(1);

    GraphSource source;
    qac::RunConfig cfg;
    std::string values_list, schedule_file, config_file;
    std::string trace_out, metrics_out, batch_out;
    std::string seeds_range, random_values;
    std::string algo = "prob";
    int jobs = 1;
    int example = 0;

    auto add_common = [&](CLI::App* cmd) {
        cmd->add_option("--graph", source.file, "edge-list file");
        cmd->add_option("--builtin", source.builtin, "built-in graph: demo4, ring4, net7");
        cmd->add_option("--gen", source.gen, "generator spec n=N[,density=D][,seed=S]; n may be a range A..B");
        cmd->add_option("--algo", algo, "prob or det")->check(CLI::IsMember({"prob", "det"}));
        cmd->add_option("--values", values_list, "comma-separated initial values");
        cmd->add_option("--config", config_file, "key=value run configuration file");
        cmd->add_option("--max-steps", cfg.max_steps, "round limit");
        cmd->add_option("--window", cfg.persistence_window, "stable rounds required to declare convergence");
        cmd->add_option("--snapshot-every", cfg.snapshot_every, "trace thinning stride");
    };

    CLI::App* run_cmd = app.add_subcommand("run", "execute one run");
    add_common(run_cmd);
    run_cmd->add_option("--seed", cfg.seed, "randomized-protocol seed");
    run_cmd->add_option("--schedule", schedule_file, "scripted decisions file");
    run_cmd->add_option("--trace-out", trace_out, "trace CSV path");
    run_cmd->add_option("--metrics-out", metrics_out, "metrics key=value path");

    CLI::App* replay_cmd = app.add_subcommand("replay", "reproduce a built-in worked example");
    replay_cmd->add_option("example", example, "worked example number (1 or 2)")->required();

    CLI::App* batch_cmd = app.add_subcommand("batch", "run a seed batch");
    add_common(batch_cmd);
    batch_cmd->add_option("--seeds", seeds_range, "seed range A..B (inclusive) or a single seed");
    batch_cmd->add_option("--random-values", random_values,
                          "draw per-run values uniformly from LO..HI instead of --values");
    batch_cmd->add_option("--out", batch_out, "summary CSV path");
    batch_cmd->add_option("--jobs", jobs, "parallel runs");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? kExitOk : kExitInputError;  // --help stays 0
    }

    try {
        if (replay_cmd->parsed()) {
            if (example != 1 && example != 2) {
                std::cerr << "replay: example must be 1 or 2\n";
                return kExitInputError;
            }
            return cmd_replay(example);
        }

        if (source.count() != 1) {
            std::cerr << "exactly one of --graph, --builtin, --gen is required\n";
            return kExitInputError;
        }
        if (!config_file.empty()) {
            qac::RunConfig file_cfg = qac::parse_run_config(read_file(config_file));
            // Explicit flags win over the file.
            if (values_list.empty()) cfg.initial_values = file_cfg.initial_values;
            if (algo == "prob" && file_cfg.algorithm == qac::Algorithm::Det) algo = "det";
            if (cfg.max_steps == 1000) cfg.max_steps = file_cfg.max_steps;
            if (cfg.seed == 0) cfg.seed = file_cfg.seed;
            if (cfg.persistence_window == 0) cfg.persistence_window = file_cfg.persistence_window;
            if (cfg.snapshot_every == 1) cfg.snapshot_every = file_cfg.snapshot_every;
        }
        cfg.algorithm = algo == "det" ? qac::Algorithm::Det : qac::Algorithm::Prob;
        if (!values_list.empty()) cfg.initial_values = parse_values(values_list);

        if (run_cmd->parsed()) {
            if (!trace_out.empty() && trace_out == metrics_out) {
                std::cerr << "--trace-out and --metrics-out must differ\n";
                return kExitInputError;
            }
            if (cfg.initial_values.empty()) {
                std::cerr << "run: --values (or a config file with values=) is required\n";
                return kExitInputError;
            }
            return cmd_run(source, cfg, schedule_file, trace_out, metrics_out);
        }
        if (batch_cmd->parsed()) {
            if (cfg.initial_values.empty() && random_values.empty()) {
                std::cerr << "batch: --values or --random-values is required\n";
                return kExitInputError;
            }
            return cmd_batch(source, cfg, seeds_range, random_values, batch_out, jobs);
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitInputError;
    }
    return kExitInputError;
}
