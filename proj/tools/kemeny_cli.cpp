// kemeny: command-line front end. Machine output is JSON lines on stdout,
// human summaries go to stderr.

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "kemeny/kemeny.hpp"

using json = nlohmann::ordered_json;
using namespace kemeny;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitFailure = 1;
constexpr int kExitInput = 2;
constexpr int kExitCapacity = 3;
constexpr int kExitConvergence = 4;
constexpr int kExitCorruptIndex = 5;

double seconds_since(std::chrono::steady_clock::time_point start) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

struct LoadedGraph {
    Graph graph;
    std::size_t original_nodes = 0;
    std::size_t original_edges = 0;
};

LoadedGraph load_graph(const std::string& path, bool take_lcc) {
    auto ends_with = [&](std::string_view suffix) {
        return path.size() >= suffix.size() && path.compare(path.size() - suffix.size(), suffix.size(), suffix) == 0;
    };
    if (!ends_with(".txt") && !ends_with(".edges"))
        throw InputError("unsupported graph file '" + path + "': expected a .txt or .edges edge list");
    std::ifstream in(path);
    if (!in) throw InputError("cannot open " + path);
    auto parsed = parse_edge_list(in);
    LoadedGraph out{std::move(parsed.graph), 0, 0};
    out.original_nodes = out.graph.node_count();
    out.original_edges = out.graph.edge_count();
    if (take_lcc) {
        out.graph = largest_connected_component(out.graph).graph;
    } else if (!is_connected(out.graph)) {
        throw ConnectivityError("graph is not connected (use --lcc to keep the largest component)");
    }
    return out;
}

std::size_t thread_count(std::size_t requested) {
    if (const char* env = std::getenv("KF_THREADS"); env && *env) {
        char* end = nullptr;
        auto value = std::strtoull(env, &end, 10);
        if (*end != '\0' || value == 0) throw InvalidArgumentError("KF_THREADS must be a positive integer");
        return static_cast<std::size_t>(value);
    }
    return requested == 0 ? default_thread_count() : requested;
}

NodeId node_by_label(const Graph& g, std::uint64_t label) {
    auto id = g.find_label(label);
    if (!id) throw InvalidArgumentError("node " + std::to_string(label) + " not in graph");
    return *id;
}

json graph_stats(const Graph& g) {
    return {{"n", g.node_count()}, {"m", g.edge_count()}};
}

void emit(const json& j) { std::cout << j.dump() << '\n' << std::flush; }

std::string digits12(double x) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.12g", x);
    return buf;
}

struct EstimatorFlags {
    std::size_t samples = 1000;
    std::uint64_t seed = 0;
    std::optional<std::uint64_t> root;
    std::string tau0 = "bfs";
    std::string method = "auto";
    std::optional<double> eps;
    std::optional<double> pf;
    std::size_t threads = 0;

    void attach(CLI::App* cmd) {
        cmd->add_option("--samples", samples, "number of sampled spanning trees")->capture_default_str();
        cmd->add_option("--seed", seed, "master RNG seed")->capture_default_str();
        cmd->add_option("--root", root, "root node (original label); default max degree");
        cmd->add_option("--tau0", tau0, "reference tree")
            ->check(CLI::IsMember({"bfs", "dfs", "wilson"}))
            ->capture_default_str();
        cmd->add_option("--method", method, "f evaluation")
            ->check(CLI::IsMember({"naive", "opt", "optimized", "auto"}))
            ->capture_default_str();
        cmd->add_option("--eps", eps, "relative error target for sample planning");
        cmd->add_option("--pf", pf, "failure probability for sample planning");
        cmd->add_option("--threads", threads, "worker threads (0 = all cores; KF_THREADS overrides)");
    }

    EstimateConfig config(const Graph& g) const {
        EstimateConfig c;
        c.sample_count = samples;
        c.seed = seed;
        if (root) {
            c.root_policy = RootPolicy::Explicit;
            c.root = node_by_label(g, *root);
        }
        c.reference = tau0 == "dfs" ? ReferenceTree::Dfs : tau0 == "wilson" ? ReferenceTree::Wilson : ReferenceTree::Bfs;
        c.method = method == "naive" ? Method::Naive : method == "auto" ? Method::Auto : Method::Optimized;
        c.epsilon = eps;
        c.failure_probability = pf;
        c.threads = thread_count(threads);
        return c;
    }
};

int cmd_exact(const std::string& path, bool lcc) {
    auto start = std::chrono::steady_clock::now();
    auto loaded = load_graph(path, lcc);
    const double kappa = kemeny_eigen(loaded.graph);
    json out{{"command", "exact"}, {"graph", graph_stats(loaded.graph)}, {"kappa", kappa},
             {"kappa_digits", digits12(kappa)}, {"timings", {{"total_seconds", seconds_since(start)}}}};
    emit(out);
    std::cerr << "kappa = " << digits12(kappa) << '\n';
    return kExitOk;
}

int cmd_estimate(const std::string& path, bool lcc, const EstimatorFlags& flags, const std::string& trace,
                 std::optional<double> reference) {
    auto start = std::chrono::steady_clock::now();
    auto loaded = load_graph(path, lcc);
    const Graph& g = loaded.graph;
    auto load_seconds = seconds_since(start);
    auto config = flags.config(g);
    auto result = estimate_kemeny(g, config);
    json out{{"command", "estimate"},
             {"graph", {{"n", g.node_count()}, {"m", g.edge_count()}, {"ecc_root", result.eccentricity}}},
             {"root", g.label(result.root)},
             {"tau0", to_string(config.reference)},
             {"tau0_height", result.reference_height},
             {"method", to_string(result.method_used)},
             {"samples", result.sample_count},
             {"seed", config.seed},
             {"kappa", result.kappa},
             {"walk_steps", result.walk_steps}};
    if (reference) out["relative_error"] = std::fabs(result.kappa - *reference) / std::fabs(*reference);
    out["timings"] = {{"load_seconds", load_seconds},
                      {"setup_seconds", result.setup_seconds},
                      {"sampling_seconds", result.sampling_seconds},
                      {"evaluation_seconds", result.evaluation_seconds},
                      {"wall_seconds", result.wall_seconds}};
    if (!trace.empty()) {
        std::ofstream t(trace);
        if (!t) throw InputError("cannot open trace file " + trace);
        for (std::size_t i = 0; i < result.sample_count; ++i)
            t << json{{"sample_index", i}, {"f", int128_to_string(result.f_values[i])},
                      {"walk_steps", result.sample_walk_steps[i]}}
                     .dump()
              << '\n';
    }
    emit(out);
    std::cerr << "kappa-hat = " << digits12(result.kappa) << " from " << result.sample_count << " trees ("
              << to_string(result.method_used) << ", " << result.wall_seconds << " s)\n";
    return kExitOk;
}

int cmd_index_build(const std::string& path, const std::string& index_path, bool lcc, const EstimatorFlags& flags,
                    const std::string& mode) {
    auto start = std::chrono::steady_clock::now();
    auto loaded = load_graph(path, lcc);
    const Graph& g = loaded.graph;
    auto config = flags.config(g);
    auto store = build_index(g, config, mode == "ism" ? MaintenanceMode::Ism : MaintenanceMode::Bsm);
    auto build_seconds = seconds_since(start);
    write_index_file(store, index_path);
    json out{{"command", "index-build"}, {"graph", graph_stats(g)}, {"index", index_path},
             {"mode", to_string(store.mode)}, {"root", g.label(store.root)}, {"samples", store.sample_count()},
             {"seed", store.seed}, {"kappa", current_estimate(store)},
             {"timings", {{"build_seconds", build_seconds}, {"total_seconds", seconds_since(start)}}}};
    emit(out);
    std::cerr << "index with " << store.sample_count() << " trees written to " << index_path << '\n';
    return kExitOk;
}

int cmd_update_replay(const std::string& path, const std::string& index_path, const std::string& updates_path,
                      const std::string& mode, bool lcc, std::size_t threads, const std::string& tau0,
                      const std::string& out_index, bool refresh) {
    auto loaded = load_graph(path, lcc);
    Graph g = loaded.graph;
    auto store = read_index_file(index_path, g);
    std::ifstream in(updates_path);
    if (!in) throw InputError("cannot open " + updates_path);
    auto events = parse_update_stream(in, g);

    UpdateOptions options;
    options.threads = thread_count(threads);
    options.refresh_retained = refresh;
    if (mode != "rebuild") {
        auto wanted = mode == "ism" ? MaintenanceMode::Ism : MaintenanceMode::Bsm;
        if (wanted != store.mode && !uniform_weights(store))
            throw InvalidArgumentError("index carries importance weights; it cannot be replayed in bsm mode");
        store.mode = wanted;
    }
    EstimateConfig rebuild;
    rebuild.sample_count = store.sample_count();
    rebuild.seed = store.seed;
    rebuild.root_policy = RootPolicy::Explicit;
    rebuild.root = store.root;
    rebuild.reference = tau0 == "dfs" ? ReferenceTree::Dfs : tau0 == "wilson" ? ReferenceTree::Wilson : ReferenceTree::Bfs;
    rebuild.threads = options.threads;

    double total_latency = 0.0;
    for (std::size_t step = 0; step < events.size(); ++step) {
        const auto& ev = events[step];
        json out{{"command", "update-replay"},
                 {"step", step},
                 {"op", ev.op == UpdateOp::Insert ? "I" : "D"},
                 {"u", g.label(ev.u)},
                 {"v", g.label(ev.v)},
                 {"mode", mode}};
        double latency = 0.0;
        if (mode == "rebuild") {
            auto start = std::chrono::steady_clock::now();
            g = ev.op == UpdateOp::Insert ? insert_edge(g, ev.u, ev.v) : delete_edge(g, ev.u, ev.v);
            auto result = estimate_kemeny(g, rebuild);
            latency = seconds_since(start);
            out["kappa"] = result.kappa;
            out["touched"] = result.sample_count;
            out["wilson_draws"] = result.sample_count;
            out["walk_steps"] = result.walk_steps;
        } else {
            auto report = apply_update(store, g, ev, options);
            latency = report.seconds;
            out["kappa"] = report.kappa;
            out["touched"] = report.touched;
            out["wilson_draws"] = report.wilson_draws;
            out["walk_steps"] = report.walk_steps;
            if (!std::isnan(report.resistance)) out["resistance"] = report.resistance;
            out["tau0_repaired"] = report.tau0_repaired;
            out["ess"] = report.effective_sample_size;
            if (store.mode == MaintenanceMode::Ism && report.effective_sample_size < 0.5)
                std::cerr << "warning: effective sample size " << report.effective_sample_size
                          << " after step " << step << "; consider rebuilding the index\n";
        }
        out["graph"] = graph_stats(g);
        out["timings"] = {{"update_seconds", latency}};
        total_latency += latency;
        emit(out);
    }
    if (!out_index.empty() && mode != "rebuild") write_index_file(store, out_index);
    std::cerr << events.size() << " updates replayed in " << mode << " mode, mean latency "
              << (events.empty() ? 0.0 : total_latency / static_cast<double>(events.size())) << " s\n";
    return kExitOk;
}

int cmd_gen_updates(const std::string& path, bool lcc, std::size_t count, double insert_frac, std::uint64_t seed,
                    const std::string& out_path) {
    auto loaded = load_graph(path, lcc);
    auto events = generate_updates(loaded.graph, count, insert_frac, seed);
    std::ofstream out(out_path);
    if (!out) throw InputError("cannot open " + out_path + " for writing");
    out << "# " << count << " updates, insert fraction " << insert_frac << ", seed " << seed << '\n';
    write_update_stream(events, loaded.graph, out);
    std::size_t inserts = 0;
    for (const auto& ev : events) inserts += ev.op == UpdateOp::Insert;
    emit(json{{"command", "gen-updates"}, {"graph", graph_stats(loaded.graph)}, {"out", out_path},
              {"count", events.size()}, {"insertions", inserts}, {"deletions", events.size() - inserts},
              {"seed", seed}});
    return kExitOk;
}

/// Random connected graph on n nodes: a random tree plus extra edges.
Graph random_connected(std::size_t n, Rng& rng) {
    std::vector<Edge> edges;
    for (NodeId v = 1; v < n; ++v) edges.push_back(make_edge(v, static_cast<NodeId>(uniform_below(rng, v))));
    for (NodeId u = 0; u < n; ++u)
        for (NodeId v = u + 1; v < n; ++v)
            if (uniform_unit(rng) < 0.35) edges.push_back({u, v});
    return Graph::from_edges(n, edges);
}

int cmd_oracle_check(std::size_t max_n, std::size_t per_size, std::uint64_t seed) {
    auto rng = stream_rng(seed, 0);
    std::size_t checks = 0, failures = 0;
    auto record = [&](bool ok, const std::string& what, const Graph& g) {
        ++checks;
        if (ok) return;
        ++failures;
        emit(json{{"command", "oracle-check"}, {"failed", what}, {"graph", graph_stats(g)}});
    };
    for (std::size_t n = 2; n <= max_n; ++n) {
        for (std::size_t k = 0; k < per_size; ++k) {
            Graph g = random_connected(n, rng);
            const double kappa = kemeny_eigen(g);
            const NodeId r = max_degree_node(g);
            record(std::fabs(kemeny_forest_formula(g, r) - kappa) <= 1e-8 * std::max(1.0, kappa), "forest formula", g);

            auto tau0 = bfs_tree(g, r);
            compute_dfn(tau0);
            auto trees = enumerate_spanning_trees(g, r);
            FenwickTree<std::int64_t> fw(n);
            Int128 sum = 0;
            bool agree = true;
            for (auto& t : trees) {
                prepare_tree(t, g);
                Int128 a = f_naive(t, tau0, g), b = f_optimized(t, tau0, g, fw);
                agree = agree && a == b;
                sum += a;
            }
            record(agree, "f_naive == f_optimized", g);
            const double mean = static_cast<double>(static_cast<long double>(sum) /
                                                    (static_cast<long double>(trees.size()) * g.volume()));
            record(std::fabs(mean - kappa) <= 1e-8 * std::max(1.0, kappa), "mean f / 2m == kappa", g);

            bool mapping_ok = true;
            for (NodeId u = 0; u < n && mapping_ok; ++u) {
                if (u == r) continue;
                std::vector<NodeId> path;
                for (NodeId x = u; x != kNoNode; x = tau0.parent(x)) path.push_back(x);
                std::vector<TwoForest> forward, reverse;
                for (const auto& t : trees) {
                    auto pm = path_mapping_sets(g, t, path);
                    forward.insert(forward.end(), pm.forward.begin(), pm.forward.end());
                    reverse.insert(reverse.end(), pm.reverse.begin(), pm.reverse.end());
                }
                std::sort(forward.begin(), forward.end());
                std::sort(reverse.begin(), reverse.end());
                // forward minus reverse as multisets must equal F_{r|u} exactly
                std::vector<TwoForest> diff;
                std::set_difference(forward.begin(), forward.end(), reverse.begin(), reverse.end(),
                                    std::back_inserter(diff));
                std::vector<TwoForest> leftover;
                std::set_difference(reverse.begin(), reverse.end(), forward.begin(), forward.end(),
                                    std::back_inserter(leftover));
                auto expected = enumerate_two_forests(g, r, u);
                std::sort(expected.begin(), expected.end());
                mapping_ok = leftover.empty() && diff == expected;
            }
            record(mapping_ok, "path mapping identity", g);
        }
    }
    json out{{"command", "oracle-check"}, {"max_n", max_n}, {"graphs_per_size", per_size}, {"seed", seed},
             {"checks", checks}, {"failures", failures}, {"passed", failures == 0}};
    emit(out);
    std::cerr << (failures == 0 ? "all " : "") << checks << " checks, " << failures << " failures\n";
    return failures == 0 ? kExitOk : kExitFailure;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Kemeny constant estimation and maintenance by sampled spanning trees"};
    app.require_subcommand(1);

    std::string graph_path, index_path, updates_path, out_path, trace_path, mode = "bsm", replay_mode = "bsm";
    std::string replay_tau0 = "bfs", out_index;
    bool lcc = false, refresh = false;
    std::optional<double> reference;
    EstimatorFlags est_flags, index_flags;
    std::size_t replay_threads = 0, count = 100, max_n = 6, per_size = 5;
    double insert_frac = 0.5;
    std::uint64_t gen_seed = 0, oracle_seed = 0;

    auto* exact = app.add_subcommand("exact", "exact Kemeny constant by dense eigensolve");
    exact->add_option("graph", graph_path, "edge list (.txt or .edges)")->required();
    exact->add_flag("--lcc", lcc, "restrict to the largest connected component");

    auto* estimate = app.add_subcommand("estimate", "sampled spanning tree estimate");
    estimate->add_option("graph", graph_path, "edge list (.txt or .edges)")->required();
    estimate->add_flag("--lcc", lcc, "restrict to the largest connected component");
    estimate->add_option("--trace", trace_path, "write per-sample f and walk steps as JSON lines");
    estimate->add_option("--reference", reference, "known kappa for reporting relative error");
    est_flags.attach(estimate);

    auto* index = app.add_subcommand("index", "sample index lifecycle");
    index->require_subcommand(1);
    auto* build = index->add_subcommand("build", "sample trees and write an index file");
    build->add_option("graph", graph_path, "edge list (.txt or .edges)")->required();
    build->add_option("index", index_path, "output index file")->required();
    build->add_flag("--lcc", lcc, "restrict to the largest connected component");
    build->add_option("--mode", mode, "maintenance mode")->check(CLI::IsMember({"bsm", "ism"}))->capture_default_str();
    index_flags.attach(build);

    auto* replay = app.add_subcommand("update-replay", "apply an update stream to an index");
    replay->add_option("graph", graph_path, "edge list the index was built on")->required();
    replay->add_option("index", index_path, "index file")->required();
    replay->add_option("updates", updates_path, "update stream ('I u v' / 'D u v')")->required();
    replay->add_option("--mode", replay_mode, "maintenance strategy")
        ->check(CLI::IsMember({"bsm", "ism", "rebuild"}))
        ->capture_default_str();
    replay->add_flag("--lcc", lcc, "restrict to the largest connected component");
    replay->add_option("--threads", replay_threads, "worker threads (0 = all cores; KF_THREADS overrides)");
    replay->add_option("--tau0", replay_tau0, "reference tree for --mode rebuild")
        ->check(CLI::IsMember({"bfs", "dfs", "wilson"}));
    replay->add_option("--out", out_index, "write the updated index here");
    replay->add_flag("--refresh-retained", refresh, "recompute f of retained samples after each update");

    auto* gen = app.add_subcommand("gen-updates", "generate a degree-product weighted update stream");
    gen->add_option("graph", graph_path, "edge list (.txt or .edges)")->required();
    gen->add_option("out", out_path, "output update stream")->required();
    gen->add_option("--count", count, "number of updates")->capture_default_str();
    gen->add_option("--insert-frac", insert_frac, "probability that an update is an insertion")->capture_default_str();
    gen->add_option("--seed", gen_seed, "RNG seed")->capture_default_str();
    gen->add_flag("--lcc", lcc, "restrict to the largest connected component");

    auto* oracle = app.add_subcommand("oracle-check", "exact identity checks on small random graphs");
    oracle->add_option("--max-n", max_n, "largest graph size")->capture_default_str()->check(CLI::Range(2, 8));
    oracle->add_option("--graphs-per-size", per_size, "graphs per size")->capture_default_str();
    oracle->add_option("--seed", oracle_seed, "RNG seed")->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitInput;
    }

    try {
        if (*exact) return cmd_exact(graph_path, lcc);
        if (*estimate) return cmd_estimate(graph_path, lcc, est_flags, trace_path, reference);
        if (*build) return cmd_index_build(graph_path, index_path, lcc, index_flags, mode);
        if (*replay)
            return cmd_update_replay(graph_path, index_path, updates_path, replay_mode, lcc, replay_threads,
                                     replay_tau0, out_index, refresh);
        if (*gen) return cmd_gen_updates(graph_path, lcc, count, insert_frac, gen_seed, out_path);
        if (*oracle) return cmd_oracle_check(max_n, per_size, oracle_seed);
    } catch (const CorruptIndexError& e) {
        std::cerr << "error: corrupt index: " << e.what() << '\n';
        return kExitCorruptIndex;
    } catch (const CapacityError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitCapacity;
    } catch (const ConvergenceError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitConvergence;
    } catch (const InputError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitInput;
    }
    return kExitFailure;
}
