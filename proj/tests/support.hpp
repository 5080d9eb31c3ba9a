#pragma once

// Shared oracles and generators for the test suites. Everything here is
// computed independently of the estimator code paths it is used to check.

#include <boost/math/distributions/chi_squared.hpp>

#include <sys/wait.h>

#include <algorithm>
#include <array>
#include <bit>
#include <cstdio>
#include <fstream>
#include <map>
#include <numeric>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "kemeny/kemeny.hpp"

namespace support {

using namespace kemeny;

inline Graph graph_of(std::size_t n, std::initializer_list<std::pair<NodeId, NodeId>> edges) {
    std::vector<Edge> list;
    for (auto [u, v] : edges) list.push_back(make_edge(u, v));
    return Graph::from_edges(n, list);
}

inline Graph parse_text(const std::string& text) {
    std::istringstream in(text);
    return parse_edge_list(in).graph;
}

/// Graph on n nodes from a bitmask over the pairs (0,1), (0,2), ..., (n-2,n-1).
inline Graph graph_from_mask(std::size_t n, std::uint32_t mask) {
    std::vector<Edge> edges;
    std::size_t bit = 0;
    for (NodeId u = 0; u < n; ++u)
        for (NodeId v = u + 1; v < n; ++v, ++bit)
            if (mask >> bit & 1u) edges.push_back({u, v});
    return Graph::from_edges(n, edges);
}

/// One representative of every isomorphism class of connected graphs on n
/// nodes (2 <= n <= 6), found by minimising the edge bitmask over all node
/// permutations.
inline std::vector<Graph> connected_graphs_up_to_isomorphism(std::size_t n) {
    const std::size_t pairs = n * (n - 1) / 2;
    std::vector<std::vector<std::size_t>> index(n, std::vector<std::size_t>(n, 0));
    std::size_t bit = 0;
    for (std::size_t u = 0; u < n; ++u)
        for (std::size_t v = u + 1; v < n; ++v, ++bit) index[u][v] = index[v][u] = bit;

    // bit images of every permutation
    std::vector<std::vector<std::size_t>> images;
    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    do {
        std::vector<std::size_t> img(pairs);
        std::size_t b = 0;
        for (std::size_t u = 0; u < n; ++u)
            for (std::size_t v = u + 1; v < n; ++v, ++b) img[b] = index[perm[u]][perm[v]];
        images.push_back(std::move(img));
    } while (std::next_permutation(perm.begin(), perm.end()));

    std::set<std::uint32_t> seen;
    std::vector<Graph> out;
    for (std::uint32_t mask = 0; mask < (1u << pairs); ++mask) {
        if (static_cast<std::size_t>(std::popcount(mask)) < n - 1) continue;
        std::uint32_t best = mask;
        for (const auto& img : images) {
            std::uint32_t m2 = 0;
            for (std::size_t b2 = 0; b2 < pairs; ++b2)
                if (mask >> b2 & 1u) m2 |= 1u << img[b2];
            best = std::min(best, m2);
        }
        if (best != mask || seen.count(best)) continue;
        Graph g = graph_from_mask(n, mask);
        if (!is_connected(g)) continue;
        seen.insert(best);
        out.push_back(std::move(g));
    }
    return out;
}

/// Random connected graph: random recursive tree plus each other pair with
/// probability p.
inline Graph random_connected_graph(std::size_t n, Rng& rng, double p = 0.4) {
    std::vector<Edge> edges;
    for (NodeId v = 1; v < n; ++v) edges.push_back(make_edge(v, static_cast<NodeId>(uniform_below(rng, v))));
    for (NodeId u = 0; u < n; ++u)
        for (NodeId v = u + 1; v < n; ++v)
            if (uniform_unit(rng) < p) edges.push_back({u, v});
    return Graph::from_edges(n, edges);
}

/// Every connected graph on 2..5 nodes up to isomorphism plus `random_six`
/// random connected graphs on 6 nodes.
inline std::vector<Graph> small_graph_family(std::size_t random_six = 100, std::uint64_t seed = 2024) {
    std::vector<Graph> family;
    for (std::size_t n = 2; n <= 5; ++n)
        for (auto& g : connected_graphs_up_to_isomorphism(n)) family.push_back(std::move(g));
    auto rng = stream_rng(seed, 6);
    for (std::size_t i = 0; i < random_six; ++i) family.push_back(random_connected_graph(6, rng));
    return family;
}

/// Upper-tail p-value of Pearson's statistic for observed counts against
/// expected probabilities.
inline double chi_square_p_value(const std::vector<std::uint64_t>& observed, const std::vector<double>& probs) {
    const double total = static_cast<double>(std::accumulate(observed.begin(), observed.end(), std::uint64_t{0}));
    double stat = 0.0;
    for (std::size_t i = 0; i < observed.size(); ++i) {
        const double expect = total * probs[i];
        const double diff = static_cast<double>(observed[i]) - expect;
        stat += diff * diff / expect;
    }
    boost::math::chi_squared_distribution<double> dist(static_cast<double>(observed.size() - 1));
    return boost::math::cdf(boost::math::complement(dist, stat));
}

/// f(tau) straight from the path-mapping sets: for each u, forward 2-forest
/// volumes minus reverse ones along tau0's u -> r path, weighted by d(u).
inline Int128 f_by_path_mapping(const Graph& g, const RootedTree& tau, const RootedTree& tau0) {
    Int128 f = 0;
    for (NodeId u = 0; u < g.node_count(); ++u) {
        if (u == tau0.root()) continue;
        std::vector<NodeId> path;
        for (NodeId x = u; x != kNoNode; x = tau0.parent(x)) path.push_back(x);
        auto pm = path_mapping_sets(g, tau, path);
        std::int64_t acc = 0;
        for (const auto& fw : pm.forward) acc += fw.vol_t1(g);
        for (const auto& rv : pm.reverse) acc -= rv.vol_t1(g);
        f += static_cast<Int128>(g.degree(u)) * acc;
    }
    return f;
}

/// Exact (1 / |Gamma|) sum f(tau) / 2m over all spanning trees.
inline double exhaustive_mean_kappa(const Graph& g, const RootedTree& tau0) {
    auto trees = enumerate_spanning_trees(g, tau0.root());
    FenwickTree<std::int64_t> fw(g.node_count());
    Int128 sum = 0;
    for (auto& t : trees) {
        prepare_tree(t, g);
        sum += f_optimized(t, tau0, g, fw);
    }
    return static_cast<double>(static_cast<long double>(sum) /
                               (static_cast<long double>(trees.size()) * static_cast<long double>(g.volume())));
}

inline RootedTree prepared(RootedTree t, const Graph& g) {
    prepare_tree(t, g);
    return t;
}

struct CliRun {
    int exit_code = -1;
    std::string out;
};

/// Runs the CLI binary with `args` (already shell-quoted) and captures stdout.
inline CliRun run_cli(const std::string& args) {
    const std::string cmd = std::string(KEMENY_CLI_PATH) + " " + args + " 2>/dev/null";
    CliRun run;
    FILE* pipe = popen(cmd.c_str(), "r");
    if (!pipe) return run;
    std::array<char, 4096> buf{};
    std::size_t got;
    while ((got = fread(buf.data(), 1, buf.size(), pipe)) > 0) run.out.append(buf.data(), got);
    int status = pclose(pipe);
    run.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return run;
}

inline std::string temp_path(const std::string& name) {
    return std::string(KEMENY_TEST_TMPDIR) + "/" + name;
}

inline void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path);
    out << text;
}

inline void write_graph(const std::string& path, const Graph& g) {
    std::ofstream out(path);
    write_edge_list(g, out);
}

/// Spanning trees of g containing (a, b), rooted at r.
inline std::vector<RootedTree> trees_with_edge(const Graph& g, NodeId a, NodeId b, NodeId r) {
    std::vector<RootedTree> out;
    for (auto& t : enumerate_spanning_trees(g, r))
        if (t.contains_edge(a, b)) out.push_back(std::move(t));
    return out;
}

/// Index of each tree by its sorted edge list.
inline std::map<std::vector<Edge>, std::size_t> tree_index(const std::vector<RootedTree>& trees) {
    std::map<std::vector<Edge>, std::size_t> idx;
    for (std::size_t i = 0; i < trees.size(); ++i) idx[trees[i].edges()] = i;
    return idx;
}

}  // namespace support
