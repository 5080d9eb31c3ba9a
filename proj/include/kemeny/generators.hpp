#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "kemeny/error.hpp"
#include "kemeny/graph.hpp"
#include "kemeny/rng.hpp"

namespace kemeny {

inline Graph complete_graph(std::size_t n) {
    std::vector<Edge> edges;
    for (NodeId u = 0; u < n; ++u)
        for (NodeId v = u + 1; v < n; ++v) edges.push_back({u, v});
    return Graph::from_edges(n, edges);
}

inline Graph path_graph(std::size_t n) {
    std::vector<Edge> edges;
    for (NodeId u = 0; u + 1 < n; ++u) edges.push_back({u, u + 1});
    return Graph::from_edges(n, edges);
}

inline Graph cycle_graph(std::size_t n) {
    if (n < 3) throw InvalidArgumentError("a cycle needs at least 3 nodes");
    std::vector<Edge> edges;
    for (NodeId u = 0; u < n; ++u) edges.push_back(make_edge(u, static_cast<NodeId>((u + 1) % n)));
    return Graph::from_edges(n, edges);
}

/// Node 0 joined to nodes 1..n-1.
inline Graph star_graph(std::size_t n) {
    std::vector<Edge> edges;
    for (NodeId v = 1; v < n; ++v) edges.push_back({0, v});
    return Graph::from_edges(n, edges);
}

/// Hub 0 joined to every node of the cycle 1..n-1.
inline Graph wheel_graph(std::size_t n) {
    if (n < 4) throw InvalidArgumentError("a wheel needs at least 4 nodes");
    std::vector<Edge> edges;
    for (NodeId v = 1; v < n; ++v) {
        edges.push_back({0, v});
        edges.push_back(make_edge(v, static_cast<NodeId>(v + 1 < n ? v + 1 : 1)));
    }
    return Graph::from_edges(n, edges);
}

/// G(n, p) by geometric skipping over the n(n-1)/2 candidate pairs, so the
/// cost is proportional to the number of edges drawn.
inline Graph erdos_renyi(std::size_t n, double p, Rng& rng) {
    if (!(p >= 0.0 && p <= 1.0)) throw InvalidArgumentError("edge probability must lie in [0, 1]");
    std::vector<Edge> edges;
    if (p == 0.0 || n < 2) return Graph::from_edges(n, edges);
    if (p == 1.0) return complete_graph(n);
    const double log_q = std::log1p(-p);
    std::int64_t v = 1, w = -1;
    const auto nn = static_cast<std::int64_t>(n);
    while (v < nn) {
        const double r = 1.0 - uniform_unit(rng);  // in (0, 1]
        w += 1 + static_cast<std::int64_t>(std::floor(std::log(r) / log_q));
        while (w >= v && v < nn) {
            w -= v;
            ++v;
        }
        if (v < nn) edges.push_back({static_cast<NodeId>(w), static_cast<NodeId>(v)});
    }
    return Graph::from_edges(n, edges);
}

/// Largest connected component of G(n, p) with ids compacted.
inline Graph erdos_renyi_lcc(std::size_t n, double p, Rng& rng) {
    return largest_connected_component(erdos_renyi(n, p, rng)).graph;
}

}  // namespace kemeny
