#pragma once

#include <algorithm>
#include <charconv>
#include <cstdint>
#include <istream>
#include <limits>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "kemeny/error.hpp"

namespace kemeny {

using NodeId = std::uint32_t;
inline constexpr NodeId kNoNode = std::numeric_limits<NodeId>::max();

/// Undirected edge stored with u < v.
struct Edge {
    NodeId u = 0;
    NodeId v = 0;

    friend bool operator==(const Edge&, const Edge&) = default;
    friend auto operator<=>(const Edge&, const Edge&) = default;
};

inline Edge make_edge(NodeId a, NodeId b) {
    if (a == b) throw InvalidEdgeError("self-loop on node " + std::to_string(a));
    return a < b ? Edge{a, b} : Edge{b, a};
}

/// Immutable simple undirected graph in compressed adjacency form. Neighbor
/// lists are sorted; node ids are contiguous in [0, n). Each node carries the
/// label it had in the input file so output can report original ids.
class Graph {
public:
    Graph() = default;

    /// Builds a graph over n nodes. Duplicate edges collapse; self-loops throw.
    static Graph from_edges(std::size_t n, std::span<const Edge> edges,
                            std::vector<std::uint64_t> labels = {}) {
        Graph g;
        if (labels.empty()) {
            labels.resize(n);
            for (std::size_t i = 0; i < n; ++i) labels[i] = i;
        }
        if (labels.size() != n) throw InvalidArgumentError("label table size does not match node count");
        g.labels_ = std::move(labels);

        std::vector<Edge> sorted(edges.begin(), edges.end());
        for (auto& e : sorted) {
            if (e.u >= n || e.v >= n) throw InvalidEdgeError("edge endpoint out of range");
            e = make_edge(e.u, e.v);
        }
        std::sort(sorted.begin(), sorted.end());
        sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());

        g.offsets_.assign(n + 1, 0);
        for (const auto& e : sorted) {
            ++g.offsets_[e.u + 1];
            ++g.offsets_[e.v + 1];
        }
        for (std::size_t i = 0; i < n; ++i) g.offsets_[i + 1] += g.offsets_[i];
        g.neighbors_.resize(2 * sorted.size());
        std::vector<std::size_t> cursor(g.offsets_.begin(), g.offsets_.end() - 1);
        for (const auto& e : sorted) {
            g.neighbors_[cursor[e.u]++] = e.v;
            g.neighbors_[cursor[e.v]++] = e.u;
        }
        for (std::size_t v = 0; v < n; ++v)
            std::sort(g.neighbors_.begin() + static_cast<std::ptrdiff_t>(g.offsets_[v]),
                      g.neighbors_.begin() + static_cast<std::ptrdiff_t>(g.offsets_[v + 1]));
        g.edge_count_ = sorted.size();
        return g;
    }

    /// Copy with edge (a, b) added or removed in O(n + m); adjacency stays
    /// sorted. The caller guarantees the edge is absent (add) or present.
    Graph with_edge_toggled(NodeId a, NodeId b, bool add) const {
        Graph g;
        g.labels_ = labels_;
        g.edge_count_ = add ? edge_count_ + 1 : edge_count_ - 1;
        g.offsets_.assign(node_count() + 1, 0);
        g.neighbors_.reserve(2 * g.edge_count_);
        for (NodeId x = 0; x < node_count(); ++x) {
            const bool endpoint = x == a || x == b;
            const NodeId other = x == a ? b : a;
            bool pending = add && endpoint;
            for (NodeId y : neighbors(x)) {
                if (pending && other < y) {
                    g.neighbors_.push_back(other);
                    pending = false;
                }
                if (!add && endpoint && y == other) continue;
                g.neighbors_.push_back(y);
            }
            if (pending) g.neighbors_.push_back(other);
            g.offsets_[x + 1] = g.neighbors_.size();
        }
        return g;
    }

    std::size_t node_count() const noexcept { return labels_.size(); }
    std::size_t edge_count() const noexcept { return edge_count_; }
    /// 2m, the total volume.
    std::int64_t volume() const noexcept { return 2 * static_cast<std::int64_t>(edge_count_); }

    std::size_t degree(NodeId v) const { return offsets_[v + 1] - offsets_[v]; }
    /// Sum of degrees of nodes below v.
    std::size_t degree_prefix(NodeId v) const { return offsets_[v]; }

    std::span<const NodeId> neighbors(NodeId v) const {
        return {neighbors_.data() + offsets_[v], offsets_[v + 1] - offsets_[v]};
    }

    bool has_edge(NodeId a, NodeId b) const {
        if (a >= node_count() || b >= node_count() || a == b) return false;
        if (degree(a) > degree(b)) std::swap(a, b);
        auto nb = neighbors(a);
        return std::binary_search(nb.begin(), nb.end(), b);
    }

    std::uint64_t label(NodeId v) const { return labels_[v]; }
    const std::vector<std::uint64_t>& labels() const noexcept { return labels_; }

    std::optional<NodeId> find_label(std::uint64_t label) const {
        // labels are sorted whenever the graph came from the parser
        auto it = std::lower_bound(labels_.begin(), labels_.end(), label);
        if (it != labels_.end() && *it == label) return static_cast<NodeId>(it - labels_.begin());
        for (std::size_t i = 0; i < labels_.size(); ++i)
            if (labels_[i] == label) return static_cast<NodeId>(i);
        return std::nullopt;
    }

    /// Canonical (u < v) edges in lexicographic order.
    std::vector<Edge> edges() const {
        std::vector<Edge> out;
        out.reserve(edge_count_);
        for (NodeId u = 0; u < node_count(); ++u)
            for (NodeId v : neighbors(u))
                if (u < v) out.push_back({u, v});
        return out;
    }

    friend bool operator==(const Graph&, const Graph&) = default;

private:
    std::vector<std::size_t> offsets_{0};
    std::vector<NodeId> neighbors_;
    std::vector<std::uint64_t> labels_;
    std::size_t edge_count_ = 0;
};

struct ParsedGraph {
    Graph graph;
    std::size_t self_loops_dropped = 0;
    std::size_t duplicates_dropped = 0;
};

namespace detail {

inline std::uint64_t parse_id(std::string_view token, std::size_t line) {
    std::uint64_t value = 0;
    auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
    if (ec != std::errc{} || ptr != token.data() + token.size())
        throw ParseError(line, "malformed node id '" + std::string(token) + "'");
    return value;
}

}  // namespace detail

/// Reads a whitespace separated edge list. Lines starting with '#' or '%' are
/// comments. Original ids are remapped to [0, n) in ascending order.
inline ParsedGraph parse_edge_list(std::istream& in) {
    std::vector<std::pair<std::uint64_t, std::uint64_t>> raw;
    ParsedGraph result;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        std::string_view rest(line);
        std::vector<std::string_view> tokens;
        while (!rest.empty()) {
            auto start = rest.find_first_not_of(" \t\r");
            if (start == std::string_view::npos) break;
            rest.remove_prefix(start);
            auto end = rest.find_first_of(" \t\r");
            tokens.push_back(rest.substr(0, end));
            rest.remove_prefix(end == std::string_view::npos ? rest.size() : end);
        }
        if (tokens.empty()) continue;
        if (tokens[0].front() == '#' || tokens[0].front() == '%') continue;
        if (tokens.size() != 2) throw ParseError(line_no, "expected two node ids");
        auto a = detail::parse_id(tokens[0], line_no);
        auto b = detail::parse_id(tokens[1], line_no);
        if (a == b) {
            ++result.self_loops_dropped;
            continue;
        }
        raw.emplace_back(std::min(a, b), std::max(a, b));
    }

    std::vector<std::uint64_t> labels;
    labels.reserve(raw.size() * 2);
    for (auto [a, b] : raw) {
        labels.push_back(a);
        labels.push_back(b);
    }
    std::sort(labels.begin(), labels.end());
    labels.erase(std::unique(labels.begin(), labels.end()), labels.end());
    if (labels.empty()) throw EmptyGraphError("edge list contains no edges");

    auto index_of = [&](std::uint64_t id) {
        return static_cast<NodeId>(std::lower_bound(labels.begin(), labels.end(), id) - labels.begin());
    };
    std::vector<Edge> edges;
    edges.reserve(raw.size());
    for (auto [a, b] : raw) edges.push_back(make_edge(index_of(a), index_of(b)));
    std::size_t n = labels.size();
    result.graph = Graph::from_edges(n, edges, std::move(labels));
    result.duplicates_dropped = raw.size() - result.graph.edge_count();
    return result;
}

/// Writes one "u v" line per edge using the original labels.
inline void write_edge_list(const Graph& g, std::ostream& out) {
    for (const auto& e : g.edges()) out << g.label(e.u) << ' ' << g.label(e.v) << '\n';
}

/// BFS distances from `source`; unreachable nodes get -1.
inline std::vector<std::int64_t> bfs_distances(const Graph& g, NodeId source) {
    std::vector<std::int64_t> dist(g.node_count(), -1);
    std::vector<NodeId> queue;
    queue.reserve(g.node_count());
    dist[source] = 0;
    queue.push_back(source);
    for (std::size_t head = 0; head < queue.size(); ++head) {
        NodeId v = queue[head];
        for (NodeId w : g.neighbors(v)) {
            if (dist[w] < 0) {
                dist[w] = dist[v] + 1;
                queue.push_back(w);
            }
        }
    }
    return dist;
}

inline bool is_connected(const Graph& g) {
    if (g.node_count() == 0) return false;
    auto dist = bfs_distances(g, 0);
    return std::none_of(dist.begin(), dist.end(), [](auto d) { return d < 0; });
}

/// Maximum BFS depth from r.
inline std::size_t eccentricity_from(const Graph& g, NodeId r) {
    if (r >= g.node_count()) throw InvalidArgumentError("root out of range");
    auto dist = bfs_distances(g, r);
    std::int64_t best = 0;
    for (auto d : dist) {
        if (d < 0) throw ConnectivityError("graph is not connected");
        best = std::max(best, d);
    }
    return static_cast<std::size_t>(best);
}

struct ComponentExtraction {
    Graph graph;
    /// old id -> new id, kNoNode for nodes outside the component
    std::vector<NodeId> old_to_new;
};

/// Largest connected component; ties go to the component holding the smallest
/// original id. New ids preserve the relative order of old ids.
inline ComponentExtraction largest_connected_component(const Graph& g) {
    const std::size_t n = g.node_count();
    std::vector<NodeId> comp(n, kNoNode);
    NodeId best = kNoNode;
    std::size_t best_size = 0;
    std::uint64_t best_min_label = 0;
    NodeId next = 0;
    std::vector<NodeId> stack;
    for (NodeId s = 0; s < n; ++s) {
        if (comp[s] != kNoNode) continue;
        std::size_t size = 0;
        std::uint64_t min_label = g.label(s);
        comp[s] = next;
        stack.push_back(s);
        while (!stack.empty()) {
            NodeId v = stack.back();
            stack.pop_back();
            ++size;
            min_label = std::min(min_label, g.label(v));
            for (NodeId w : g.neighbors(v))
                if (comp[w] == kNoNode) {
                    comp[w] = next;
                    stack.push_back(w);
                }
        }
        if (size > best_size || (size == best_size && min_label < best_min_label)) {
            best = next;
            best_size = size;
            best_min_label = min_label;
        }
        ++next;
    }

    ComponentExtraction out;
    out.old_to_new.assign(n, kNoNode);
    std::vector<std::uint64_t> labels;
    for (NodeId v = 0; v < n; ++v)
        if (comp[v] == best) {
            out.old_to_new[v] = static_cast<NodeId>(labels.size());
            labels.push_back(g.label(v));
        }
    std::vector<Edge> edges;
    for (const auto& e : g.edges())
        if (comp[e.u] == best) edges.push_back({out.old_to_new[e.u], out.old_to_new[e.v]});
    const std::size_t kept = labels.size();
    out.graph = Graph::from_edges(kept, edges, std::move(labels));
    return out;
}

inline Graph insert_edge(const Graph& g, NodeId u, NodeId v) {
    if (u == v) throw InvalidEdgeError("self-loop on node " + std::to_string(u));
    if (u >= g.node_count() || v >= g.node_count()) throw InvalidEdgeError("edge endpoint out of range");
    if (g.has_edge(u, v))
        throw DuplicateEdgeError("edge (" + std::to_string(u) + ", " + std::to_string(v) + ") already present");
    return g.with_edge_toggled(u, v, true);
}

/// True if u can still reach v once the edge (u, v) is ignored.
inline bool reachable_without_edge(const Graph& g, NodeId u, NodeId v) {
    std::vector<char> seen(g.node_count(), 0);
    std::vector<NodeId> stack{u};
    seen[u] = 1;
    while (!stack.empty()) {
        NodeId x = stack.back();
        stack.pop_back();
        for (NodeId y : g.neighbors(x)) {
            if ((x == u && y == v) || (x == v && y == u)) continue;
            if (y == v) return true;
            if (!seen[y]) {
                seen[y] = 1;
                stack.push_back(y);
            }
        }
    }
    return false;
}

inline Graph delete_edge(const Graph& g, NodeId u, NodeId v) {
    if (!g.has_edge(u, v))
        throw EdgeNotFoundError("edge (" + std::to_string(u) + ", " + std::to_string(v) + ") not present");
    if (!reachable_without_edge(g, u, v))
        throw BridgeError("deleting (" + std::to_string(u) + ", " + std::to_string(v) +
                          ") disconnects the graph");
    return g.with_edge_toggled(u, v, false);
}

/// Bridges of a connected graph (iterative low-link).
inline std::vector<Edge> find_bridges(const Graph& g) {
    const std::size_t n = g.node_count();
    std::vector<std::int64_t> disc(n, -1), low(n, 0);
    std::vector<NodeId> parent(n, kNoNode);
    std::vector<std::size_t> next_child(n, 0);
    std::vector<Edge> bridges;
    std::int64_t timer = 0;
    for (NodeId s = 0; s < n; ++s) {
        if (disc[s] >= 0) continue;
        std::vector<NodeId> stack{s};
        disc[s] = low[s] = timer++;
        while (!stack.empty()) {
            NodeId v = stack.back();
            auto nb = g.neighbors(v);
            if (next_child[v] < nb.size()) {
                NodeId w = nb[next_child[v]++];
                if (disc[w] < 0) {
                    parent[w] = v;
                    disc[w] = low[w] = timer++;
                    stack.push_back(w);
                } else if (w != parent[v]) {
                    low[v] = std::min(low[v], disc[w]);
                }
            } else {
                stack.pop_back();
                if (parent[v] != kNoNode) {
                    NodeId p = parent[v];
                    low[p] = std::min(low[p], low[v]);
                    if (low[v] > disc[p]) bridges.push_back(make_edge(p, v));
                }
            }
        }
    }
    std::sort(bridges.begin(), bridges.end());
    return bridges;
}

/// Node of maximum degree, smallest id on ties.
inline NodeId max_degree_node(const Graph& g) {
    NodeId best = 0;
    for (NodeId v = 1; v < g.node_count(); ++v)
        if (g.degree(v) > g.degree(best)) best = v;
    return best;
}

}  // namespace kemeny
