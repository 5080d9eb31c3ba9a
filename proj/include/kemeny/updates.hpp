#pragma once

// Update streams: text lines "I u v" / "D u v" over original node labels, and
// a generator drawing edges with probability proportional to d(u) d(v).

#include <algorithm>
#include <cstdint>
#include <optional>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "kemeny/dynamic.hpp"
#include "kemeny/error.hpp"
#include "kemeny/graph.hpp"
#include "kemeny/rng.hpp"

namespace kemeny {

/// Parses an update stream against g's labels. Lines starting with '#' and
/// blank lines are skipped.
inline std::vector<UpdateEvent> parse_update_stream(std::istream& in, const Graph& g) {
    std::vector<UpdateEvent> events;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        std::istringstream fields(line);
        std::string op;
        if (!(fields >> op) || op.front() == '#') continue;
        std::string a, b, extra;
        if (!(fields >> a >> b) || (fields >> extra)) throw ParseError(line_no, "expected 'I u v' or 'D u v'");
        UpdateEvent ev;
        if (op == "I" || op == "i") {
            ev.op = UpdateOp::Insert;
        } else if (op == "D" || op == "d") {
            ev.op = UpdateOp::Delete;
        } else {
            throw ParseError(line_no, "unknown update op '" + op + "'");
        }
        auto resolve = [&](const std::string& token) {
            auto id = g.find_label(detail::parse_id(token, line_no));
            if (!id) throw InvalidEdgeError("line " + std::to_string(line_no) + ": unknown node " + token);
            return *id;
        };
        ev.u = resolve(a);
        ev.v = resolve(b);
        if (ev.u == ev.v) throw InvalidEdgeError("line " + std::to_string(line_no) + ": self-loop");
        events.push_back(ev);
    }
    return events;
}

inline void write_update_stream(const std::vector<UpdateEvent>& events, const Graph& g, std::ostream& out) {
    for (const auto& ev : events)
        out << (ev.op == UpdateOp::Insert ? 'I' : 'D') << ' ' << g.label(ev.u) << ' ' << g.label(ev.v) << '\n';
}

namespace detail {

/// Node drawn with probability d(v) / 2m: the owner of a uniform adjacency slot.
inline NodeId degree_weighted_node(const Graph& g, Rng& rng) {
    auto slot = uniform_below(rng, static_cast<std::uint64_t>(g.volume()));
    NodeId lo = 0, hi = static_cast<NodeId>(g.node_count());
    while (hi - lo > 1) {
        NodeId mid = lo + (hi - lo) / 2;
        if (g.degree_prefix(mid) <= slot) lo = mid; else hi = mid;
    }
    return lo;
}

template <typename Weight>
std::size_t pick_weighted(const std::vector<Weight>& cumulative, Rng& rng) {
    auto x = uniform_below(rng, cumulative.back());
    return static_cast<std::size_t>(std::upper_bound(cumulative.begin(), cumulative.end(), x) - cumulative.begin());
}

inline std::optional<Edge> draw_insertion(const Graph& g, Rng& rng) {
    const std::uint64_t n = g.node_count();
    const std::uint64_t pairs = n * (n - 1) / 2;
    if (g.edge_count() == pairs) return std::nullopt;
    if (2 * g.edge_count() < pairs) {
        // sparse: rejection keeps P(u, v) proportional to d(u) d(v) over non-edges
        for (;;) {
            NodeId a = degree_weighted_node(g, rng);
            NodeId b = degree_weighted_node(g, rng);
            if (a != b && !g.has_edge(a, b)) return make_edge(a, b);
        }
    }
    std::vector<Edge> candidates;
    std::vector<std::uint64_t> cumulative;
    std::uint64_t total = 0;
    for (NodeId a = 0; a < n; ++a)
        for (NodeId b = a + 1; b < n; ++b)
            if (!g.has_edge(a, b)) {
                candidates.push_back({a, b});
                total += static_cast<std::uint64_t>(g.degree(a)) * g.degree(b);
                cumulative.push_back(total);
            }
    return candidates[pick_weighted(cumulative, rng)];
}

inline std::optional<Edge> draw_deletion(const Graph& g, Rng& rng) {
    auto bridges = find_bridges(g);
    std::vector<Edge> candidates;
    std::vector<std::uint64_t> cumulative;
    std::uint64_t total = 0;
    for (const auto& e : g.edges()) {
        if (std::binary_search(bridges.begin(), bridges.end(), e)) continue;
        candidates.push_back(e);
        total += static_cast<std::uint64_t>(g.degree(e.u)) * g.degree(e.v);
        cumulative.push_back(total);
    }
    if (candidates.empty()) return std::nullopt;
    return candidates[pick_weighted(cumulative, rng)];
}

}  // namespace detail

/// Generates `count` updates applied in sequence to a copy of g. Each event is
/// an insertion with probability insert_fraction; insertions pick a non-edge
/// and deletions a non-bridge edge, both with weight d(u) d(v) on the evolving
/// graph. Falls back to the other kind when one has no candidate.
inline std::vector<UpdateEvent> generate_updates(const Graph& g, std::size_t count, double insert_fraction,
                                                 std::uint64_t seed) {
    if (!(insert_fraction >= 0.0 && insert_fraction <= 1.0))
        throw InvalidArgumentError("insert fraction must lie in [0, 1]");
    auto rng = stream_rng(seed, 0);
    Graph current = g;
    std::vector<UpdateEvent> events;
    events.reserve(count);
    for (std::size_t i = 0; i < count; ++i) {
        const bool want_insert = insert_fraction >= 1.0 || uniform_unit(rng) < insert_fraction;
        std::optional<Edge> e = want_insert ? detail::draw_insertion(current, rng) : detail::draw_deletion(current, rng);
        bool insert = want_insert;
        if (!e) {
            insert = !want_insert;
            e = insert ? detail::draw_insertion(current, rng) : detail::draw_deletion(current, rng);
        }
        if (!e) throw InvalidArgumentError("graph admits neither insertions nor deletions");
        events.push_back({insert ? UpdateOp::Insert : UpdateOp::Delete, e->u, e->v});
        current = insert ? insert_edge(current, e->u, e->v) : delete_edge(current, e->u, e->v);
    }
    return events;
}

}  // namespace kemeny
