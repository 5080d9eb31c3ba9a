#pragma once

#include <algorithm>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "kemeny/error.hpp"
#include "kemeny/graph.hpp"
#include "kemeny/rng.hpp"
#include "kemeny/rooted_tree.hpp"

namespace kemeny {

/// BFS tree from r; neighbors explored in ascending id order.
inline RootedTree bfs_tree(const Graph& g, NodeId r) {
    const std::size_t n = g.node_count();
    std::vector<NodeId> parent(n, kNoNode);
    std::vector<char> seen(n, 0);
    std::vector<NodeId> queue{r};
    queue.reserve(n);
    seen[r] = 1;
    for (std::size_t head = 0; head < queue.size(); ++head) {
        NodeId v = queue[head];
        for (NodeId w : g.neighbors(v))
            if (!seen[w]) {
                seen[w] = 1;
                parent[w] = v;
                queue.push_back(w);
            }
    }
    if (queue.size() != n) throw ConnectivityError("graph is not connected");
    return RootedTree(r, std::move(parent));
}

/// Depth-first search tree from r (ascending neighbor order). Typically much
/// deeper than the BFS tree.
inline RootedTree dfs_tree(const Graph& g, NodeId r) {
    const std::size_t n = g.node_count();
    std::vector<NodeId> parent(n, kNoNode);
    std::vector<char> seen(n, 0);
    std::vector<std::pair<NodeId, std::size_t>> stack{{r, 0}};
    seen[r] = 1;
    std::size_t reached = 1;
    while (!stack.empty()) {
        auto& [v, slot] = stack.back();
        auto nb = g.neighbors(v);
        if (slot < nb.size()) {
            NodeId w = nb[slot++];
            if (!seen[w]) {
                seen[w] = 1;
                parent[w] = v;
                ++reached;
                stack.emplace_back(w, 0);
            }
        } else {
            stack.pop_back();
        }
    }
    if (reached != n) throw ConnectivityError("graph is not connected");
    return RootedTree(r, std::move(parent));
}

struct WilsonResult {
    RootedTree tree;
    /// Total random-walk steps, an empirical draw of Tr(I - P_r)^-1.
    std::uint64_t walk_steps = 0;
};

namespace detail {

// Loop-erased walks from every node not yet absorbed, visited in ascending id
// order. next[] is overwritten on revisits, which erases loops implicitly.
inline std::uint64_t wilson_walks(const Graph& g, std::vector<char>& in_tree, std::vector<NodeId>& next, Rng& rng) {
    std::uint64_t steps = 0;
    const auto n = static_cast<NodeId>(g.node_count());
    for (NodeId start = 0; start < n; ++start) {
        NodeId u = start;
        while (!in_tree[u]) {
            auto nb = g.neighbors(u);
            next[u] = nb[uniform_below(rng, nb.size())];
            u = next[u];
            ++steps;
        }
        u = start;
        while (!in_tree[u]) {
            in_tree[u] = 1;
            u = next[u];
        }
    }
    return steps;
}

}  // namespace detail

/// Uniform spanning tree (Wilson's algorithm) rooted at r.
inline WilsonResult wilson_ust(const Graph& g, NodeId r, Rng& rng) {
    const std::size_t n = g.node_count();
    if (r >= n) throw InvalidArgumentError("root out of range");
    std::vector<char> in_tree(n, 0);
    std::vector<NodeId> next(n, kNoNode);
    in_tree[r] = 1;
    auto steps = detail::wilson_walks(g, in_tree, next, rng);
    return {RootedTree(r, std::move(next)), steps};
}

namespace detail {

// Wilson on G / {a, b} absorbed at r (r outside {a, b}). The merged node steps
// to a uniform edge end among a's and b's other edges; next[] then routes one
// endpoint through the other, so the finished pointers contain (a, b).
inline std::uint64_t wilson_walks_contracted(const Graph& g, NodeId a, NodeId b, std::vector<char>& in_tree,
                                             std::vector<NodeId>& next, Rng& rng) {
    std::uint64_t steps = 0;
    const auto n = static_cast<NodeId>(g.node_count());
    const auto nb_a = g.neighbors(a);
    const auto nb_b = g.neighbors(b);
    const std::uint64_t merged_degree = nb_a.size() + nb_b.size() - 2;
    auto step = [&](NodeId u) -> NodeId {
        if (u != a && u != b) {
            auto nb = g.neighbors(u);
            return next[u] = nb[uniform_below(rng, nb.size())];
        }
        std::uint64_t k = uniform_below(rng, merged_degree);
        const bool from_a = k < nb_a.size() - 1;
        if (!from_a) k -= nb_a.size() - 1;
        const auto nb = from_a ? nb_a : nb_b;
        const NodeId other = from_a ? b : a;
        // adjacency is sorted, so slots past the contracted edge shift by one
        const NodeId w = nb[k] < other ? nb[k] : nb[k + 1];
        next[from_a ? a : b] = w;
        next[other] = from_a ? a : b;
        return w;
    };
    for (NodeId start = 0; start < n; ++start) {
        NodeId u = start;
        while (!in_tree[u]) {
            u = step(u);
            ++steps;
        }
        u = start;
        while (!in_tree[u]) {
            if (u == a || u == b) {
                in_tree[a] = in_tree[b] = 1;
                u = next[a] == b ? next[b] : next[a];
            } else {
                in_tree[u] = 1;
                u = next[u];
            }
        }
    }
    return steps;
}

}  // namespace detail

/// Uniform spanning tree among those containing edge (a, b), rooted at r.
/// These are the spanning trees of G / {a, b} plus (a, b), so Wilson runs on
/// the contracted graph absorbed at r, or at the merged node when r is a or b.
inline WilsonResult wilson_ust_with_edge(const Graph& g, NodeId a, NodeId b, NodeId r, Rng& rng) {
    if (!g.has_edge(a, b))
        throw InvalidEdgeError("edge (" + std::to_string(a) + ", " + std::to_string(b) + ") not in graph");
    const std::size_t n = g.node_count();
    if (r >= n) throw InvalidArgumentError("root out of range");
    std::vector<char> in_tree(n, 0);
    std::vector<NodeId> next(n, kNoNode);
    if (r == a || r == b) {
        in_tree[a] = in_tree[b] = 1;
        auto steps = detail::wilson_walks(g, in_tree, next, rng);
        next[a] = b;
        next[b] = kNoNode;
        RootedTree tree(b, std::move(next));
        reroot(tree, r);
        return {std::move(tree), steps};
    }
    in_tree[r] = 1;
    auto steps = detail::wilson_walks_contracted(g, a, b, in_tree, next, rng);
    return {RootedTree(r, std::move(next)), steps};
}

/// Tree edges on the path between a and b, each named by its lower (child)
/// endpoint. `a_side` runs from a up to (excluding) the meeting node, `b_side`
/// likewise from b.
struct TreePath {
    std::vector<NodeId> a_side;
    std::vector<NodeId> b_side;

    std::size_t length() const noexcept { return a_side.size() + b_side.size(); }
};

inline TreePath tree_path(const RootedTree& tree, NodeId a, NodeId b) {
    // climb from both ends, always moving the deeper one first
    std::size_t da = depth_of(tree, a), db = depth_of(tree, b);
    TreePath path;
    while (da > db) {
        path.a_side.push_back(a);
        a = tree.parent(a);
        --da;
    }
    while (db > da) {
        path.b_side.push_back(b);
        b = tree.parent(b);
        --db;
    }
    while (a != b) {
        path.a_side.push_back(a);
        path.b_side.push_back(b);
        a = tree.parent(a);
        b = tree.parent(b);
    }
    return path;
}

/// Adds (a, b) and removes the cycle edge whose child endpoint is `cut`.
/// Parent pointers stay oriented toward the original root.
inline RootedTree link_cut_apply(const RootedTree& tree, NodeId a, NodeId b, const TreePath& path, NodeId cut) {
    bool on_a = std::find(path.a_side.begin(), path.a_side.end(), cut) != path.a_side.end();
    bool on_b = std::find(path.b_side.begin(), path.b_side.end(), cut) != path.b_side.end();
    if (!on_a && !on_b) throw InvalidArgumentError("cut edge is not on the cycle");
    if (on_b) std::swap(a, b);
    // the detached subtree of `cut` holds a; hang it from b through a
    RootedTree out = tree;
    NodeId prev = b;
    NodeId cur = a;
    for (;;) {
        NodeId next = out.parent(cur);
        set_parent(out, cur, prev);
        if (cur == cut) break;
        prev = cur;
        cur = next;
    }
    return out;
}

struct LinkCutResult {
    RootedTree tree;
    /// d(tau): number of cycle edges other than e, i.e. choices of cut.
    std::size_t out_degree = 0;
};

/// Link e = (a, b) into tree (which must not contain it) and cut a uniformly
/// chosen edge of the cycle this creates.
inline LinkCutResult link_cut(const RootedTree& tree, NodeId a, NodeId b, Rng& rng) {
    if (a == b) throw InvalidEdgeError("self-loop");
    if (tree.contains_edge(a, b)) throw InvalidArgumentError("link-cut: edge already in tree");
    auto path = tree_path(tree, a, b);
    auto pick = uniform_below(rng, path.length());
    NodeId cut = pick < path.a_side.size() ? path.a_side[pick] : path.b_side[pick - path.a_side.size()];
    return {link_cut_apply(tree, a, b, path, cut), path.length()};
}

/// Marks the nodes of Sub(tree, c) without needing the DFN layout.
inline std::vector<char> subtree_mask(const RootedTree& tree, NodeId c) {
    const std::size_t n = tree.node_count();
    std::vector<char> state(n, 0);  // 0 unknown, 1 inside, 2 outside
    state[c] = 1;
    if (tree.root() != c) state[tree.root()] = 2;
    std::vector<NodeId> chain;
    for (NodeId s = 0; s < n; ++s) {
        chain.clear();
        NodeId x = s;
        while (state[x] == 0) {
            chain.push_back(x);
            x = tree.parent(x);
        }
        for (NodeId y : chain) state[y] = state[x];
    }
    for (auto& s : state) s = (s == 1);
    return state;
}

/// Graph edges crossing the 2-forest tree \ e, oriented (inside, outside)
/// where "inside" is the side detached from the root. e itself is excluded.
struct CutCandidates {
    NodeId child = kNoNode;  // endpoint of e below the cut
    NodeId other = kNoNode;
    std::vector<std::pair<NodeId, NodeId>> crossing;
};

inline CutCandidates cut_link_candidates(const RootedTree& tree, NodeId a, NodeId b, const Graph& g) {
    CutCandidates out;
    if (tree.parent(a) == b) {
        out.child = a;
        out.other = b;
    } else if (tree.parent(b) == a) {
        out.child = b;
        out.other = a;
    } else {
        throw InvalidArgumentError("cut-link: edge not in tree");
    }
    auto inside = subtree_mask(tree, out.child);
    for (NodeId x = 0; x < tree.node_count(); ++x) {
        if (!inside[x]) continue;
        for (NodeId y : g.neighbors(x)) {
            if (inside[y]) continue;
            if (x == out.child && y == out.other) continue;
            out.crossing.emplace_back(x, y);
        }
    }
    return out;
}

/// Cuts e and links the crossing edge (inside, outside).
inline RootedTree cut_link_apply(const RootedTree& tree, const CutCandidates& cut, std::pair<NodeId, NodeId> link) {
    RootedTree out = tree;
    NodeId prev = link.second;
    NodeId cur = link.first;
    for (;;) {
        NodeId next = out.parent(cur);
        set_parent(out, cur, prev);
        if (cur == cut.child) break;
        prev = cur;
        cur = next;
    }
    return out;
}

struct CutLinkResult {
    RootedTree tree;
    /// d(tau_e): number of crossing edges other than e.
    std::size_t in_degree = 0;
};

/// Cut e = (a, b) from tree and link a uniformly chosen crossing edge of g.
inline CutLinkResult cut_link(const RootedTree& tree, NodeId a, NodeId b, const Graph& g, Rng& rng) {
    auto cut = cut_link_candidates(tree, a, b, g);
    if (cut.crossing.empty())
        throw BridgeError("edge (" + std::to_string(a) + ", " + std::to_string(b) + ") is a bridge");
    auto link = cut.crossing[uniform_below(rng, cut.crossing.size())];
    return {cut_link_apply(tree, cut, link), cut.crossing.size()};
}

}  // namespace kemeny
