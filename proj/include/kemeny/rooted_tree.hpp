#pragma once

#include <algorithm>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "kemeny/error.hpp"
#include "kemeny/graph.hpp"

namespace kemeny {

/// Spanning tree stored as parent pointers toward a root. The traversal layout
/// (children, DFS stamps, subtree volumes) is derived on demand by
/// compute_dfn() and subtree_volumes() and can be dropped with clear_layout()
/// when the tree is only kept for storage.
class RootedTree {
public:
    RootedTree() = default;
    RootedTree(NodeId root, std::vector<NodeId> parent) : root_(root), parent_(std::move(parent)) {
        if (root_ >= parent_.size()) throw InvalidArgumentError("tree root out of range");
        parent_[root_] = kNoNode;
    }

    NodeId root() const noexcept { return root_; }
    std::size_t node_count() const noexcept { return parent_.size(); }
    NodeId parent(NodeId v) const { return parent_[v]; }
    const std::vector<NodeId>& parents() const noexcept { return parent_; }

    bool contains_edge(NodeId a, NodeId b) const {
        return (parent_[a] == b) || (parent_[b] == a);
    }

    std::vector<Edge> edges() const {
        std::vector<Edge> out;
        out.reserve(parent_.size());
        for (NodeId v = 0; v < parent_.size(); ++v)
            if (parent_[v] != kNoNode) out.push_back(make_edge(v, parent_[v]));
        std::sort(out.begin(), out.end());
        return out;
    }

    bool has_dfn() const noexcept { return !stamps_.empty(); }
    bool has_volumes() const noexcept { return has_volumes_; }

    std::span<const NodeId> children(NodeId v) const {
        return {child_list_.data() + child_offsets_[v], child_offsets_[v + 1] - child_offsets_[v]};
    }
    /// Nodes in DFS preorder; preorder()[dfs_in(v) - 1] == v.
    std::span<const NodeId> preorder() const noexcept { return preorder_; }
    std::uint32_t dfs_in(NodeId v) const { return stamps_[v].in; }
    std::uint32_t dfs_out(NodeId v) const { return stamps_[v].out; }
    /// True if a lies on the path from d to the root (a == d included).
    bool is_ancestor(NodeId a, NodeId d) const {
        return stamps_[a].in <= stamps_[d].in && stamps_[d].in <= stamps_[a].out;
    }
    std::int64_t vol(NodeId v) const { return stamps_[v].vol; }

    void clear_layout() {
        child_offsets_ = {};
        child_list_ = {};
        preorder_ = {};
        stamps_ = {};
        has_volumes_ = false;
    }

    /// Structural equality (root and parent pointers).
    friend bool operator==(const RootedTree& a, const RootedTree& b) {
        return a.root_ == b.root_ && a.parent_ == b.parent_;
    }

    friend void compute_dfn(RootedTree& tree, const Graph* with_volumes);
    friend void subtree_volumes(RootedTree& tree, const Graph& g);
    friend void reroot(RootedTree& tree, NodeId new_root);
    friend void set_parent(RootedTree& tree, NodeId v, NodeId p);

private:
    NodeId root_ = 0;
    std::vector<NodeId> parent_;
    std::vector<std::uint32_t> child_offsets_;
    std::vector<NodeId> child_list_;
    std::vector<NodeId> preorder_;
    // per-node layout kept together so one lookup serves all three
    struct Stamp {
        std::uint32_t in = 0;
        std::uint32_t out = 0;
        std::int64_t vol = 0;
    };
    std::vector<Stamp> stamps_;
    bool has_volumes_ = false;
};

/// Populates children (ascending id), preorder and 1-based DFS stamps, plus
/// subtree volumes when a graph is given.
inline void compute_dfn(RootedTree& tree, const Graph* with_volumes = nullptr) {
    const std::size_t n = tree.parent_.size();
    // child_offsets_[p] counts down to the start of p's range while filling
    tree.child_offsets_.assign(n + 1, 0);
    for (NodeId v = 0; v < n; ++v)
        if (tree.parent_[v] != kNoNode) ++tree.child_offsets_[tree.parent_[v]];
    for (std::size_t i = 1; i <= n; ++i) tree.child_offsets_[i] += tree.child_offsets_[i - 1];
    tree.child_list_.resize(n == 0 ? 0 : n - 1);
    for (NodeId v = static_cast<NodeId>(n); v-- > 0;)
        if (tree.parent_[v] != kNoNode) tree.child_list_[--tree.child_offsets_[tree.parent_[v]]] = v;

    tree.preorder_.clear();
    tree.preorder_.reserve(n);
    tree.stamps_.assign(n, {});
    // children pushed in descending id so they pop in ascending id
    std::vector<NodeId> stack;
    stack.push_back(tree.root_);
    while (!stack.empty()) {
        const NodeId v = stack.back();
        stack.pop_back();
        tree.preorder_.push_back(v);
        tree.stamps_[v].in = static_cast<std::uint32_t>(tree.preorder_.size());
        for (auto k = tree.child_offsets_[v + 1]; k > tree.child_offsets_[v]; --k)
            stack.push_back(tree.child_list_[k - 1]);
    }
    if (tree.preorder_.size() != n) {
        tree.clear_layout();
        throw InvalidArgumentError("parent pointers do not form a tree");
    }
    // out accumulates the descendant count until v itself is reached
    for (auto it = tree.preorder_.rbegin(); it != tree.preorder_.rend(); ++it) {
        auto& s = tree.stamps_[*it];
        s.out += s.in;
        if (with_volumes) s.vol += static_cast<std::int64_t>(with_volumes->degree(*it));
        const NodeId p = tree.parent_[*it];
        if (p == kNoNode) continue;
        auto& ps = tree.stamps_[p];
        ps.out += s.out - s.in + 1;
        ps.vol += s.vol;
    }
    tree.has_volumes_ = with_volumes != nullptr;
}

/// vol(v) = sum of graph degrees over the subtree of v.
inline void subtree_volumes(RootedTree& tree, const Graph& g) {
    if (!tree.has_dfn()) {
        compute_dfn(tree, &g);
        return;
    }
    for (auto& s : tree.stamps_) s.vol = 0;
    for (auto it = tree.preorder_.rbegin(); it != tree.preorder_.rend(); ++it) {
        auto& s = tree.stamps_[*it];
        s.vol += static_cast<std::int64_t>(g.degree(*it));
        if (tree.parent_[*it] != kNoNode) tree.stamps_[tree.parent_[*it]].vol += s.vol;
    }
    tree.has_volumes_ = true;
}

/// Reverses parent pointers along the path new_root -> old root. Layout is
/// invalidated.
inline void reroot(RootedTree& tree, NodeId new_root) {
    NodeId prev = kNoNode;
    NodeId cur = new_root;
    while (cur != kNoNode) {
        NodeId next = tree.parent_[cur];
        tree.parent_[cur] = prev;
        prev = cur;
        cur = next;
    }
    tree.root_ = new_root;
    tree.clear_layout();
}

inline void set_parent(RootedTree& tree, NodeId v, NodeId p) {
    tree.parent_[v] = p;
    tree.clear_layout();
}

/// Number of edges between v and the root.
inline std::size_t depth_of(const RootedTree& tree, NodeId v) {
    std::size_t d = 0;
    for (NodeId x = v; tree.parent(x) != kNoNode; x = tree.parent(x)) ++d;
    return d;
}

/// Maximum depth over all nodes; needs the DFN layout.
inline std::size_t tree_height(const RootedTree& tree) {
    std::vector<std::size_t> depth(tree.node_count(), 0);
    std::size_t best = 0;
    for (NodeId v : tree.preorder()) {
        if (tree.parent(v) != kNoNode) depth[v] = depth[tree.parent(v)] + 1;
        best = std::max(best, depth[v]);
    }
    return best;
}

/// Orients an undirected edge set toward `root`.
inline RootedTree tree_from_edges(std::size_t n, std::span<const Edge> edges, NodeId root) {
    if (edges.size() + 1 != n) throw InvalidArgumentError("a spanning tree needs n - 1 edges");
    std::vector<std::vector<NodeId>> adj(n);
    for (const auto& e : edges) {
        adj[e.u].push_back(e.v);
        adj[e.v].push_back(e.u);
    }
    std::vector<NodeId> parent(n, kNoNode);
    std::vector<char> seen(n, 0);
    std::vector<NodeId> stack{root};
    seen[root] = 1;
    std::size_t reached = 0;
    while (!stack.empty()) {
        NodeId v = stack.back();
        stack.pop_back();
        ++reached;
        for (NodeId w : adj[v])
            if (!seen[w]) {
                seen[w] = 1;
                parent[w] = v;
                stack.push_back(w);
            }
    }
    if (reached != n) throw InvalidArgumentError("edge set is not a spanning tree");
    return RootedTree(root, std::move(parent));
}

/// Checks the RootedTree invariants against g; returns an empty string when
/// valid, otherwise a description of the first violation.
inline std::string validate_tree(const RootedTree& tree, const Graph& g) {
    const std::size_t n = g.node_count();
    if (tree.node_count() != n) return "node count mismatch";
    if (tree.root() >= n) return "root out of range";
    if (tree.parent(tree.root()) != kNoNode) return "root has a parent";
    for (NodeId v = 0; v < n; ++v) {
        if (v == tree.root()) continue;
        NodeId p = tree.parent(v);
        if (p == kNoNode || p >= n) return "node " + std::to_string(v) + " has no parent";
        if (!g.has_edge(v, p)) return "tree edge (" + std::to_string(v) + ", " + std::to_string(p) + ") not in graph";
    }
    // every node reaches the root: colour along parent chains
    std::vector<std::uint8_t> state(n, 0);  // 0 unknown, 1 on current chain, 2 reaches root
    state[tree.root()] = 2;
    std::vector<NodeId> chain;
    for (NodeId s = 0; s < n; ++s) {
        chain.clear();
        NodeId x = s;
        while (state[x] == 0) {
            state[x] = 1;
            chain.push_back(x);
            x = tree.parent(x);
        }
        if (state[x] == 1) return "cycle through node " + std::to_string(x);
        for (NodeId c : chain) state[c] = 2;
    }
    return {};
}

}  // namespace kemeny
