#pragma once

// Ground-truth routines: dense spectral Kemeny constant, exact effective
// resistance, Kirchhoff tree counting and exhaustive enumeration of spanning
// trees and 2-forests. Everything here is meant for small graphs and for
// checking the sampling estimators.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <numeric>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <boost/multiprecision/cpp_int.hpp>

#include "kemeny/error.hpp"
#include "kemeny/graph.hpp"
#include "kemeny/rooted_tree.hpp"

namespace kemeny {

using BigInt = boost::multiprecision::cpp_int;

inline constexpr std::size_t kDenseNodeLimit = 20000;
inline constexpr std::size_t kTreeCountNodeLimit = 500;
inline constexpr std::size_t kExactTreeCountNodeLimit = 64;
inline constexpr std::size_t kEnumerationLimit = 1000000;

/// Eigenvalues of the normalized Laplacian I - D^-1/2 A D^-1/2, ascending.
struct Spectrum {
    std::vector<double> eigenvalues;
};

namespace detail {

inline void require_dense(const Graph& g) {
    if (g.node_count() > kDenseNodeLimit)
        throw CapacityError("dense routine limited to " + std::to_string(kDenseNodeLimit) + " nodes, graph has " +
                            std::to_string(g.node_count()));
}

inline Eigen::MatrixXd combinatorial_laplacian(const Graph& g) {
    const auto n = static_cast<Eigen::Index>(g.node_count());
    Eigen::MatrixXd lap = Eigen::MatrixXd::Zero(n, n);
    for (NodeId v = 0; v < g.node_count(); ++v) {
        lap(v, v) = static_cast<double>(g.degree(v));
        for (NodeId w : g.neighbors(v)) lap(v, w) = -1.0;
    }
    return lap;
}

}  // namespace detail

inline Spectrum normalized_laplacian_spectrum(const Graph& g) {
    detail::require_dense(g);
    const auto n = static_cast<Eigen::Index>(g.node_count());
    Eigen::MatrixXd lap = Eigen::MatrixXd::Identity(n, n);
    for (NodeId v = 0; v < g.node_count(); ++v) {
        if (g.degree(v) == 0) throw ConnectivityError("isolated node " + std::to_string(v));
        for (NodeId w : g.neighbors(v))
            lap(v, w) = -1.0 / std::sqrt(static_cast<double>(g.degree(v)) * static_cast<double>(g.degree(w)));
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(lap, Eigen::EigenvaluesOnly);
    if (solver.info() != Eigen::Success) throw ConvergenceError("eigensolver failed");
    Spectrum s;
    s.eigenvalues.assign(solver.eigenvalues().data(), solver.eigenvalues().data() + n);
    return s;
}

/// Kemeny constant as the trace of the normalized Laplacian pseudo-inverse.
inline double kemeny_eigen(const Graph& g) {
    auto spectrum = normalized_laplacian_spectrum(g);
    const auto& sigma = spectrum.eigenvalues;
    if (sigma.size() < 2) throw InvalidArgumentError("need at least two nodes");
    if (sigma[1] < 1e-10) throw ConnectivityError("zero eigenvalue has multiplicity > 1: graph is disconnected");
    double kappa = 0.0;
    for (std::size_t i = 1; i < sigma.size(); ++i) kappa += 1.0 / sigma[i];
    return kappa;
}

/// (e_u - e_v)^T L^+ (e_u - e_v), solved through L + J/n.
inline double effective_resistance_exact(const Graph& g, NodeId u, NodeId v) {
    detail::require_dense(g);
    if (u == v) throw InvalidArgumentError("effective resistance needs distinct nodes");
    if (u >= g.node_count() || v >= g.node_count()) throw InvalidArgumentError("node out of range");
    const auto n = static_cast<Eigen::Index>(g.node_count());
    Eigen::MatrixXd lap = detail::combinatorial_laplacian(g);
    lap.array() += 1.0 / static_cast<double>(n);
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n);
    rhs(u) = 1.0;
    rhs(v) = -1.0;
    Eigen::VectorXd x = lap.ldlt().solve(rhs);
    return x(u) - x(v);
}

/// Number of spanning trees by the matrix-tree theorem. Exact fraction-free
/// elimination up to 64 nodes; a rounded floating determinant up to 500.
inline BigInt count_spanning_trees(const Graph& g) {
    const std::size_t n = g.node_count();
    if (n > kTreeCountNodeLimit)
        throw CapacityError("tree counting limited to " + std::to_string(kTreeCountNodeLimit) + " nodes");
    if (n <= 1) return 1;
    const std::size_t k = n - 1;  // drop the last row and column
    if (n <= kExactTreeCountNodeLimit) {
        std::vector<std::vector<BigInt>> a(k, std::vector<BigInt>(k, 0));
        for (NodeId v = 0; v < k; ++v) {
            a[v][v] = static_cast<long>(g.degree(v));
            for (NodeId w : g.neighbors(v))
                if (w < k) a[v][w] = -1;
        }
        // Bareiss
        BigInt prev = 1;
        int sign = 1;
        for (std::size_t p = 0; p < k; ++p) {
            if (a[p][p] == 0) {
                std::size_t swap_row = p + 1;
                while (swap_row < k && a[swap_row][p] == 0) ++swap_row;
                if (swap_row == k) return 0;
                std::swap(a[p], a[swap_row]);
                sign = -sign;
            }
            for (std::size_t i = p + 1; i < k; ++i) {
                for (std::size_t j = p + 1; j < k; ++j) a[i][j] = (a[i][j] * a[p][p] - a[i][p] * a[p][j]) / prev;
            }
            prev = a[p][p];
        }
        BigInt det = a[k - 1][k - 1];
        return sign < 0 ? BigInt(-det) : det;
    }
    std::vector<std::vector<long double>> a(k, std::vector<long double>(k, 0.0L));
    for (NodeId v = 0; v < k; ++v) {
        a[v][v] = static_cast<long double>(g.degree(v));
        for (NodeId w : g.neighbors(v))
            if (w < k) a[v][w] = -1.0L;
    }
    // LU with partial pivoting; accumulate log|det| to stay in range
    long double log_det = 0.0L;
    for (std::size_t p = 0; p < k; ++p) {
        std::size_t pivot = p;
        for (std::size_t i = p + 1; i < k; ++i)
            if (std::fabs(a[i][p]) > std::fabs(a[pivot][p])) pivot = i;
        if (a[pivot][p] == 0.0L) return 0;
        std::swap(a[p], a[pivot]);
        log_det += std::log(std::fabs(a[p][p]));
        for (std::size_t i = p + 1; i < k; ++i) {
            long double factor = a[i][p] / a[p][p];
            if (factor == 0.0L) continue;
            for (std::size_t j = p; j < k; ++j) a[i][j] -= factor * a[p][j];
        }
    }
    return BigInt(std::roundl(std::exp(log_det)));
}

/// Spanning trees as canonical edge lists, by include/exclude backtracking
/// over the edge list with a rollback union-find.
inline std::vector<std::vector<Edge>> enumerate_spanning_edge_sets(const Graph& g) {
    const std::size_t n = g.node_count();
    auto count = count_spanning_trees(g);
    if (count > kEnumerationLimit)
        throw CapacityError("graph has " + count.str() + " spanning trees, enumeration limited to " +
                            std::to_string(kEnumerationLimit));
    const auto edges = g.edges();
    const std::size_t m = edges.size();
    std::vector<std::vector<Edge>> out;
    if (n <= 1) {
        out.emplace_back();
        return out;
    }

    std::vector<NodeId> parent(n);
    std::vector<std::size_t> size(n, 1);
    std::iota(parent.begin(), parent.end(), NodeId{0});
    auto find = [&](NodeId x) {
        while (parent[x] != x) x = parent[x];
        return x;
    };
    std::vector<std::pair<NodeId, NodeId>> history;  // (attached root, host root)
    std::vector<Edge> chosen;

    // can the chosen forest plus edges[from..] still span the graph?
    auto still_spannable = [&](std::size_t from) {
        std::vector<NodeId> p2(n);
        for (NodeId v = 0; v < n; ++v) p2[v] = find(v);
        auto f2 = [&](NodeId x) {
            while (p2[x] != x) x = p2[x] = p2[p2[x]];
            return x;
        };
        std::size_t components = n - chosen.size();
        for (std::size_t i = from; i < m && components > 1; ++i) {
            NodeId a = f2(edges[i].u), b = f2(edges[i].v);
            if (a != b) {
                p2[a] = b;
                --components;
            }
        }
        return components == 1;
    };

    auto recurse = [&](auto&& self, std::size_t i) -> void {
        if (chosen.size() == n - 1) {
            out.push_back(chosen);
            return;
        }
        if (i == m || m - i < n - 1 - chosen.size()) return;
        NodeId a = find(edges[i].u), b = find(edges[i].v);
        if (a != b) {
            if (size[a] > size[b]) std::swap(a, b);
            parent[a] = b;
            size[b] += size[a];
            history.emplace_back(a, b);
            chosen.push_back(edges[i]);
            self(self, i + 1);
            chosen.pop_back();
            history.pop_back();
            size[b] -= size[a];
            parent[a] = a;
        }
        if (still_spannable(i + 1)) self(self, i + 1);
    };
    recurse(recurse, 0);
    return out;
}

inline std::vector<RootedTree> enumerate_spanning_trees(const Graph& g, NodeId root) {
    std::vector<RootedTree> trees;
    for (const auto& edges : enumerate_spanning_edge_sets(g))
        trees.push_back(tree_from_edges(g.node_count(), edges, root));
    return trees;
}

/// Spanning forest with exactly two trees. t1 holds the designated root.
struct TwoForest {
    std::vector<NodeId> t1;
    std::vector<NodeId> t2;
    std::vector<Edge> edges;  // sorted, n - 2 of them

    std::int64_t vol_t1(const Graph& g) const {
        std::int64_t vol = 0;
        for (NodeId v : t1) vol += static_cast<std::int64_t>(g.degree(v));
        return vol;
    }

    friend bool operator==(const TwoForest& a, const TwoForest& b) { return a.edges == b.edges; }
    friend bool operator<(const TwoForest& a, const TwoForest& b) { return a.edges < b.edges; }
};

namespace detail {

/// Splits the node set of `forest_edges` (n - 2 edges) into the component of r
/// and the rest.
inline TwoForest make_two_forest(std::size_t n, std::vector<Edge> forest_edges, NodeId r) {
    std::vector<std::vector<NodeId>> adj(n);
    for (const auto& e : forest_edges) {
        adj[e.u].push_back(e.v);
        adj[e.v].push_back(e.u);
    }
    std::vector<char> in_t1(n, 0);
    std::vector<NodeId> stack{r};
    in_t1[r] = 1;
    while (!stack.empty()) {
        NodeId v = stack.back();
        stack.pop_back();
        for (NodeId w : adj[v])
            if (!in_t1[w]) {
                in_t1[w] = 1;
                stack.push_back(w);
            }
    }
    TwoForest f;
    for (NodeId v = 0; v < n; ++v) (in_t1[v] ? f.t1 : f.t2).push_back(v);
    std::sort(forest_edges.begin(), forest_edges.end());
    f.edges = std::move(forest_edges);
    return f;
}

}  // namespace detail

/// Every 2-forest of g, each listed once, with T1 holding r.
inline std::vector<TwoForest> enumerate_all_two_forests(const Graph& g, NodeId r) {
    std::set<std::vector<Edge>> seen;
    std::vector<TwoForest> out;
    for (const auto& tree : enumerate_spanning_edge_sets(g)) {
        for (std::size_t i = 0; i < tree.size(); ++i) {
            std::vector<Edge> forest;
            forest.reserve(tree.size() - 1);
            for (std::size_t j = 0; j < tree.size(); ++j)
                if (j != i) forest.push_back(tree[j]);
            if (seen.insert(forest).second) out.push_back(detail::make_two_forest(g.node_count(), forest, r));
        }
    }
    return out;
}

/// The 2-forests in which r and u lie in different trees.
inline std::vector<TwoForest> enumerate_two_forests(const Graph& g, NodeId r, NodeId u) {
    if (r == u) throw InvalidArgumentError("r and u must differ");
    std::vector<TwoForest> out;
    for (auto& f : enumerate_all_two_forests(g, r))
        if (std::binary_search(f.t2.begin(), f.t2.end(), u)) out.push_back(std::move(f));
    return out;
}

/// kappa = (1 / (2m |Gamma|)) sum_{u != r} d(u) sum_{F in F_{r|u}} vol(T1),
/// evaluated by full enumeration.
inline double kemeny_forest_formula(const Graph& g, NodeId r) {
    const auto trees = count_spanning_trees(g);
    __int128 total = 0;
    for (const auto& f : enumerate_all_two_forests(g, r)) {
        std::int64_t vol1 = f.vol_t1(g);
        std::int64_t weight = 0;
        for (NodeId u : f.t2) weight += static_cast<std::int64_t>(g.degree(u));
        total += static_cast<__int128>(vol1) * weight;
    }
    return static_cast<double>(static_cast<long double>(total) /
                               (static_cast<long double>(g.volume()) * trees.convert_to<long double>()));
}

struct PathMapping {
    std::vector<TwoForest> forward;
    std::vector<TwoForest> reverse;
};

/// Forward / reverse path mapping of tree (rooted at r) along the simple
/// graph path `path` = (u, ..., r).
inline PathMapping path_mapping_sets(const Graph& g, const RootedTree& tree, const std::vector<NodeId>& path) {
    const std::size_t n = g.node_count();
    if (path.size() < 2) throw InvalidArgumentError("path needs at least one edge");
    if (path.back() != tree.root()) throw InvalidArgumentError("path must end at the tree root");
    std::vector<char> used(n, 0);
    for (std::size_t i = 0; i < path.size(); ++i) {
        if (path[i] >= n || used[path[i]]) throw InvalidArgumentError("path is not simple");
        used[path[i]] = 1;
        if (i + 1 < path.size() && !g.has_edge(path[i], path[i + 1]))
            throw InvalidArgumentError("path uses a non-edge");
    }
    std::set<std::pair<NodeId, NodeId>> directed;
    for (std::size_t i = 0; i + 1 < path.size(); ++i) directed.emplace(path[i], path[i + 1]);

    const auto tree_edges = tree.edges();
    PathMapping out;
    for (NodeId x = path.front(); tree.parent(x) != kNoNode; x = tree.parent(x)) {
        NodeId y = tree.parent(x);
        bool same = directed.count({x, y}) > 0;
        bool opposite = directed.count({y, x}) > 0;
        if (!same && !opposite) continue;
        std::vector<Edge> forest;
        auto removed = make_edge(x, y);
        for (const auto& e : tree_edges)
            if (e != removed) forest.push_back(e);
        auto f = detail::make_two_forest(n, std::move(forest), tree.root());
        (same ? out.forward : out.reverse).push_back(std::move(f));
    }
    return out;
}

}  // namespace kemeny
