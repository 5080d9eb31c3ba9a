#pragma once

// Tree-to-forest Kemeny constant estimator. A uniform spanning tree tau is
// turned into the signed 2-forest volume sum f(tau) by comparing its root
// paths with those of a fixed reference tree tau0; kappa is estimated by
// sum f / (2 m omega).

#include <cassert>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "kemeny/error.hpp"
#include "kemeny/fenwick.hpp"
#include "kemeny/graph.hpp"
#include "kemeny/parallel.hpp"
#include "kemeny/rng.hpp"
#include "kemeny/rooted_tree.hpp"
#include "kemeny/spanning.hpp"

namespace kemeny {

using Int128 = __int128;

enum class RootPolicy { MaxDegree, Explicit };
enum class ReferenceTree { Bfs, Dfs, Wilson };
enum class Method { Naive, Optimized, Auto };

inline const char* to_string(ReferenceTree t) {
    switch (t) {
        case ReferenceTree::Bfs: return "bfs";
        case ReferenceTree::Dfs: return "dfs";
        case ReferenceTree::Wilson: return "wilson";
    }
    return "?";
}

inline const char* to_string(Method m) {
    switch (m) {
        case Method::Naive: return "naive";
        case Method::Optimized: return "optimized";
        case Method::Auto: return "auto";
    }
    return "?";
}

struct EstimateConfig {
    std::size_t sample_count = 1000;
    RootPolicy root_policy = RootPolicy::MaxDegree;
    NodeId root = 0;  // used with RootPolicy::Explicit
    ReferenceTree reference = ReferenceTree::Bfs;
    Method method = Method::Auto;
    std::uint64_t seed = 0;
    /// Planner inputs; when both are set the sample count is planned.
    std::optional<double> epsilon;
    std::optional<double> failure_probability;
    std::size_t threads = 1;
};

/// Stream reserved for drawing a Wilson reference tree.
inline constexpr std::uint64_t kReferenceStream = ~std::uint64_t{0};

struct EstimateResult {
    double kappa = 0.0;
    std::vector<Int128> f_values;
    std::vector<std::uint64_t> sample_walk_steps;
    std::uint64_t walk_steps = 0;
    std::size_t sample_count = 0;
    NodeId root = 0;
    /// ecc(r), the computable stand-in for the diameter
    std::size_t eccentricity = 0;
    std::size_t reference_height = 0;
    Method method_used = Method::Optimized;
    double setup_seconds = 0.0;
    double sampling_seconds = 0.0;  // summed over workers
    double evaluation_seconds = 0.0;  // summed over workers
    double wall_seconds = 0.0;
};

inline void validate_planner_inputs(double epsilon, double failure_probability) {
    // epsilon = 1 is accepted: it is the boundary of a meaningful relative error
    if (!(epsilon > 0.0 && epsilon <= 1.0)) throw InvalidArgumentError("epsilon must lie in (0, 1]");
    if (!(failure_probability > 0.0 && failure_probability < 1.0))
        throw InvalidArgumentError("failure probability must lie in (0, 1)");
}

inline void validate(const EstimateConfig& config, const Graph& g) {
    if (config.sample_count < 1 && !(config.epsilon && config.failure_probability))
        throw InvalidArgumentError("sample count must be at least 1");
    if (config.epsilon.has_value() != config.failure_probability.has_value())
        throw InvalidArgumentError("epsilon and failure probability must be given together");
    if (config.epsilon) validate_planner_inputs(*config.epsilon, *config.failure_probability);
    if (config.root_policy == RootPolicy::Explicit && config.root >= g.node_count())
        throw InvalidArgumentError("root " + std::to_string(config.root) + " out of range");
    if (g.node_count() < 2) throw InvalidArgumentError("graph needs at least two nodes");
}

/// omega = ceil(8 m^2 ecc(r)^2 ln(2 / p_f) / (n^2 eps^2)).
inline std::uint64_t plan_sample_size(const Graph& g, NodeId r, double epsilon, double failure_probability) {
    validate_planner_inputs(epsilon, failure_probability);
    const long double n = static_cast<long double>(g.node_count());
    const long double m = static_cast<long double>(g.edge_count());
    const long double ecc = static_cast<long double>(eccentricity_from(g, r));
    const long double bound = 8.0L * m * m * ecc * ecc * std::log(2.0L / failure_probability) /
                              (n * n * static_cast<long double>(epsilon) * epsilon);
    // absorb last-ulp noise so exact integers are not bumped up by ceil
    const long double planned = std::ceil(bound * (1.0L - 1e-12L));
    if (planned >= 1.8e19L) throw CapacityError("planned sample size does not fit in 64 bits");
    return std::max<std::uint64_t>(1, static_cast<std::uint64_t>(planned));
}

inline NodeId resolve_root(const Graph& g, const EstimateConfig& config) {
    return config.root_policy == RootPolicy::Explicit ? config.root : max_degree_node(g);
}

/// Reference tree tau0 with its DFN layout computed.
inline RootedTree make_reference_tree(const Graph& g, NodeId root, ReferenceTree kind, std::uint64_t seed) {
    RootedTree tau0;
    switch (kind) {
        case ReferenceTree::Bfs: tau0 = bfs_tree(g, root); break;
        case ReferenceTree::Dfs: tau0 = dfs_tree(g, root); break;
        case ReferenceTree::Wilson: {
            auto rng = stream_rng(seed, kReferenceStream);
            tau0 = wilson_ust(g, root, rng).tree;
            break;
        }
    }
    compute_dfn(tau0);
    return tau0;
}

/// Computes DFN and subtree volumes of a sampled tree.
inline void prepare_tree(RootedTree& tree, const Graph& g) {
    compute_dfn(tree, &g);
}

namespace detail {

inline void check_pair(const RootedTree& tau, const RootedTree& tau0, const Graph& g) {
    if (tau.root() != tau0.root()) throw InvalidArgumentError("tree and reference tree have different roots");
    if (tau.node_count() != g.node_count() || tau0.node_count() != g.node_count())
        throw InvalidArgumentError("tree size does not match graph");
    if (!tau.has_dfn() || !tau.has_volumes()) throw InvalidArgumentError("tree layout not prepared");
}

}  // namespace detail

/// f(tau) by walking each reference path P_u = u -> r in tau0 and testing
/// whether its edges lie on tau's own u -> r path (same or opposite direction).
/// Nodes are visited in tau0 preorder, so the open matched edges are exactly
/// the edges of P_u that lie in tau; one counts for u iff its child end in tau
/// is a tau-ancestor of u. Cost O(n * height(tau0)). tau needs DFN and
/// volumes, tau0 needs DFN.
inline Int128 f_naive(const RootedTree& tau, const RootedTree& tau0, const Graph& g) {
    detail::check_pair(tau, tau0, g);
    if (!tau0.has_dfn()) throw InvalidArgumentError("reference tree has no DFN");
    const std::int64_t two_m = g.volume();
    // tau0 edges on the current path that also lie in tau
    struct Match {
        std::uint32_t end;      // tau0 dfs_out of the path node that pushed it
        std::uint32_t in, out;  // tau interval of the edge's child end in tau
        std::int64_t value;
    };
    std::vector<Match> matched;
    Int128 f = 0;
    const auto order = tau0.preorder();
    for (std::uint32_t pos = 1; pos <= order.size(); ++pos) {
        const NodeId x = order[pos - 1];
        while (!matched.empty() && matched.back().end < pos) matched.pop_back();
        const NodeId y = tau0.parent(x);
        if (y == kNoNode) continue;
        if (tau.parent(x) == y) {
            matched.push_back({tau0.dfs_out(x), tau.dfs_in(x), tau.dfs_out(x), two_m - tau.vol(x)});
        } else if (tau.parent(y) == x) {
            matched.push_back({tau0.dfs_out(x), tau.dfs_in(y), tau.dfs_out(y), tau.vol(y) - two_m});
        }
        const std::uint32_t at = tau.dfs_in(x);
        std::int64_t acc = 0;
        for (const auto& e : matched)
            if (e.in <= at && at <= e.out) acc += e.value;
        f += static_cast<Int128>(g.degree(x)) * acc;
    }
    return f;
}

/// f(tau) by one DFS over tau with range adds on tau0's DFN intervals held in
/// a Fenwick tree. Cost O(n log n). The Fenwick tree must be all zero and is
/// left all zero. tau needs DFN and volumes, tau0 needs DFN.
inline Int128 f_optimized(const RootedTree& tau, const RootedTree& tau0, const Graph& g,
                          FenwickTree<std::int64_t>& vol_sum) {
    detail::check_pair(tau, tau0, g);
    if (!tau0.has_dfn()) throw InvalidArgumentError("reference tree has no DFN");
    if (vol_sum.size() != g.node_count()) vol_sum.reset(g.node_count());
    assert(vol_sum.all_zero());

    const std::int64_t two_m = g.volume();
    struct Frame {
        NodeId v;
        std::uint32_t next_child;
        std::uint32_t l, r;  // tau0 interval touched on entry, l == 0 if none
        std::int64_t added;
    };
    std::vector<Frame> stack;
    stack.reserve(64);
    Int128 f = 0;

    auto enter = [&](NodeId v) {
        Frame frame{v, 0, 0, 0, 0};
        const NodeId p = tau.parent(v);
        if (p != kNoNode) {
            if (tau0.parent(v) == p) {
                frame.l = tau0.dfs_in(v);
                frame.r = tau0.dfs_out(v);
                frame.added = two_m - tau.vol(v);
            } else if (tau0.parent(p) == v) {
                frame.l = tau0.dfs_in(p);
                frame.r = tau0.dfs_out(p);
                frame.added = tau.vol(v) - two_m;
            }
            if (frame.l != 0) vol_sum.add(frame.l, frame.r, frame.added);
            f += static_cast<Int128>(g.degree(v)) * vol_sum.query(tau0.dfs_in(v));
        }
        stack.push_back(frame);
    };

    enter(tau.root());
    while (!stack.empty()) {
        Frame& top = stack.back();
        auto kids = tau.children(top.v);
        if (top.next_child < kids.size()) {
            NodeId c = kids[top.next_child++];
            enter(c);
        } else {
            if (top.l != 0) vol_sum.add(top.l, top.r, -top.added);
            stack.pop_back();
        }
    }
    return f;
}

/// Upper bound 4 m^2 * height(tau0) on |f(tau)|.
inline Int128 f_bound(const Graph& g, std::size_t reference_height) {
    const Int128 m = static_cast<Int128>(g.edge_count());
    return 4 * m * m * static_cast<Int128>(reference_height);
}

inline Method resolve_method(Method requested, const Graph& g, std::size_t eccentricity) {
    if (requested != Method::Auto) return requested;
    return static_cast<double>(eccentricity) < std::log2(static_cast<double>(g.node_count())) ? Method::Naive
                                                                                             : Method::Optimized;
}

/// Per-worker scratch for evaluating f.
struct Evaluator {
    const Graph* graph = nullptr;
    const RootedTree* reference = nullptr;
    Method method = Method::Optimized;
    FenwickTree<std::int64_t> vol_sum;

    Evaluator(const Graph& g, const RootedTree& tau0, Method m)
        : graph(&g), reference(&tau0), method(m), vol_sum(m == Method::Naive ? 0 : g.node_count()) {}

    /// Prepares the layout of `tree` and returns f(tree).
    Int128 operator()(RootedTree& tree) {
        prepare_tree(tree, *graph);
        return method == Method::Naive ? f_naive(tree, *reference, *graph)
                                       : f_optimized(tree, *reference, *graph, vol_sum);
    }
};

/// (Sum f) / (2 m omega), computed the same way everywhere so identical
/// inputs give identical bits.
inline double kappa_from_sum(Int128 sum, std::int64_t two_m, std::size_t omega) {
    return static_cast<double>(static_cast<long double>(sum) /
                               (static_cast<long double>(two_m) * static_cast<long double>(omega)));
}

/// Draws samples [0, count) on streams (seed, first_stream + i) and hands each
/// prepared tree to sink(i, tree, f, walk_steps). sink must be safe to call
/// concurrently for distinct i.
template <typename Sink>
void draw_samples(const Graph& g, NodeId root, const RootedTree& tau0, Method method, std::uint64_t seed,
                  std::uint64_t first_stream, std::size_t count, std::size_t threads, Sink&& sink,
                  double* sampling_seconds = nullptr, double* evaluation_seconds = nullptr) {
    struct Worker {
        Evaluator eval;
        double sampling = 0.0;
        double evaluation = 0.0;
        double* sampling_out;
        double* evaluation_out;
        std::mutex* mutex;
        ~Worker() {
            std::lock_guard lock(*mutex);
            if (sampling_out) *sampling_out += sampling;
            if (evaluation_out) *evaluation_out += evaluation;
        }
    };
    std::mutex mutex;
    using clock = std::chrono::steady_clock;
    parallel_for(
        count, threads,
        [&] { return Worker{Evaluator(g, tau0, method), 0.0, 0.0, sampling_seconds, evaluation_seconds, &mutex}; },
        [&](Worker& w, std::size_t i) {
            auto t0 = clock::now();
            auto rng = stream_rng(seed, first_stream + i);
            auto drawn = wilson_ust(g, root, rng);
            auto t1 = clock::now();
            Int128 f = w.eval(drawn.tree);
            auto t2 = clock::now();
            w.sampling += std::chrono::duration<double>(t1 - t0).count();
            w.evaluation += std::chrono::duration<double>(t2 - t1).count();
            sink(i, drawn.tree, f, drawn.walk_steps);
        });
}

/// Static estimator: omega Wilson trees on independent streams, averaged f.
inline EstimateResult estimate_kemeny(const Graph& g, const EstimateConfig& config) {
    validate(config, g);
    using clock = std::chrono::steady_clock;
    const auto start = clock::now();
    EstimateResult result;
    result.root = resolve_root(g, config);
    result.eccentricity = eccentricity_from(g, result.root);
    auto tau0 = make_reference_tree(g, result.root, config.reference, config.seed);
    result.reference_height = tree_height(tau0);
    result.method_used = resolve_method(config.method, g, result.eccentricity);
    result.sample_count = config.epsilon
                              ? plan_sample_size(g, result.root, *config.epsilon, *config.failure_probability)
                              : config.sample_count;
    result.setup_seconds = std::chrono::duration<double>(clock::now() - start).count();

    result.f_values.assign(result.sample_count, 0);
    auto& steps = result.sample_walk_steps;
    steps.assign(result.sample_count, 0);
    draw_samples(
        g, result.root, tau0, result.method_used, config.seed, 0, result.sample_count, config.threads,
        [&](std::size_t i, RootedTree&, Int128 f, std::uint64_t walk) {
            result.f_values[i] = f;
            steps[i] = walk;
        },
        &result.sampling_seconds, &result.evaluation_seconds);

    Int128 sum = 0;
    for (auto f : result.f_values) sum += f;
    for (auto s : steps) result.walk_steps += s;
    result.kappa = kappa_from_sum(sum, g.volume(), result.sample_count);
    result.wall_seconds = std::chrono::duration<double>(clock::now() - start).count();
    return result;
}

/// Decimal rendering of a 128-bit integer.
inline std::string int128_to_string(Int128 value) {
    if (value == 0) return "0";
    bool negative = value < 0;
    unsigned __int128 mag = negative ? static_cast<unsigned __int128>(-(value + 1)) + 1
                                     : static_cast<unsigned __int128>(value);
    std::string digits;
    while (mag > 0) {
        digits.push_back(static_cast<char>('0' + static_cast<int>(mag % 10)));
        mag /= 10;
    }
    if (negative) digits.push_back('-');
    return {digits.rbegin(), digits.rend()};
}

}  // namespace kemeny
