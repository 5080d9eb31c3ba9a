#pragma once

// Persistent sample index and its maintenance under single-edge updates.
// BSM resamples the trees an update invalidates (or a resistance-sized share
// of them on insertion). ISM transforms stored trees by link-cut / cut-link
// and carries the induced bias in per-sample weights.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

#include "kemeny/error.hpp"
#include "kemeny/graph.hpp"
#include "kemeny/parallel.hpp"
#include "kemeny/resistance.hpp"
#include "kemeny/rng.hpp"
#include "kemeny/rooted_tree.hpp"
#include "kemeny/spanning.hpp"
#include "kemeny/ttf.hpp"

namespace kemeny {

enum class MaintenanceMode : std::uint32_t { Bsm = 0, Ism = 1 };

inline const char* to_string(MaintenanceMode m) { return m == MaintenanceMode::Bsm ? "bsm" : "ism"; }

struct SampleRecord {
    RootedTree tree;  // stored without layout
    Int128 f = 0;
    double weight = 0.0;
};

struct SampleStore {
    std::uint64_t version = 0;
    MaintenanceMode mode = MaintenanceMode::Bsm;
    NodeId root = 0;
    RootedTree tau0;  // DFN layout always present
    std::vector<SampleRecord> records;
    std::uint64_t seed = 0;
    /// First RNG stream not yet consumed; every update draws from fresh streams.
    std::uint64_t next_stream = 0;
    std::int64_t two_m = 0;

    std::size_t sample_count() const noexcept { return records.size(); }
};

struct UpdateOptions {
    double resistance_tolerance = 1e-6;
    std::size_t threads = 1;
    /// Recompute f of retained samples on the updated graph instead of
    /// keeping the stored values.
    bool refresh_retained = false;
};

struct UpdateReport {
    double kappa = 0.0;
    /// Effective resistance of the inserted edge, NaN for deletions.
    double resistance = std::numeric_limits<double>::quiet_NaN();
    std::size_t touched = 0;
    std::size_t wilson_draws = 0;
    std::uint64_t walk_steps = 0;
    bool tau0_repaired = false;
    /// 1 / (omega * sum w^2)
    double effective_sample_size = 1.0;
    double seconds = 0.0;
};

inline double effective_sample_size(const SampleStore& store) {
    long double sq = 0.0L;
    for (const auto& rec : store.records) sq += static_cast<long double>(rec.weight) * rec.weight;
    return static_cast<double>(1.0L / (static_cast<long double>(store.records.size()) * sq));
}

/// True when every weight equals the first one bitwise.
inline bool uniform_weights(const SampleStore& store) {
    return std::all_of(store.records.begin(), store.records.end(),
                       [&](const SampleRecord& r) { return r.weight == store.records.front().weight; });
}

/// kappa-hat = sum f w / (2m). With uniform weights this is evaluated as
/// sum f / (2m omega), bit-identical to estimate_kemeny.
inline double current_estimate(const SampleStore& store) {
    if (store.records.empty()) throw InvalidArgumentError("empty sample store");
    if (uniform_weights(store)) {
        Int128 sum = 0;
        for (const auto& rec : store.records) sum += rec.f;
        return kappa_from_sum(sum, store.two_m, store.records.size());
    }
    long double acc = 0.0L;
    for (const auto& rec : store.records) acc += static_cast<long double>(rec.f) * rec.weight;
    return static_cast<double>(acc / static_cast<long double>(store.two_m));
}

inline SampleStore build_index(const Graph& g, const EstimateConfig& config,
                               MaintenanceMode mode = MaintenanceMode::Bsm) {
    validate(config, g);
    SampleStore store;
    store.mode = mode;
    store.seed = config.seed;
    store.root = resolve_root(g, config);
    store.two_m = g.volume();
    store.tau0 = make_reference_tree(g, store.root, config.reference, config.seed);
    const auto ecc = eccentricity_from(g, store.root);
    const Method method = resolve_method(config.method, g, ecc);
    const std::size_t omega =
        config.epsilon ? plan_sample_size(g, store.root, *config.epsilon, *config.failure_probability)
                       : config.sample_count;
    store.records.resize(omega);
    const double w = 1.0 / static_cast<double>(omega);
    draw_samples(g, store.root, store.tau0, method, config.seed, 0, omega, config.threads,
                 [&](std::size_t i, RootedTree& tree, Int128 f, std::uint64_t) {
                     tree.clear_layout();
                     store.records[i] = {std::move(tree), f, w};
                 });
    store.next_stream = omega;
    return store;
}

namespace detail {

/// Same rule as a fresh estimate: naive when tau0 is shallower than log2 n.
inline Method evaluation_method(const SampleStore& store, const Graph& g) {
    if (!store.tau0.has_dfn()) throw InvalidArgumentError("reference tree has no DFN");
    return resolve_method(Method::Auto, g, tree_height(store.tau0));
}

/// Recomputes f for the listed records on g against the store's tau0.
inline void recompute_f(SampleStore& store, const Graph& g, const std::vector<std::size_t>& which,
                        std::size_t threads) {
    parallel_for(
        which.size(), threads, [&, method = evaluation_method(store, g)] { return Evaluator(g, store.tau0, method); },
        [&](Evaluator& eval, std::size_t i) {
            auto& rec = store.records[which[i]];
            rec.f = eval(rec.tree);
            rec.tree.clear_layout();
        });
}

inline std::vector<std::size_t> all_indices(std::size_t n) {
    std::vector<std::size_t> out(n);
    for (std::size_t i = 0; i < n; ++i) out[i] = i;
    return out;
}

inline std::vector<std::size_t> complement(const std::vector<std::size_t>& sorted, std::size_t n) {
    std::vector<std::size_t> out;
    out.reserve(n - sorted.size());
    std::size_t j = 0;
    for (std::size_t i = 0; i < n; ++i) {
        if (j < sorted.size() && sorted[j] == i) {
            ++j;
            continue;
        }
        out.push_back(i);
    }
    return out;
}

/// k uniformly chosen distinct indices of [0, n), ascending.
inline std::vector<std::size_t> choose_without_replacement(std::size_t n, std::size_t k, Rng& rng) {
    auto pool = all_indices(n);
    for (std::size_t i = 0; i < k; ++i) std::swap(pool[i], pool[i + uniform_below(rng, n - i)]);
    pool.resize(k);
    std::sort(pool.begin(), pool.end());
    return pool;
}

inline std::vector<std::size_t> records_containing(const SampleStore& store, NodeId u, NodeId v) {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < store.records.size(); ++i)
        if (store.records[i].tree.contains_edge(u, v)) out.push_back(i);
    return out;
}

/// Scales the weights of `which` so they sum to `mass`.
inline void renormalize(SampleStore& store, const std::vector<std::size_t>& which, double mass) {
    long double total = 0.0L;
    for (auto i : which) total += store.records[i].weight;
    if (which.empty() || total <= 0.0L) return;
    for (auto i : which)
        store.records[i].weight = static_cast<double>(static_cast<long double>(store.records[i].weight) * mass / total);
}

inline void finish(SampleStore& store, const Graph& g, UpdateReport& report,
                   std::chrono::steady_clock::time_point start) {
    ++store.version;
    store.two_m = g.volume();
    report.kappa = current_estimate(store);
    report.effective_sample_size = effective_sample_size(store);
    report.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

inline void refresh_retained(SampleStore& store, const Graph& g, const std::vector<std::size_t>& touched,
                             const UpdateOptions& options) {
    if (!options.refresh_retained) return;
    recompute_f(store, g, complement(touched, store.records.size()), options.threads);
}

}  // namespace detail

/// Number of samples moved onto the new edge: ceil(R omega), with a slack of
/// the solver tolerance so that R = 2/3 computed as 0.6666667 still yields
/// exactly 2 omega / 3. Clamped to [1, omega].
inline std::size_t replacement_count(double resistance, std::size_t omega, double rel_tol) {
    const double target = resistance * static_cast<double>(omega);
    const double slack = std::max(1e-9, 10.0 * rel_tol * target);
    const double k = std::ceil(target - slack);
    return static_cast<std::size_t>(std::clamp(k, 1.0, static_cast<double>(omega)));
}

/// Rebuilds tau0 as the BFS tree of g and recomputes f for every sample except
/// those listed in `replaced` (sorted), whose trees the caller redraws next.
inline void repair_tau0(SampleStore& store, const Graph& g, std::size_t threads = 1,
                        const std::vector<std::size_t>& replaced = {}) {
    store.tau0 = bfs_tree(g, store.root);
    compute_dfn(store.tau0);
    store.two_m = g.volume();
    detail::recompute_f(store, g, detail::complement(replaced, store.records.size()), threads);
}

/// BSM insertion. g is replaced by g + (u, v).
inline UpdateReport bsm_insert(SampleStore& store, Graph& g, NodeId u, NodeId v, const UpdateOptions& options = {}) {
    const auto start = std::chrono::steady_clock::now();
    Graph next = insert_edge(g, u, v);
    UpdateReport report;
    report.resistance = effective_resistance_iterative(next, u, v, options.resistance_tolerance);
    const std::size_t omega = store.records.size();
    const std::size_t k = replacement_count(report.resistance, omega, options.resistance_tolerance);

    auto select_rng = stream_rng(store.seed, store.next_stream++);
    auto chosen = detail::choose_without_replacement(omega, k, select_rng);
    const std::uint64_t base = store.next_stream;
    store.next_stream += k;
    store.two_m = next.volume();

    std::vector<std::uint64_t> steps(k, 0);
    parallel_for(
        k, options.threads, [&, method = detail::evaluation_method(store, next)] { return Evaluator(next, store.tau0, method); },
        [&](Evaluator& eval, std::size_t i) {
            auto rng = stream_rng(store.seed, base + i);
            auto drawn = wilson_ust_with_edge(next, u, v, store.root, rng);
            auto& rec = store.records[chosen[i]];
            rec.f = eval(drawn.tree);
            drawn.tree.clear_layout();
            rec.tree = std::move(drawn.tree);
            steps[i] = drawn.walk_steps;
        });
    for (auto s : steps) report.walk_steps += s;
    report.touched = report.wilson_draws = k;
    detail::refresh_retained(store, next, chosen, options);
    g = std::move(next);
    detail::finish(store, g, report, start);
    return report;
}

/// BSM deletion: every sample containing (u, v) is redrawn on g - (u, v).
inline UpdateReport bsm_delete(SampleStore& store, Graph& g, NodeId u, NodeId v, const UpdateOptions& options = {}) {
    const auto start = std::chrono::steady_clock::now();
    Graph next = delete_edge(g, u, v);
    UpdateReport report;
    const auto hit = detail::records_containing(store, u, v);
    if (store.tau0.contains_edge(u, v)) {
        repair_tau0(store, next, options.threads, hit);
        report.tau0_repaired = true;
    }
    const std::uint64_t base = store.next_stream;
    store.next_stream += hit.size();
    store.two_m = next.volume();

    std::vector<std::uint64_t> steps(hit.size(), 0);
    parallel_for(
        hit.size(), options.threads, [&, method = detail::evaluation_method(store, next)] { return Evaluator(next, store.tau0, method); },
        [&](Evaluator& eval, std::size_t i) {
            auto rng = stream_rng(store.seed, base + i);
            auto drawn = wilson_ust(next, store.root, rng);
            auto& rec = store.records[hit[i]];
            rec.f = eval(drawn.tree);
            drawn.tree.clear_layout();
            rec.tree = std::move(drawn.tree);
            steps[i] = drawn.walk_steps;
        });
    for (auto s : steps) report.walk_steps += s;
    report.touched = report.wilson_draws = hit.size();
    if (!report.tau0_repaired) detail::refresh_retained(store, next, hit, options);
    g = std::move(next);
    detail::finish(store, g, report, start);
    return report;
}

/// ISM insertion: ceil(R omega) samples are moved onto (u, v) by link-cut and
/// reweighted by d(tau) / d(tau_e); the transformed group then carries mass R
/// and the rest 1 - R.
inline UpdateReport ism_insert(SampleStore& store, Graph& g, NodeId u, NodeId v, const UpdateOptions& options = {}) {
    const auto start = std::chrono::steady_clock::now();
    Graph next = insert_edge(g, u, v);
    UpdateReport report;
    report.resistance = effective_resistance_iterative(next, u, v, options.resistance_tolerance);
    const std::size_t omega = store.records.size();
    const std::size_t k = replacement_count(report.resistance, omega, options.resistance_tolerance);

    auto select_rng = stream_rng(store.seed, store.next_stream++);
    auto chosen = detail::choose_without_replacement(omega, k, select_rng);
    const std::uint64_t base = store.next_stream;
    store.next_stream += k;
    store.two_m = next.volume();

    const Graph& before = g;
    parallel_for(
        k, options.threads, [&, method = detail::evaluation_method(store, next)] { return Evaluator(next, store.tau0, method); },
        [&](Evaluator& eval, std::size_t i) {
            auto rng = stream_rng(store.seed, base + i);
            auto& rec = store.records[chosen[i]];
            auto moved = link_cut(rec.tree, u, v, rng);
            // in-degree of the new tree: crossing edges of tau_e - e in the old graph
            const auto in_degree = cut_link_candidates(moved.tree, u, v, before).crossing.size();
            rec.weight = rec.weight * static_cast<double>(moved.out_degree) / static_cast<double>(in_degree);
            rec.f = eval(moved.tree);
            moved.tree.clear_layout();
            rec.tree = std::move(moved.tree);
        });
    auto rest = detail::complement(chosen, omega);
    if (rest.empty()) {
        detail::renormalize(store, chosen, 1.0);
    } else {
        detail::renormalize(store, chosen, report.resistance);
        detail::renormalize(store, rest, 1.0 - report.resistance);
    }
    report.touched = k;
    detail::refresh_retained(store, next, chosen, options);
    g = std::move(next);
    detail::finish(store, g, report, start);
    return report;
}

/// ISM deletion: samples containing (u, v) are moved off it by cut-link and
/// reweighted by d(tau_e) / d(tau'); the group keeps its previous total mass.
inline UpdateReport ism_delete(SampleStore& store, Graph& g, NodeId u, NodeId v, const UpdateOptions& options = {}) {
    const auto start = std::chrono::steady_clock::now();
    Graph next = delete_edge(g, u, v);
    UpdateReport report;
    const auto hit = detail::records_containing(store, u, v);
    if (store.tau0.contains_edge(u, v)) {
        repair_tau0(store, next, options.threads, hit);
        report.tau0_repaired = true;
    }
    long double mass = 0.0L;
    for (auto i : hit) mass += store.records[i].weight;
    const std::uint64_t base = store.next_stream;
    store.next_stream += hit.size();
    store.two_m = next.volume();

    parallel_for(
        hit.size(), options.threads, [&, method = detail::evaluation_method(store, next)] { return Evaluator(next, store.tau0, method); },
        [&](Evaluator& eval, std::size_t i) {
            auto rng = stream_rng(store.seed, base + i);
            auto& rec = store.records[hit[i]];
            auto moved = cut_link(rec.tree, u, v, next, rng);
            const auto out_degree = tree_path(moved.tree, u, v).length();
            rec.weight = rec.weight * static_cast<double>(moved.in_degree) / static_cast<double>(out_degree);
            rec.f = eval(moved.tree);
            moved.tree.clear_layout();
            rec.tree = std::move(moved.tree);
        });
    detail::renormalize(store, hit, static_cast<double>(mass));
    report.touched = hit.size();
    if (!report.tau0_repaired) detail::refresh_retained(store, next, hit, options);
    g = std::move(next);
    detail::finish(store, g, report, start);
    return report;
}

enum class UpdateOp { Insert, Delete };

struct UpdateEvent {
    UpdateOp op = UpdateOp::Insert;
    NodeId u = 0;
    NodeId v = 0;

    friend bool operator==(const UpdateEvent&, const UpdateEvent&) = default;
};

/// Applies one event with the store's maintenance mode.
inline UpdateReport apply_update(SampleStore& store, Graph& g, const UpdateEvent& event,
                                 const UpdateOptions& options = {}) {
    const bool bsm = store.mode == MaintenanceMode::Bsm;
    if (event.op == UpdateOp::Insert)
        return bsm ? bsm_insert(store, g, event.u, event.v, options) : ism_insert(store, g, event.u, event.v, options);
    return bsm ? bsm_delete(store, g, event.u, event.v, options) : ism_delete(store, g, event.u, event.v, options);
}

/// Full validation of every stored tree and of the weight invariants; returns
/// an empty string when the store is consistent with g.
inline std::string validate_store(const SampleStore& store, const Graph& g) {
    if (store.two_m != g.volume()) return "2m snapshot does not match graph";
    if (auto msg = validate_tree(store.tau0, g); !msg.empty()) return "reference tree: " + msg;
    if (store.tau0.root() != store.root) return "reference tree root mismatch";
    long double total = 0.0L;
    for (std::size_t i = 0; i < store.records.size(); ++i) {
        const auto& rec = store.records[i];
        if (!(rec.weight > 0.0)) return "sample " + std::to_string(i) + " has non-positive weight";
        total += rec.weight;
        if (rec.tree.root() != store.root) return "sample " + std::to_string(i) + " has wrong root";
        if (auto msg = validate_tree(rec.tree, g); !msg.empty()) return "sample " + std::to_string(i) + ": " + msg;
    }
    if (std::fabs(static_cast<double>(total) - 1.0) > 1e-12) return "weights do not sum to 1";
    return {};
}

}  // namespace kemeny
