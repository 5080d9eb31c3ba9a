#pragma once

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "kemeny/error.hpp"
#include "kemeny/graph.hpp"

namespace kemeny {

struct SolveStats {
    std::size_t iterations = 0;
    double relative_residual = 0.0;
};

/// Effective resistance between u and v by Jacobi-preconditioned conjugate
/// gradients on L x = e_u - e_v. Stops once ||r|| <= rel_tol * ||b||; throws
/// ConvergenceError after max_iterations (0 selects 10 n).
inline double effective_resistance_iterative(const Graph& g, NodeId u, NodeId v, double rel_tol = 1e-8,
                                             std::size_t max_iterations = 0, SolveStats* stats = nullptr) {
    const std::size_t n = g.node_count();
    if (u == v) throw InvalidArgumentError("effective resistance needs distinct nodes");
    if (u >= n || v >= n) throw InvalidArgumentError("node out of range");
    if (max_iterations == 0) max_iterations = 10 * n;

    auto apply_laplacian = [&](const std::vector<double>& x, std::vector<double>& out) {
        for (NodeId i = 0; i < n; ++i) {
            double acc = static_cast<double>(g.degree(i)) * x[i];
            for (NodeId j : g.neighbors(i)) acc -= x[j];
            out[i] = acc;
        }
    };
    auto dot = [](const std::vector<double>& a, const std::vector<double>& b) {
        double s = 0.0;
        for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
        return s;
    };

    std::vector<double> x(n, 0.0), r(n, 0.0), z(n), p(n), lp(n);
    r[u] = 1.0;
    r[v] = -1.0;
    const double b_norm = std::sqrt(2.0);
    for (std::size_t i = 0; i < n; ++i) z[i] = r[i] / static_cast<double>(g.degree(static_cast<NodeId>(i)));
    p = z;
    double rz = dot(r, z);
    std::size_t it = 0;
    double residual = 1.0;
    while (true) {
        apply_laplacian(p, lp);
        const double alpha = rz / dot(p, lp);
        for (std::size_t i = 0; i < n; ++i) {
            x[i] += alpha * p[i];
            r[i] -= alpha * lp[i];
        }
        ++it;
        residual = std::sqrt(dot(r, r)) / b_norm;
        if (residual <= rel_tol) break;
        if (it >= max_iterations)
            throw ConvergenceError("conjugate gradient did not reach " + std::to_string(rel_tol) + " within " +
                                   std::to_string(max_iterations) + " iterations (residual " +
                                   std::to_string(residual) + ")");
        for (std::size_t i = 0; i < n; ++i) z[i] = r[i] / static_cast<double>(g.degree(static_cast<NodeId>(i)));
        const double rz_next = dot(r, z);
        const double beta = rz_next / rz;
        rz = rz_next;
        for (std::size_t i = 0; i < n; ++i) p[i] = z[i] + beta * p[i];
    }
    // pin the solution to the zero-sum subspace
    double mean = 0.0;
    for (double xi : x) mean += xi;
    mean /= static_cast<double>(n);
    for (double& xi : x) xi -= mean;
    if (stats) *stats = {it, residual};
    return x[u] - x[v];
}

}  // namespace kemeny
