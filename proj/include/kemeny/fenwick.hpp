#pragma once

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace kemeny {

/// Binary indexed tree over a difference array: range add, point query.
/// Indices are 1-based so DFN stamps can be used directly.
template <typename T = std::int64_t>
class FenwickTree {
public:
    FenwickTree() = default;
    explicit FenwickTree(std::size_t size) : tree_(size + 1, T{}) {}

    std::size_t size() const noexcept { return tree_.empty() ? 0 : tree_.size() - 1; }

    void reset(std::size_t size) { tree_.assign(size + 1, T{}); }

    /// Adds v to every element in [l, r].
    void add(std::size_t l, std::size_t r, T v) {
        if (l < 1 || l > r || r > size())
            throw std::out_of_range("fenwick add [" + std::to_string(l) + ", " + std::to_string(r) +
                                    "] outside [1, " + std::to_string(size()) + "]");
        point_add(l, v);
        if (r + 1 <= size()) point_add(r + 1, -v);
    }

    /// Current value of element i (prefix sum of the difference array).
    T query(std::size_t i) const {
        if (i < 1 || i > size())
            throw std::out_of_range("fenwick query " + std::to_string(i) + " outside [1, " +
                                    std::to_string(size()) + "]");
        T sum{};
        for (; i > 0; i -= i & (~i + 1)) sum += tree_[i];
        return sum;
    }

    bool all_zero() const {
        for (const auto& x : tree_)
            if (x != T{}) return false;
        return true;
    }

private:
    void point_add(std::size_t i, T v) {
        for (; i < tree_.size(); i += i & (~i + 1)) tree_[i] += v;
    }

    std::vector<T> tree_;
};

}  // namespace kemeny
