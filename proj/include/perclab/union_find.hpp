#pragma once

#include <cstdint>
#include <numeric>
#include <utility>
#include <vector>

namespace perclab {

/// Disjoint sets with union by size and path halving.
class UnionFind {
public:
    UnionFind() = default;
    explicit UnionFind(std::size_t n) { reset(n); }

    void reset(std::size_t n) {
        parent_.resize(n);
        std::iota(parent_.begin(), parent_.end(), 0u);
        size_.assign(n, 1u);
    }

    std::uint32_t find(std::uint32_t x) {
        while (parent_[x] != x) {
            parent_[x] = parent_[parent_[x]];
            x = parent_[x];
        }
        return x;
    }

    /// Returns the surviving root.
    std::uint32_t unite(std::uint32_t x, std::uint32_t y) {
        x = find(x);
        y = find(y);
        if (x == y) return x;
        if (size_[x] < size_[y]) std::swap(x, y);
        parent_[y] = x;
        size_[x] += size_[y];
        return x;
    }

    /// Makes `x` a singleton again; only valid when nothing points to it.
    void make_root(std::uint32_t x) {
        parent_[x] = x;
        size_[x] = 1;
    }

    std::uint32_t set_size(std::uint32_t x) { return size_[find(x)]; }
    std::size_t size() const { return parent_.size(); }

private:
    std::vector<std::uint32_t> parent_;
    std::vector<std::uint32_t> size_;
};

}  // namespace perclab
