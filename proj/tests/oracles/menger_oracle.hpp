// Brute-force Menger oracle: smallest inner/outer vertex separator of the
// same-color subgraph of a small annulus.
#pragma once

#include <bit>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "perclab/arms.hpp"

namespace perclab::oracle {

// Same-color subgraph of an annulus as bitmasks over at most 64 sites.
struct SmallGraph {
    int m = 0;
    std::vector<std::uint64_t> adj;
    std::uint64_t inner = 0;
    std::uint64_t outer = 0;
};

inline SmallGraph annulus_graph(const Configuration& cfg, const Annulus& ann, bool half, Color color) {
    SmallGraph g;
    std::vector<TriCoord> sites;
    for (std::size_t i = 0; i < cfg.box().size(); ++i) {
        const TriCoord s = cfg.box().site(i);
        if (in_arm_region(ann, half, s) && cfg.has_color(s, color)) sites.push_back(s);
    }
    if (sites.size() > 64) throw std::length_error("annulus_graph: more than 64 sites");
    g.m = static_cast<int>(sites.size());
    g.adj.assign(sites.size(), 0);
    for (int i = 0; i < g.m; ++i) {
        const int d = sup_distance(sites[i], ann.center);
        if (d == ann.inner_ring()) g.inner |= 1ull << i;
        if (d == ann.outer_ring()) g.outer |= 1ull << i;
        for (int j = 0; j < g.m; ++j) {
            if (adjacent(sites[i], sites[j])) g.adj[i] |= 1ull << j;
        }
    }
    return g;
}

// Vertices of a shortest inner-to-outer path avoiding `removed`, or empty.
inline std::vector<int> shortest_path(const SmallGraph& g, std::uint64_t removed) {
    std::vector<std::uint64_t> layers{g.inner & ~removed};
    std::uint64_t seen = layers[0];
    while (layers.back() && !(layers.back() & g.outer)) {
        std::uint64_t next = 0;
        for (std::uint64_t r = layers.back(); r; r &= r - 1) next |= g.adj[std::countr_zero(r)];
        next &= ~removed & ~seen;
        seen |= next;
        layers.push_back(next);
    }
    if (!layers.back()) return {};
    std::vector<int> path{std::countr_zero(layers.back() & g.outer)};
    for (std::size_t k = layers.size() - 1; k > 0; --k) {
        path.push_back(std::countr_zero(layers[k - 1] & g.adj[path.back()]));
    }
    return path;
}

// Every separator must contain a vertex of any crossing path, so branching on
// the vertices of a shortest path explores all separators of size <= k.
inline bool separable(const SmallGraph& g, std::uint64_t removed, int k) {
    const auto path = shortest_path(g, removed);
    if (path.empty()) return true;
    if (k == 0) return false;
    for (int v : path) {
        if (separable(g, removed | (1ull << v), k - 1)) return true;
    }
    return false;
}

// Smallest inner/outer vertex separator by exhaustive search; by Menger this
// is the maximum number of vertex-disjoint crossings.
inline int brute_force_menger(const SmallGraph& g) {
    int k = 0;
    while (!separable(g, 0, k)) ++k;
    return k;
}

}  // namespace perclab::oracle
