// Induced lattice subgraphs on site sets, stored as compressed adjacency lists.
#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "perclab/lattice.hpp"
#include "perclab/percolation.hpp"

namespace perclab {

class SiteGraph {
public:
    SiteGraph() = default;
    /// `sites` are row-major indices of `box`, sorted ascending.
    SiteGraph(const Box& box, std::vector<std::uint32_t> sites);

    static SiteGraph cluster(const ClusterLabeling& labeling, Color color, int id);
    static SiteGraph cluster_of(const ClusterLabeling& labeling, TriCoord site);

    const Box& box() const { return box_; }
    int size() const { return static_cast<int>(sites_.size()); }
    TriCoord site(int v) const { return box_.site(sites_[static_cast<std::size_t>(v)]); }
    std::uint32_t box_index(int v) const { return sites_[static_cast<std::size_t>(v)]; }
    const std::vector<std::uint32_t>& box_indices() const { return sites_; }
    /// Local vertex of `s`, or -1 when `s` is not in the graph.
    int local(TriCoord s) const;

    std::span<const int> neighbors(int v) const {
        return {adj_.data() + offsets_[static_cast<std::size_t>(v)],
                adj_.data() + offsets_[static_cast<std::size_t>(v) + 1]};
    }
    int degree(int v) const {
        return offsets_[static_cast<std::size_t>(v) + 1] - offsets_[static_cast<std::size_t>(v)];
    }
    std::size_t edge_count() const { return adj_.size() / 2; }

private:
    Box box_{};
    std::vector<std::uint32_t> sites_;
    std::vector<int> offsets_{0};
    std::vector<int> adj_;
};

/// Hop distances from the sources; -1 marks unreachable vertices.
std::vector<int> bfs_distances(const SiteGraph& graph, std::span<const int> sources);
std::vector<int> bfs_distances(const SiteGraph& graph, int source);

/// One shortest path from `from` to `to` as local vertices, or empty.
std::vector<int> bfs_path(const SiteGraph& graph, int from, int to);

}  // namespace perclab
