#include "perclab/graph.hpp"

#include <algorithm>
#include <stdexcept>

namespace perclab {

SiteGraph::SiteGraph(const Box& box, std::vector<std::uint32_t> sites)
    : box_(box), sites_(std::move(sites)) {
    offsets_.assign(sites_.size() + 1, 0);
    adj_.clear();
    adj_.reserve(sites_.size() * 6);
    for (std::size_t v = 0; v < sites_.size(); ++v) {
        const TriCoord s = box_.site(sites_[v]);
        for (const TriCoord& off : kNeighborOffsets) {
            const int w = local(s + off);
            if (w >= 0) adj_.push_back(w);
        }
        offsets_[v + 1] = static_cast<int>(adj_.size());
    }
}

SiteGraph SiteGraph::cluster(const ClusterLabeling& labeling, Color color, int id) {
    const auto members = labeling.members(color, id);
    return SiteGraph(labeling.box(), std::vector<std::uint32_t>(members.begin(), members.end()));
}

SiteGraph SiteGraph::cluster_of(const ClusterLabeling& labeling, TriCoord site) {
    return cluster(labeling, labeling.color(site), labeling.label(site));
}

int SiteGraph::local(TriCoord s) const {
    if (!box_.contains(s)) return -1;
    const auto key = static_cast<std::uint32_t>(box_.index(s));
    const auto it = std::lower_bound(sites_.begin(), sites_.end(), key);
    if (it == sites_.end() || *it != key) return -1;
    return static_cast<int>(it - sites_.begin());
}

std::vector<int> bfs_distances(const SiteGraph& graph, std::span<const int> sources) {
    std::vector<int> dist(static_cast<std::size_t>(graph.size()), -1);
    std::vector<int> queue;
    queue.reserve(static_cast<std::size_t>(graph.size()));
    for (int s : sources) {
        if (dist[static_cast<std::size_t>(s)] < 0) {
            dist[static_cast<std::size_t>(s)] = 0;
            queue.push_back(s);
        }
    }
    for (std::size_t q = 0; q < queue.size(); ++q) {
        const int u = queue[q];
        for (int w : graph.neighbors(u)) {
            if (dist[static_cast<std::size_t>(w)] < 0) {
                dist[static_cast<std::size_t>(w)] = dist[static_cast<std::size_t>(u)] + 1;
                queue.push_back(w);
            }
        }
    }
    return dist;
}

std::vector<int> bfs_distances(const SiteGraph& graph, int source) {
    const int sources[] = {source};
    return bfs_distances(graph, sources);
}

std::vector<int> bfs_path(const SiteGraph& graph, int from, int to) {
    const auto dist = bfs_distances(graph, to);
    if (dist[static_cast<std::size_t>(from)] < 0) return {};
    std::vector<int> path{from};
    while (path.back() != to) {
        const int u = path.back();
        for (int w : graph.neighbors(u)) {
            if (dist[static_cast<std::size_t>(w)] == dist[static_cast<std::size_t>(u)] - 1) {
                path.push_back(w);
                break;
            }
        }
    }
    return path;
}

}  // namespace perclab
