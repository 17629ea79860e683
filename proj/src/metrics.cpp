#include "perclab/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "perclab/graph.hpp"
#include "perclab/union_find.hpp"

namespace perclab {

HopDistance geodesic_distance(const ClusterLabeling& labeling, TriCoord x, TriCoord y) {
    if (!labeling.same_cluster(x, y)) return std::nullopt;
    if (x == y) return 0;
    const SiteGraph g = SiteGraph::cluster_of(labeling, x);
    return bfs_distances(g, g.local(x))[static_cast<std::size_t>(g.local(y))];
}

PathBracket path_metric_bracket(const ClusterLabeling& labeling, TriCoord x, TriCoord y, int n) {
    if (!labeling.same_cluster(x, y)) {
        throw std::invalid_argument("path_metric_bracket: sites are not in one cluster");
    }
    const double scale = n > 0 ? n : labeling.box().side;
    if (x == y) return {0.0, 0.0};
    const SiteGraph g = SiteGraph::cluster_of(labeling, x);
    const int m = g.size();
    std::vector<std::int64_t> key(static_cast<std::size_t>(m));
    for (int v = 0; v < m; ++v) {
        const TriCoord z = g.site(v);
        key[static_cast<std::size_t>(v)] = std::max(euclid_distance_sq4(z, x), euclid_distance_sq4(z, y));
    }
    std::vector<int> order(static_cast<std::size_t>(m));
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](int a, int b) {
        return key[static_cast<std::size_t>(a)] < key[static_cast<std::size_t>(b)];
    });
    const auto lx = static_cast<std::uint32_t>(g.local(x));
    const auto ly = static_cast<std::uint32_t>(g.local(y));
    UnionFind uf(static_cast<std::size_t>(m));
    std::vector<bool> added(static_cast<std::size_t>(m), false);
    std::int64_t threshold = 0;
    for (int v : order) {
        added[static_cast<std::size_t>(v)] = true;
        for (int w : g.neighbors(v)) {
            if (added[static_cast<std::size_t>(w)]) uf.unite(static_cast<std::uint32_t>(v), static_cast<std::uint32_t>(w));
        }
        if (added[lx] && added[ly] && uf.find(lx) == uf.find(ly)) {
            threshold = key[static_cast<std::size_t>(v)];
            break;
        }
    }
    // Shortest path inside the lens of radius lo.
    std::vector<int> prev(static_cast<std::size_t>(m), -1);
    std::vector<int> queue{static_cast<int>(lx)};
    prev[lx] = static_cast<int>(lx);
    for (std::size_t q = 0; q < queue.size() && prev[ly] < 0; ++q) {
        for (int w : g.neighbors(queue[q])) {
            if (prev[static_cast<std::size_t>(w)] < 0 && key[static_cast<std::size_t>(w)] <= threshold) {
                prev[static_cast<std::size_t>(w)] = queue[q];
                queue.push_back(w);
            }
        }
    }
    std::vector<std::uint32_t> path;
    for (int v = static_cast<int>(ly);; v = prev[static_cast<std::size_t>(v)]) {
        path.push_back(g.box_index(v));
        if (v == static_cast<int>(lx)) break;
    }
    std::sort(path.begin(), path.end());
    PathBracket out;
    out.lo = std::sqrt(static_cast<double>(threshold)) / 2.0 / scale;
    out.hi = euclidean_diameter(g.box(), path) / scale;
    return out;
}

RescaledSample rescale(const MetricSample& sample, double q_geo, double q_res) {
    if (!(q_geo > 0.0) || !(q_res > 0.0)) throw std::invalid_argument("rescale: constants must be positive");
    RescaledSample out;
    out.x = sample.x;
    out.y = sample.y;
    if (sample.d_geo) out.d_geo = *sample.d_geo / q_geo;
    if (sample.d_res) out.d_res = *sample.d_res / q_res;
    out.d_path_lo = sample.d_path_lo;
    out.d_path_hi = sample.d_path_hi;
    return out;
}

MetricSample measure_pair(const ClusterLabeling& labeling, TriCoord x, TriCoord y, int n) {
    MetricSample s;
    s.x = x;
    s.y = y;
    s.d_geo = geodesic_distance(labeling, x, y);
    if (s.d_geo) {
        const PathBracket b = path_metric_bracket(labeling, x, y, n);
        s.d_path_lo = b.lo;
        s.d_path_hi = b.hi;
    }
    return s;
}

}  // namespace perclab
