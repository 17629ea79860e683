// Dinic's algorithm on small integer-capacity networks.
#pragma once

#include <climits>
#include <cstdint>
#include <vector>

namespace perclab {

class MaxFlow {
public:
    explicit MaxFlow(int nodes) : head_(static_cast<std::size_t>(nodes), -1) {}

    /// Adds u -> v with capacity `cap`; returns the edge id.
    int add_edge(int u, int v, int cap);

    /// Pushes up to `limit` units from s to t and returns the amount pushed.
    int run(int s, int t, int limit = INT_MAX);

    int flow(int edge) const { return edges_[static_cast<std::size_t>(edge ^ 1)].cap; }
    int edge_to(int edge) const { return edges_[static_cast<std::size_t>(edge)].to; }
    int nodes() const { return static_cast<int>(head_.size()); }

    /// Nodes reachable from the source in the residual network after run().
    std::vector<bool> source_side(int s) const;

    /// Outgoing edge ids of `u`, including reverse edges (odd ids).
    std::vector<int> out_edges(int u) const;

private:
    struct Edge {
        int to;
        int cap;
        int next;
    };
    bool build_levels(int s, int t);
    int augment(int u, int t, int pushed);

    std::vector<int> head_;
    std::vector<Edge> edges_;
    std::vector<int> level_;
    std::vector<int> cursor_;
};

}  // namespace perclab
