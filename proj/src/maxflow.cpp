#include "perclab/maxflow.hpp"

#include <algorithm>

namespace perclab {

int MaxFlow::add_edge(int u, int v, int cap) {
    const int id = static_cast<int>(edges_.size());
    edges_.push_back({v, cap, head_[static_cast<std::size_t>(u)]});
    head_[static_cast<std::size_t>(u)] = id;
    edges_.push_back({u, 0, head_[static_cast<std::size_t>(v)]});
    head_[static_cast<std::size_t>(v)] = id + 1;
    return id;
}

bool MaxFlow::build_levels(int s, int t) {
    level_.assign(head_.size(), -1);
    std::vector<int> queue{s};
    level_[static_cast<std::size_t>(s)] = 0;
    for (std::size_t qi = 0; qi < queue.size(); ++qi) {
        const int u = queue[qi];
        for (int e = head_[static_cast<std::size_t>(u)]; e != -1; e = edges_[static_cast<std::size_t>(e)].next) {
            const Edge& ed = edges_[static_cast<std::size_t>(e)];
            if (ed.cap > 0 && level_[static_cast<std::size_t>(ed.to)] < 0) {
                level_[static_cast<std::size_t>(ed.to)] = level_[static_cast<std::size_t>(u)] + 1;
                queue.push_back(ed.to);
            }
        }
    }
    return level_[static_cast<std::size_t>(t)] >= 0;
}

int MaxFlow::augment(int u, int t, int pushed) {
    if (u == t) return pushed;
    for (int& e = cursor_[static_cast<std::size_t>(u)]; e != -1; e = edges_[static_cast<std::size_t>(e)].next) {
        Edge& ed = edges_[static_cast<std::size_t>(e)];
        if (ed.cap <= 0 || level_[static_cast<std::size_t>(ed.to)] != level_[static_cast<std::size_t>(u)] + 1) continue;
        const int got = augment(ed.to, t, std::min(pushed, ed.cap));
        if (got > 0) {
            ed.cap -= got;
            edges_[static_cast<std::size_t>(e ^ 1)].cap += got;
            return got;
        }
    }
    return 0;
}

int MaxFlow::run(int s, int t, int limit) {
    if (s == t) return 0;
    int total = 0;
    while (total < limit && build_levels(s, t)) {
        cursor_ = head_;
        while (total < limit) {
            const int got = augment(s, t, limit - total);
            if (got == 0) break;
            total += got;
        }
    }
    return total;
}

std::vector<bool> MaxFlow::source_side(int s) const {
    std::vector<bool> seen(head_.size(), false);
    std::vector<int> stack{s};
    seen[static_cast<std::size_t>(s)] = true;
    while (!stack.empty()) {
        const int u = stack.back();
        stack.pop_back();
        for (int e = head_[static_cast<std::size_t>(u)]; e != -1; e = edges_[static_cast<std::size_t>(e)].next) {
            const Edge& ed = edges_[static_cast<std::size_t>(e)];
            if (ed.cap > 0 && !seen[static_cast<std::size_t>(ed.to)]) {
                seen[static_cast<std::size_t>(ed.to)] = true;
                stack.push_back(ed.to);
            }
        }
    }
    return seen;
}

std::vector<int> MaxFlow::out_edges(int u) const {
    std::vector<int> out;
    for (int e = head_[static_cast<std::size_t>(u)]; e != -1; e = edges_[static_cast<std::size_t>(e)].next) out.push_back(e);
    return out;
}

}  // namespace perclab
