#include "perclab/arms.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "perclab/maxflow.hpp"
#include "perclab/parallel.hpp"
#include "perclab/rng.hpp"
#include "perclab/union_find.hpp"

namespace perclab {

ColorSequence parse_sigma(std::string_view text) {
    ColorSequence sigma;
    for (char ch : text) {
        switch (ch) {
            case 'O': case 'o': case '1': sigma.push_back(Color::Open); break;
            case 'C': case 'c': case '0': sigma.push_back(Color::Closed); break;
            default: throw std::invalid_argument("parse_sigma: unexpected character '" + std::string(1, ch) + "'");
        }
    }
    if (sigma.empty()) throw std::invalid_argument("parse_sigma: empty color sequence");
    return sigma;
}

std::string sigma_string(const ColorSequence& sigma) {
    std::string out;
    for (Color c : sigma) out.push_back(color_letter(c));
    return out;
}

double ArmCount::estimate() const {
    return n_samples == 0 ? 0.0 : static_cast<double>(n_hits) / static_cast<double>(n_samples);
}

double ArmCount::standard_error() const {
    if (n_samples == 0) return 0.0;
    const double q = estimate();
    return std::sqrt(q * (1.0 - q) / static_cast<double>(n_samples));
}

bool in_arm_region(const Annulus& annulus, bool half_plane, TriCoord site) {
    const int d = sup_distance(site, annulus.center);
    if (d < annulus.inner_ring() || d > annulus.outer_ring()) return false;
    return !half_plane || site.b >= annulus.center.b;
}

namespace {

void check_region(const Configuration& cfg, const Annulus& annulus, bool half_plane) {
    if (annulus.r_in < 1 || annulus.r_in >= annulus.r_out) {
        throw std::invalid_argument("annulus: need 1 <= r_in < r_out");
    }
    Box need = annulus.outer_box();
    if (half_plane) {
        const int top = need.lo.b + need.side;
        need.lo.b = annulus.center.b;
        if (!cfg.box().contains(need.lo) || !cfg.box().contains(TriCoord{need.lo.a + need.side - 1, top - 1})) {
            throw std::invalid_argument("annulus: half-annulus not contained in the box");
        }
        return;
    }
    if (!cfg.box().contains(need)) throw std::invalid_argument("annulus: not contained in the box");
}

const std::vector<TriCoord>& outer_sites(const Annulus& annulus, bool half_plane,
                                         std::vector<TriCoord>& storage) {
    storage = half_plane ? half_ring_sites(annulus.center, annulus.outer_ring())
                         : ring_sites(annulus.center, annulus.outer_ring());
    return storage;
}

// Vertex-disjoint inner-to-outer paths through the sites accepted by `keep`.
template <class Keep>
int disjoint_arms(const Annulus& annulus, bool half_plane, Keep keep, int limit) {
    const Box ob = annulus.outer_box();
    std::vector<int> node(ob.size(), -1);
    std::vector<TriCoord> sites;
    for (std::size_t i = 0; i < ob.size(); ++i) {
        const TriCoord s = ob.site(i);
        if (in_arm_region(annulus, half_plane, s) && keep(s)) {
            node[i] = static_cast<int>(sites.size());
            sites.push_back(s);
        }
    }
    const int m = static_cast<int>(sites.size());
    const int source = 2 * m;
    const int sink = 2 * m + 1;
    MaxFlow flow(2 * m + 2);
    for (int v = 0; v < m; ++v) {
        const TriCoord s = sites[static_cast<std::size_t>(v)];
        flow.add_edge(2 * v, 2 * v + 1, 1);
        const int d = sup_distance(s, annulus.center);
        if (d == annulus.inner_ring()) flow.add_edge(source, 2 * v, 1);
        if (d == annulus.outer_ring()) flow.add_edge(2 * v + 1, sink, 1);
        for (const TriCoord& off : kNeighborOffsets) {
            const TriCoord y = s + off;
            if (!ob.contains(y)) continue;
            const int w = node[ob.index(y)];
            if (w >= 0) flow.add_edge(2 * v + 1, 2 * w, 1);
        }
    }
    return flow.run(source, sink, limit);
}

}  // namespace

int count_disjoint_monochromatic(const Configuration& cfg, const Annulus& annulus, Color color,
                                 bool half_plane) {
    check_region(cfg, annulus, half_plane);
    return disjoint_arms(annulus, half_plane, [&](TriCoord s) { return cfg.has_color(s, color); },
                         INT_MAX);
}

CrossingWord crossing_word(const Configuration& cfg, const Annulus& annulus, bool half_plane,
                           int capacity_cap) {
    check_region(cfg, annulus, half_plane);
    const Box ob = annulus.outer_box();
    UnionFind uf(ob.size());
    std::vector<std::uint8_t> inner(ob.size(), 0);
    for (std::size_t i = 0; i < ob.size(); ++i) {
        const TriCoord s = ob.site(i);
        if (!in_arm_region(annulus, half_plane, s)) continue;
        for (const TriCoord& off : kNeighborOffsets) {
            const TriCoord y = s + off;
            if (ob.contains(y) && in_arm_region(annulus, half_plane, y) &&
                cfg.is_open(y) == cfg.is_open(s)) {
                uf.unite(static_cast<std::uint32_t>(i), static_cast<std::uint32_t>(ob.index(y)));
            }
        }
    }
    for (std::size_t i = 0; i < ob.size(); ++i) {
        const TriCoord s = ob.site(i);
        if (in_arm_region(annulus, half_plane, s) && sup_distance(s, annulus.center) == annulus.inner_ring()) {
            inner[uf.find(static_cast<std::uint32_t>(i))] = 1;
        }
    }
    std::vector<TriCoord> storage;
    std::vector<std::uint32_t> roots;
    CrossingWord word;
    word.cyclic = !half_plane;
    for (const TriCoord& s : outer_sites(annulus, half_plane, storage)) {
        const std::uint32_t root = uf.find(static_cast<std::uint32_t>(ob.index(s)));
        if (!inner[root]) continue;
        if (!roots.empty() && roots.back() == root) continue;
        roots.push_back(root);
        word.colors.push_back(cfg.color(s));
    }
    if (word.cyclic && roots.size() > 1 && roots.front() == roots.back()) {
        roots.pop_back();
        word.colors.pop_back();
    }
    word.capacity.assign(roots.size(), 1);
    if (capacity_cap > 1) {
        for (std::size_t k = 0; k < roots.size(); ++k) {
            const std::uint32_t root = roots[k];
            word.capacity[k] = disjoint_arms(
                annulus, half_plane,
                [&](TriCoord s) { return uf.find(static_cast<std::uint32_t>(ob.index(s))) == root; },
                capacity_cap);
        }
    }
    return word;
}

namespace {

bool greedy_embed(const std::vector<Color>& colors, const std::vector<int>& capacity,
                  const ColorSequence& sigma, std::size_t rot, std::size_t start) {
    const std::size_t n = colors.size();
    std::size_t off = 0;
    int used = 0;
    for (std::size_t k = 0; k < sigma.size(); ++k) {
        const Color c = sigma[(rot + k) % sigma.size()];
        while (off < n) {
            const std::size_t idx = (start + off) % n;
            if (colors[idx] == c && used < capacity[idx]) break;
            ++off;
            used = 0;
        }
        if (off >= n) return false;
        ++used;
    }
    return true;
}

}  // namespace

bool word_matches(const CrossingWord& word, const ColorSequence& sigma) {
    if (sigma.empty()) return true;
    // The word is read counterclockwise; sigma is clockwise.
    std::vector<Color> colors(word.colors.rbegin(), word.colors.rend());
    std::vector<int> capacity(word.capacity.rbegin(), word.capacity.rend());
    if (capacity.size() != colors.size()) capacity.assign(colors.size(), 1);
    if (colors.empty()) return false;
    if (!word.cyclic) return greedy_embed(colors, capacity, sigma, 0, 0);
    for (std::size_t rot = 0; rot < sigma.size(); ++rot) {
        for (std::size_t start = 0; start < colors.size(); ++start) {
            if (greedy_embed(colors, capacity, sigma, rot, start)) return true;
        }
    }
    return false;
}

int longest_run(const ColorSequence& sigma, bool cyclic) {
    if (sigma.empty()) return 0;
    if (std::all_of(sigma.begin(), sigma.end(), [&](Color c) { return c == sigma[0]; })) {
        return static_cast<int>(sigma.size());
    }
    int best = 1, run = 1;
    for (std::size_t i = 1; i < sigma.size(); ++i) {
        run = sigma[i] == sigma[i - 1] ? run + 1 : 1;
        best = std::max(best, run);
    }
    if (cyclic && sigma.front() == sigma.back()) {
        std::size_t head = 0, tail = 0;
        while (sigma[head] == sigma.front()) ++head;
        while (sigma[sigma.size() - 1 - tail] == sigma.back()) ++tail;
        best = std::max(best, static_cast<int>(head + tail));
    }
    return best;
}

bool has_alternating_arms(const Configuration& cfg, const ArmQuery& query) {
    const auto& sigma = query.sigma;
    if (sigma.empty()) throw std::invalid_argument("has_alternating_arms: empty color sequence");
    if (sigma.size() == 1) {
        return count_disjoint_monochromatic(cfg, query.annulus, sigma[0], query.half_plane) >= 1;
    }
    const bool mixed = std::any_of(sigma.begin(), sigma.end(), [&](Color c) { return c != sigma[0]; });
    if (query.half_plane && mixed && query.annulus.center.b != cfg.box().lo.b) {
        throw std::invalid_argument("has_alternating_arms: half-plane annulus must sit on the bottom side");
    }
    const int cap = longest_run(sigma, !query.half_plane);
    CrossingWord word = crossing_word(cfg, query.annulus, query.half_plane, cap);
    return word_matches(word, sigma);
}

std::vector<TriCoord> find_pivotals(const Configuration& cfg) {
    const Box& box = cfg.box();
    const int n = static_cast<int>(box.size());
    const int source = n;
    const int sink = n + 1;
    const int left = box.lo.a;
    const int right = box.lo.a + box.side - 1;

    // Neighbours of a node as a list; the virtual source touches the open left
    // column and the virtual sink the open right column.
    auto adjacency = [&](int u, std::vector<int>& out) {
        out.clear();
        if (u == source || u == sink) {
            const int a = u == source ? left : right;
            for (int b = box.lo.b; b < box.lo.b + box.side; ++b) {
                if (cfg.is_open(TriCoord{a, b})) out.push_back(static_cast<int>(box.index({a, b})));
            }
            return;
        }
        const TriCoord s = box.site(static_cast<std::size_t>(u));
        for (const TriCoord& off : kNeighborOffsets) {
            const TriCoord y = s + off;
            if (box.contains(y) && cfg.is_open(y)) out.push_back(static_cast<int>(box.index(y)));
        }
        if (s.a == left) out.push_back(source);
        if (s.a == right) out.push_back(sink);
    };

    std::vector<int> disc(static_cast<std::size_t>(n + 2), -1);
    std::vector<int> low(static_cast<std::size_t>(n + 2), 0);
    std::vector<int> parent(static_cast<std::size_t>(n + 2), -1);
    struct Frame {
        int node;
        std::vector<int> nbrs;
        std::size_t next;
    };
    std::vector<Frame> stack;
    int clock = 0;
    disc[static_cast<std::size_t>(source)] = low[static_cast<std::size_t>(source)] = clock++;
    stack.push_back({source, {}, 0});
    adjacency(source, stack.back().nbrs);
    while (!stack.empty()) {
        Frame& f = stack.back();
        if (f.next < f.nbrs.size()) {
            const int w = f.nbrs[f.next++];
            const int u = f.node;
            if (disc[static_cast<std::size_t>(w)] < 0) {
                parent[static_cast<std::size_t>(w)] = u;
                disc[static_cast<std::size_t>(w)] = low[static_cast<std::size_t>(w)] = clock++;
                Frame next{w, {}, 0};
                adjacency(w, next.nbrs);
                stack.push_back(std::move(next));
            } else if (w != parent[static_cast<std::size_t>(u)]) {
                low[static_cast<std::size_t>(u)] =
                    std::min(low[static_cast<std::size_t>(u)], disc[static_cast<std::size_t>(w)]);
            }
        } else {
            const int u = f.node;
            stack.pop_back();
            if (!stack.empty()) {
                const int p = stack.back().node;
                low[static_cast<std::size_t>(p)] =
                    std::min(low[static_cast<std::size_t>(p)], low[static_cast<std::size_t>(u)]);
            }
        }
    }
    if (disc[static_cast<std::size_t>(sink)] < 0) {
        throw std::invalid_argument("find_pivotals: no open left-right crossing");
    }
    std::vector<TriCoord> out;
    int child = sink;
    for (int v = parent[static_cast<std::size_t>(sink)]; v != source; v = parent[static_cast<std::size_t>(v)]) {
        if (low[static_cast<std::size_t>(child)] >= disc[static_cast<std::size_t>(v)]) {
            out.push_back(box.site(static_cast<std::size_t>(v)));
        }
        child = v;
    }
    std::sort(out.begin(), out.end(), left_of);
    return out;
}

OutwardExplorer::OutwardExplorer(int max_radius)
    : max_radius_(max_radius), box_(ball({0, 0}, max_radius)) {
    if (max_radius < 1) throw std::invalid_argument("OutwardExplorer: radius must be >= 1");
    visited_.assign((box_.size() + 63) / 64, 0);
    other_.assign((box_.size() + 63) / 64, 0);
}

void OutwardExplorer::clear() {
    for (std::size_t i : touched_) {
        visited_[i >> 6] = 0;
        other_[i >> 6] = 0;
    }
    touched_.clear();
}

int OutwardExplorer::explore(std::uint64_t seed, double p, Color color, int inner, int stop,
                             bool half_plane) {
    if (stop > max_radius_ - 1) throw std::invalid_argument("OutwardExplorer: stop beyond radius");
    const OpenThreshold threshold(p);
    const bool want_open = color == Color::Open;
    auto has_color = [&](TriCoord s) { return threshold.open(site_uniform(seed, s)) == want_open; };
    auto inside = [&](TriCoord s) {
        const int d = sup_distance(s, {0, 0});
        return d >= inner && d <= stop && (!half_plane || s.b >= 0);
    };
    clear();
    stack_.clear();
    int best = inner - 1;
    const auto seeds = half_plane ? half_ring_sites({0, 0}, inner) : ring_sites({0, 0}, inner);
    for (const TriCoord& s : seeds) {
        const std::size_t i = box_.index(s);
        if (test(visited_, i) || test(other_, i)) continue;
        if (!has_color(s)) {
            set(other_, i);
            continue;
        }
        set(visited_, i);
        stack_.push_back(s);
        while (!stack_.empty()) {
            const TriCoord x = stack_.back();
            stack_.pop_back();
            const int dx = sup_distance(x, {0, 0});
            best = std::max(best, dx);
            if (best >= stop) {
                stack_.clear();
                return best;
            }
            // Push inward and sideways steps first so outward steps pop first.
            TriCoord order[6];
            int count = 0;
            for (int pass = -1; pass <= 1; ++pass) {
                for (const TriCoord& off : kNeighborOffsets) {
                    const TriCoord y = x + off;
                    if (sup_distance(y, {0, 0}) - dx == pass) order[count++] = y;
                }
            }
            for (int k = 0; k < count; ++k) {
                const TriCoord y = order[k];
                if (!inside(y)) continue;
                const std::size_t j = box_.index(y);
                if (test(visited_, j) || test(other_, j)) continue;
                if (has_color(y)) {
                    set(visited_, j);
                    stack_.push_back(y);
                } else {
                    set(other_, j);
                }
            }
        }
    }
    return best;
}

ArmScanner::ArmScanner(int r, int r_max, ColorSequence sigma, bool half_plane, double p)
    : r_(r), r_max_(r_max), sigma_(std::move(sigma)), half_(half_plane), p_(p),
      box_(ball({0, 0}, r_max)) {
    if (r < 1 || r_max < r) throw std::invalid_argument("ArmScanner: need 1 <= r <= r_max");
    if (sigma_.empty()) throw std::invalid_argument("ArmScanner: empty color sequence");
    if (sigma_.size() == 1) {
        explorer_ = std::make_unique<OutwardExplorer>(r_max);
        return;
    }
    if (longest_run(sigma_, !half_) == 1) {
        rings_.resize(static_cast<std::size_t>(r_max));
        for (int d = 0; d < r_max; ++d) {
            rings_[static_cast<std::size_t>(d)] = half_ ? half_ring_sites({0, 0}, d) : ring_sites({0, 0}, d);
        }
        parent_.assign(box_.size(), 0);
        size_.assign(box_.size(), 0);
        state_.assign(box_.size(), 0);
    }
}

int ArmScanner::reach(std::uint64_t seed) {
    if (sigma_.size() == 1) return reach_monochromatic(seed);
    if (!rings_.empty()) return reach_alternating(seed);
    return reach_general(seed);
}

int ArmScanner::reach_monochromatic(std::uint64_t seed) {
    return explorer_->explore(seed, p_, sigma_[0], r_ - 1, r_max_ - 1, half_);
}

bool ArmScanner::in_region(TriCoord s, int outer) const {
    const int d = sup_distance(s, {0, 0});
    return d >= r_ - 1 && d <= outer && (!half_ || s.b >= 0);
}

int ArmScanner::reach_alternating(std::uint64_t seed) {
    constexpr std::uint8_t kOpen = 1, kInner = 2;
    const OpenThreshold threshold(p_);
    auto find = [&](std::uint32_t x) {
        while (parent_[x] != x) {
            parent_[x] = parent_[parent_[x]];
            x = parent_[x];
        }
        return x;
    };
    for (std::uint32_t i : touched_) state_[i] = 0;
    touched_.clear();
    CrossingWord word;
    word.cyclic = !half_;
    std::vector<std::uint32_t> roots;
    int result = r_max_ - 1;
    for (int d = r_ - 1; d < r_max_; ++d) {
        for (const TriCoord& s : rings_[static_cast<std::size_t>(d)]) {
            const auto i = static_cast<std::uint32_t>(box_.index(s));
            touched_.push_back(i);
            parent_[i] = i;
            size_[i] = 1;
            const bool open = threshold.open(site_uniform(seed, s));
            state_[i] = static_cast<std::uint8_t>((open ? kOpen : 0) | (d == r_ - 1 ? kInner : 0));
        }
        for (const TriCoord& s : rings_[static_cast<std::size_t>(d)]) {
            const auto i = static_cast<std::uint32_t>(box_.index(s));
            for (const TriCoord& off : kNeighborOffsets) {
                const TriCoord y = s + off;
                if (!in_region(y, d)) continue;
                const auto j = static_cast<std::uint32_t>(box_.index(y));
                if ((state_[i] & kOpen) != (state_[j] & kOpen)) continue;
                std::uint32_t x = find(i), z = find(j);
                if (x == z) continue;
                if (size_[x] < size_[z]) std::swap(x, z);
                parent_[z] = x;
                size_[x] += size_[z];
                state_[x] |= state_[z] & kInner;
            }
        }
        if (d < r_) continue;
        roots.clear();
        word.colors.clear();
        for (const TriCoord& s : rings_[static_cast<std::size_t>(d)]) {
            const std::uint32_t root = find(static_cast<std::uint32_t>(box_.index(s)));
            if (!(state_[root] & kInner)) continue;
            if (!roots.empty() && roots.back() == root) continue;
            roots.push_back(root);
            word.colors.push_back((state_[root] & kOpen) ? Color::Open : Color::Closed);
        }
        if (word.cyclic && roots.size() > 1 && roots.front() == roots.back()) {
            roots.pop_back();
            word.colors.pop_back();
        }
        word.capacity.assign(roots.size(), 1);
        if (!word_matches(word, sigma_)) {
            result = d - 1;
            break;
        }
    }
    return result;
}

int ArmScanner::reach_general(std::uint64_t seed) {
    Box box = box_;
    if (half_) box = Box{{box_.lo.a, 0}, box_.side};
    const Configuration cfg = Configuration::sample(box, seed, p_);
    for (int d = r_; d < r_max_; ++d) {
        if (!has_alternating_arms(cfg, ArmQuery{Annulus{{0, 0}, r_, d + 1}, sigma_, half_})) return d - 1;
    }
    return r_max_ - 1;
}

std::vector<ArmCount> estimate_arm_probability(const ArmFamily& family, std::uint64_t n_samples,
                                               std::uint64_t seed, int workers, double p) {
    if (family.radii.empty()) throw std::invalid_argument("estimate_arm_probability: no radii");
    if (n_samples < 1) throw std::invalid_argument("estimate_arm_probability: need n_samples >= 1");
    const bool single = family.sigma.size() == 1;
    for (int R : family.radii) {
        if (R < family.r || (!single && R == family.r)) {
            throw std::invalid_argument("estimate_arm_probability: need r < R");
        }
    }
    const int r_max = *std::max_element(family.radii.begin(), family.radii.end());
    workers = std::max(1, workers);
    std::vector<std::vector<std::uint64_t>> hits(static_cast<std::size_t>(workers),
                                                 std::vector<std::uint64_t>(family.radii.size(), 0));
    std::vector<std::unique_ptr<ArmScanner>> scanners(static_cast<std::size_t>(workers));
    int last_reach = 0;
    parallel_for(n_samples, workers, [&](std::size_t i, int w) {
        auto& scanner = scanners[static_cast<std::size_t>(w)];
        if (!scanner) {
            scanner = std::make_unique<ArmScanner>(family.r, r_max, family.sigma, family.half_plane, p);
        }
        const int reach = scanner->reach(hash64(seed, static_cast<std::uint64_t>(r_max), i));
        for (std::size_t k = 0; k < family.radii.size(); ++k) {
            if (family.radii[k] - 1 <= reach) ++hits[static_cast<std::size_t>(w)][k];
        }
        if (i + 1 == n_samples) last_reach = reach;
    }, 64);
    std::vector<ArmCount> out;
    for (std::size_t k = 0; k < family.radii.size(); ++k) {
        ArmCount count;
        count.query = ArmQuery{Annulus{{0, 0}, family.r, family.radii[k]}, family.sigma, family.half_plane};
        count.n_samples = n_samples;
        count.seed = seed;
        for (const auto& h : hits) count.n_hits += h[k];
        count.satisfied = family.radii[k] - 1 <= last_reach;
        out.push_back(count);
    }
    return out;
}

}  // namespace perclab
