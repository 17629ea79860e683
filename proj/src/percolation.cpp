#include "perclab/percolation.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <istream>
#include <ostream>
#include <stdexcept>

#include "perclab/union_find.hpp"

namespace perclab {

namespace {

std::size_t word_count(const Box& box) { return (box.size() + 63) / 64; }

// Forward half of the neighbor directions; with their negatives they cover all six.
constexpr std::array<TriCoord, 3> kForward = {TriCoord{1, 0}, TriCoord{0, 1}, TriCoord{-1, 1}};

}  // namespace

Configuration::Configuration(Box box, std::uint64_t seed, double p)
    : box_(box), seed_(seed), p_(p), words_(word_count(box), 0) {}

Configuration Configuration::sample(const Box& box, std::uint64_t seed, double p) {
    if (box.side < 1) throw std::invalid_argument("sample: box side must be >= 1");
    if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("sample: p must lie in [0, 1]");
    Configuration cfg(box, seed, p);
    const OpenThreshold threshold(p);
    const int a_end = box.lo.a + box.side;
    std::size_t index = 0;
    for (int b = box.lo.b; b < box.lo.b + box.side; ++b) {
        int a = box.lo.a;
        while (a < a_end) {
            // One Philox call covers the aligned pair {2k, 2k + 1}.
            const std::int64_t pair = a >= 0 ? a / 2 : -((-static_cast<std::int64_t>(a) + 1) / 2);
            const auto words = philox_pair(seed, static_cast<std::uint64_t>(pair),
                                           static_cast<std::uint64_t>(static_cast<std::int64_t>(b)));
            for (int lane = static_cast<int>(a - 2 * pair); lane < 2 && a < a_end; ++lane, ++a) {
                if (threshold.open(words[static_cast<std::size_t>(lane)])) {
                    cfg.words_[index >> 6] |= 1ull << (index & 63);
                }
                ++index;
            }
        }
    }
    return cfg;
}

Configuration Configuration::filled(const Box& box, Color color) {
    Configuration cfg(box, 0, color == Color::Open ? 1.0 : 0.0);
    if (color == Color::Open) {
        for (std::size_t i = 0; i < box.size(); ++i) cfg.words_[i >> 6] |= 1ull << (i & 63);
    }
    return cfg;
}

Configuration Configuration::from_rows(std::span<const std::string_view> rows) {
    const int n = static_cast<int>(rows.size());
    Configuration cfg(Box::lambda(n), 0, 0.5);
    for (int r = 0; r < n; ++r) {
        const std::string_view row = rows[static_cast<std::size_t>(r)];
        if (static_cast<int>(row.size()) != n) {
            throw std::invalid_argument("from_rows: every row needs exactly n characters");
        }
        for (int a = 0; a < n; ++a) {
            const char ch = row[static_cast<std::size_t>(a)];
            cfg.set_open({a, n - 1 - r}, ch == '1' || ch == 'O' || ch == 'o' || ch == '#');
        }
    }
    return cfg;
}

void Configuration::set_open(TriCoord s, bool open) {
    const std::size_t i = box_.index(s);
    if (open) {
        words_[i >> 6] |= 1ull << (i & 63);
    } else {
        words_[i >> 6] &= ~(1ull << (i & 63));
    }
}

std::size_t Configuration::count_open() const {
    std::size_t total = 0;
    for (std::uint64_t w : words_) total += static_cast<std::size_t>(std::popcount(w));
    return total;
}

// ---------------------------------------------------------------------------
// File format

namespace {

template <class T>
void put_le(std::ostream& out, T value) {
    unsigned char bytes[sizeof(T)];
    std::memcpy(bytes, &value, sizeof(T));
    if constexpr (std::endian::native == std::endian::big) std::reverse(bytes, bytes + sizeof(T));
    out.write(reinterpret_cast<const char*>(bytes), sizeof(T));
}

template <class T>
T get_le(std::istream& in) {
    unsigned char bytes[sizeof(T)];
    if (!in.read(reinterpret_cast<char*>(bytes), sizeof(T))) {
        throw std::runtime_error("PERC1: truncated header");
    }
    if constexpr (std::endian::native == std::endian::big) std::reverse(bytes, bytes + sizeof(T));
    T value;
    std::memcpy(&value, bytes, sizeof(T));
    return value;
}

}  // namespace

void write_configuration(std::ostream& out, const Configuration& cfg) {
    out.write("PERC1", 5);
    put_le<std::uint32_t>(out, static_cast<std::uint32_t>(cfg.box().side));
    put_le<std::uint64_t>(out, cfg.seed());
    put_le<double>(out, cfg.p());
    const std::size_t n_bytes = (cfg.box().size() + 7) / 8;
    for (std::size_t i = 0; i < n_bytes; ++i) {
        const std::uint64_t w = cfg.words()[i / 8];
        out.put(static_cast<char>((w >> (8 * (i % 8))) & 0xFFu));
    }
    if (!out) throw std::runtime_error("PERC1: write failed");
}

Configuration read_configuration(std::istream& in) {
    char magic[5];
    if (!in.read(magic, 5) || std::memcmp(magic, "PERC1", 5) != 0) {
        throw std::runtime_error("PERC1: bad magic");
    }
    const auto side = get_le<std::uint32_t>(in);
    const auto seed = get_le<std::uint64_t>(in);
    const auto p = get_le<double>(in);
    if (side == 0 || side > (1u << 15)) throw std::runtime_error("PERC1: implausible side");
    Configuration cfg(Box::lambda(static_cast<int>(side)), seed, p);
    const Box box = cfg.box();
    const std::size_t n_bytes = (box.size() + 7) / 8;
    std::vector<unsigned char> bytes(n_bytes);
    if (!in.read(reinterpret_cast<char*>(bytes.data()), static_cast<std::streamsize>(n_bytes))) {
        throw std::runtime_error("PERC1: truncated bitset");
    }
    for (std::size_t i = 0; i < box.size(); ++i) {
        if ((bytes[i / 8] >> (i % 8)) & 1u) cfg.set_open(box.site(i), true);
    }
    return cfg;
}

// ---------------------------------------------------------------------------
// Cluster labeling

double euclidean_diameter(const Box& box, std::span<const std::uint32_t> sorted_members) {
    if (sorted_members.size() <= 1) return 0.0;
    // The hull of a lattice set is the hull of its per-row extremes.
    std::vector<TriCoord> pts;
    std::size_t i = 0;
    while (i < sorted_members.size()) {
        const TriCoord first = box.site(sorted_members[i]);
        std::size_t j = i;
        while (j + 1 < sorted_members.size() && box.site(sorted_members[j + 1]).b == first.b) ++j;
        pts.push_back(first);
        if (j != i) pts.push_back(box.site(sorted_members[j]));
        i = j + 1;
    }
    // Monotone chain on the integer coordinates; affine maps preserve hulls.
    std::sort(pts.begin(), pts.end());
    auto cross = [](TriCoord o, TriCoord p, TriCoord q) {
        return static_cast<std::int64_t>(p.a - o.a) * (q.b - o.b) -
               static_cast<std::int64_t>(p.b - o.b) * (q.a - o.a);
    };
    std::vector<TriCoord> hull(2 * pts.size());
    std::size_t k = 0;
    for (const TriCoord& p : pts) {
        while (k >= 2 && cross(hull[k - 2], hull[k - 1], p) <= 0) --k;
        hull[k++] = p;
    }
    for (std::size_t t = pts.size() - 1, lower = k + 1; t-- > 0;) {
        while (k >= lower && cross(hull[k - 2], hull[k - 1], pts[t]) <= 0) --k;
        hull[k++] = pts[t];
    }
    hull.resize(k > 1 ? k - 1 : k);
    std::int64_t best = 0;
    for (std::size_t p = 0; p < hull.size(); ++p) {
        for (std::size_t q = p + 1; q < hull.size(); ++q) {
            best = std::max(best, euclid_distance_sq4(hull[p], hull[q]));
        }
    }
    return 0.5 * std::sqrt(static_cast<double>(best));
}

ClusterLabeling::ClusterLabeling(Configuration cfg) : cfg_(std::move(cfg)) {
    const Box& box = cfg_.box();
    const std::size_t n = box.size();
    UnionFind uf(n);
    for (std::size_t i = 0; i < n; ++i) {
        const TriCoord s = box.site(i);
        const bool open = cfg_.is_open(i);
        for (const TriCoord& d : kForward) {
            const TriCoord y = s + d;
            if (box.contains(y) && cfg_.is_open(y) == open) {
                uf.unite(static_cast<std::uint32_t>(i), static_cast<std::uint32_t>(box.index(y)));
            }
        }
    }

    // Provisional cluster per root, numbered by first appearance.
    std::vector<int> provisional(n, -1);
    std::vector<int> root_to_prov(n, -1);
    std::vector<Cluster> prov;
    std::vector<std::size_t> counts;
    for (std::size_t i = 0; i < n; ++i) {
        const std::uint32_t r = uf.find(static_cast<std::uint32_t>(i));
        int& pid = root_to_prov[r];
        if (pid < 0) {
            pid = static_cast<int>(prov.size());
            Cluster c;
            c.color = cfg_.color(i);
            c.min_site = i;
            const TriCoord s = box.site(i);
            c.bbox = {s, s};
            prov.push_back(c);
            counts.push_back(0);
        }
        provisional[i] = pid;
        Cluster& c = prov[static_cast<std::size_t>(pid)];
        const TriCoord s = box.site(i);
        c.bbox.lo = {std::min(c.bbox.lo.a, s.a), std::min(c.bbox.lo.b, s.b)};
        c.bbox.hi = {std::max(c.bbox.hi.a, s.a), std::max(c.bbox.hi.b, s.b)};
        ++counts[static_cast<std::size_t>(pid)];
    }

    // Group members by provisional cluster (counting sort keeps index order).
    std::vector<std::size_t> start(prov.size() + 1, 0);
    for (std::size_t p = 0; p < prov.size(); ++p) start[p + 1] = start[p] + counts[p];
    std::vector<std::uint32_t> grouped(n);
    {
        std::vector<std::size_t> cursor(start.begin(), start.end() - 1);
        for (std::size_t i = 0; i < n; ++i) {
            grouped[cursor[static_cast<std::size_t>(provisional[i])]++] = static_cast<std::uint32_t>(i);
        }
    }
    for (std::size_t p = 0; p < prov.size(); ++p) {
        prov[p].size = counts[p];
        prov[p].diam = euclidean_diameter(
            box, std::span<const std::uint32_t>(grouped.data() + start[p], counts[p]));
    }

    // Order each color by (diam desc, min_site asc) and assign final ids.
    auto finish = [&](Color color, std::vector<Cluster>& out, std::vector<std::uint32_t>& members,
                      std::vector<std::size_t>& offsets) {
        std::vector<std::size_t> order;
        for (std::size_t p = 0; p < prov.size(); ++p) {
            if (prov[p].color == color) order.push_back(p);
        }
        std::sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) {
            if (prov[x].diam != prov[y].diam) return prov[x].diam > prov[y].diam;
            return prov[x].min_site < prov[y].min_site;
        });
        std::vector<int> final_id(prov.size(), -1);
        offsets.assign(1, 0);
        for (std::size_t rank = 0; rank < order.size(); ++rank) {
            const std::size_t p = order[rank];
            Cluster c = prov[p];
            c.id = static_cast<int>(rank);
            out.push_back(c);
            final_id[p] = c.id;
            members.insert(members.end(), grouped.begin() + static_cast<std::ptrdiff_t>(start[p]),
                           grouped.begin() + static_cast<std::ptrdiff_t>(start[p + 1]));
            offsets.push_back(members.size());
        }
        return final_id;
    };
    const std::vector<int> open_ids = finish(Color::Open, open_, open_members_, open_offsets_);
    const std::vector<int> closed_ids = finish(Color::Closed, closed_, closed_members_, closed_offsets_);
    labels_.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        const auto p = static_cast<std::size_t>(provisional[i]);
        labels_[i] = cfg_.is_open(i) ? open_ids[p] : closed_ids[p];
    }
}

const Cluster& ClusterLabeling::cluster(Color c, int id) const {
    const auto& list = clusters(c);
    if (id < 0 || static_cast<std::size_t>(id) >= list.size()) {
        throw std::out_of_range("unknown cluster id " + std::to_string(id));
    }
    return list[static_cast<std::size_t>(id)];
}

std::span<const std::uint32_t> ClusterLabeling::members(Color c, int id) const {
    (void)cluster(c, id);
    const auto& members = c == Color::Open ? open_members_ : closed_members_;
    const auto& offsets = c == Color::Open ? open_offsets_ : closed_offsets_;
    const auto k = static_cast<std::size_t>(id);
    return {members.data() + offsets[k], offsets[k + 1] - offsets[k]};
}

std::vector<TriCoord> ClusterLabeling::sites(Color c, int id) const {
    std::vector<TriCoord> out;
    for (std::uint32_t i : members(c, id)) out.push_back(box().site(i));
    return out;
}

ClusterLabeling label_clusters(const Configuration& cfg) { return ClusterLabeling(cfg); }

// ---------------------------------------------------------------------------
// Crossings

bool has_crossing(const Configuration& cfg, Color color, Direction direction) {
    const Box& box = cfg.box();
    if (box.side < 1) return false;
    const bool lr = direction == Direction::LeftRight;
    std::vector<std::uint8_t> seen(box.size(), 0);
    std::vector<std::uint32_t> stack;
    const std::vector<TriCoord> starts = boundary_sites(box, lr ? Side::Left : Side::Bottom);
    for (const TriCoord& s : starts) {
        if (cfg.has_color(s, color)) {
            seen[box.index(s)] = 1;
            stack.push_back(static_cast<std::uint32_t>(box.index(s)));
        }
    }
    const int target = lr ? box.lo.a + box.side - 1 : box.lo.b + box.side - 1;
    while (!stack.empty()) {
        const TriCoord s = box.site(stack.back());
        stack.pop_back();
        if ((lr ? s.a : s.b) == target) return true;
        for (const TriCoord& d : kNeighborOffsets) {
            const TriCoord y = s + d;
            if (!box.contains(y)) continue;
            const std::size_t j = box.index(y);
            if (!seen[j] && cfg.has_color(y, color)) {
                seen[j] = 1;
                stack.push_back(static_cast<std::uint32_t>(j));
            }
        }
    }
    return false;
}

std::vector<int> crossing_clusters(const ClusterLabeling& labeling, Color color,
                                   Direction direction) {
    const Box& box = labeling.box();
    const bool lr = direction == Direction::LeftRight;
    std::vector<std::uint8_t> touches(labeling.clusters(color).size(), 0);
    for (const TriCoord& s : boundary_sites(box, lr ? Side::Left : Side::Bottom)) {
        if (labeling.color(s) == color) touches[static_cast<std::size_t>(labeling.label(s))] |= 1u;
    }
    for (const TriCoord& s : boundary_sites(box, lr ? Side::Right : Side::Top)) {
        if (labeling.color(s) == color) touches[static_cast<std::size_t>(labeling.label(s))] |= 2u;
    }
    std::vector<int> out;
    for (std::size_t id = 0; id < touches.size(); ++id) {
        if (touches[id] == 3u) out.push_back(static_cast<int>(id));
    }
    return out;
}

// ---------------------------------------------------------------------------
// Interface loops

std::vector<InterfaceLoop> trace_interfaces(const Configuration& cfg, Color collar) {
    const Box& box = cfg.box();
    const Box padded{{box.lo.a - 1, box.lo.b - 1}, box.side + 2};
    auto color_at = [&](TriCoord s) { return box.contains(s) ? cfg.color(s) : collar; };
    auto edge_id = [&](TriCoord open_site, int k) {
        return padded.index(open_site) * 6 + static_cast<std::size_t>(k);
    };
    std::vector<std::uint8_t> visited(padded.size() * 6, 0);
    std::vector<InterfaceLoop> loops;

    for (std::size_t i = 0; i < box.size(); ++i) {
        const TriCoord x = box.site(i);
        for (int k = 0; k < 6; ++k) {
            const TriCoord y = x + kNeighborOffsets[static_cast<std::size_t>(k)];
            const Color cx = color_at(x);
            if (color_at(y) == cx) continue;
            TriCoord o = cx == Color::Open ? x : y;
            TriCoord c = cx == Color::Open ? y : x;
            int dir = cx == Color::Open ? k : (k + 3) % 6;
            if (visited[edge_id(o, dir)]) continue;

            InterfaceLoop loop;
            const TriCoord o0 = o;
            const TriCoord c0 = c;
            double area2 = 0.0;
            do {
                visited[edge_id(o, dir)] = 1;
                loop.edges.push_back({o, c});
                // The vertex ahead is shared with w; keep the open side on the left.
                const TriCoord w = o + kNeighborOffsets[static_cast<std::size_t>((dir + 1) % 6)];
                if (color_at(w) == Color::Open) {
                    o = w;
                } else {
                    c = w;
                }
                dir = direction_index(c - o);
            } while (!(o == o0 && c == c0));

            for (std::size_t e = 0; e < loop.edges.size(); ++e) {
                const DualEdge& p = loop.edges[e];
                const DualEdge& q = loop.edges[(e + 1) % loop.edges.size()];
                const EuclidPoint po = euclid(p.open_site), pc = euclid(p.closed_site);
                const EuclidPoint qo = euclid(q.open_site), qc = euclid(q.closed_site);
                const double px = 0.5 * (po.x + pc.x), py = 0.5 * (po.y + pc.y);
                const double qx = 0.5 * (qo.x + qc.x), qy = 0.5 * (qo.y + qc.y);
                area2 += px * qy - qx * py;
            }
            loop.enclosed_color = area2 > 0 ? Color::Open : Color::Closed;
            loops.push_back(std::move(loop));
        }
    }
    return loops;
}

}  // namespace perclab
