#include "perclab/normalizer.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "perclab/graph.hpp"
#include "perclab/metrics.hpp"
#include "perclab/parallel.hpp"
#include "perclab/rng.hpp"
#include "perclab/union_find.hpp"

namespace perclab {

std::string_view to_string(MetricKind kind) {
    return kind == MetricKind::Geo ? "geo" : "res";
}

MetricKind parse_metric_kind(std::string_view text) {
    if (text == "geo") return MetricKind::Geo;
    if (text == "res") return MetricKind::Res;
    throw std::invalid_argument("unknown metric kind '" + std::string(text) + "'");
}

double default_delta(int n) {
    return std::max(1e-4, 4.0 / n);
}

namespace {

// For each closed crossing cluster, the row at which it first crosses when
// closed rows are added in the given order.
std::vector<std::pair<int, int>> crossing_rows(const ClusterLabeling& lab, bool from_top) {
    const Box& box = lab.box();
    const Configuration& cfg = lab.config();
    const int n = box.side;
    UnionFind uf(box.size());
    std::vector<std::uint8_t> flags(box.size(), 0);  // 1 left, 2 right
    std::vector<char> added(box.size(), 0);
    std::vector<char> recorded(lab.clusters(Color::Closed).size(), 0);
    std::vector<std::pair<int, int>> out;
    for (int k = 0; k < n; ++k) {
        const int b = box.lo.b + (from_top ? n - 1 - k : k);
        for (int a = box.lo.a; a < box.lo.a + n; ++a) {
            const TriCoord s{a, b};
            if (cfg.is_open(s)) continue;
            const auto i = static_cast<std::uint32_t>(box.index(s));
            added[i] = 1;
            std::uint8_t f = static_cast<std::uint8_t>((a == box.lo.a ? 1 : 0) | (a == box.lo.a + n - 1 ? 2 : 0));
            for (const TriCoord& off : kNeighborOffsets) {
                const TriCoord w = s + off;
                if (!box.contains(w)) continue;
                const auto j = static_cast<std::uint32_t>(box.index(w));
                if (!added[j]) continue;
                f |= flags[uf.find(j)] | flags[uf.find(i)];
                uf.unite(i, j);
            }
            f |= flags[uf.find(i)];
            flags[uf.find(i)] = f;
            if (f == 3) {
                const int id = lab.label(s);
                if (!recorded[static_cast<std::size_t>(id)]) {
                    recorded[static_cast<std::size_t>(id)] = 1;
                    out.emplace_back(id, b);
                }
            }
        }
    }
    return out;
}

struct UnitPoint {
    double x;
    double y;
};

UnitPoint unit_point(const Box& box, TriCoord s) {
    const double scale = box.side > 1 ? box.side - 1 : 1;
    return {(s.a - box.lo.a) / scale, (s.b - box.lo.b) / scale};
}

double unit_distance(UnitPoint p, UnitPoint q) {
    return std::hypot(p.x - q.x, p.y - q.y);
}

constexpr UnitPoint kTopMid{0.5, 1.0};
constexpr UnitPoint kRightMid{1.0, 0.5};
constexpr UnitPoint kBottomMid{0.5, 0.0};
constexpr UnitPoint kLeftMid{0.0, 0.5};

bool on_side(const Box& box, TriCoord s, Side side) {
    switch (side) {
        case Side::Left: return s.a == box.lo.a;
        case Side::Right: return s.a == box.lo.a + box.side - 1;
        case Side::Bottom: return s.b == box.lo.b;
        case Side::Top: return s.b == box.lo.b + box.side - 1;
    }
    return false;
}

UnitPoint midpoint(Side side) {
    switch (side) {
        case Side::Left: return kLeftMid;
        case Side::Right: return kRightMid;
        case Side::Bottom: return kBottomMid;
        case Side::Top: return kTopMid;
    }
    return kTopMid;
}

// Hits each side in `hit` within delta of its midpoint and stays farther than
// 2 delta from the midpoints of the `avoid` sides.
bool midpoint_pattern(const ClusterLabeling& lab, Color color, int id, std::initializer_list<Side> hit,
                      std::initializer_list<Side> avoid, double delta) {
    const Box& box = lab.box();
    std::vector<char> hit_ok(hit.size(), 0);
    for (std::uint32_t i : lab.members(color, id)) {
        const TriCoord s = box.site(i);
        const UnitPoint p = unit_point(box, s);
        for (Side side : avoid) {
            if (unit_distance(p, midpoint(side)) <= 2.0 * delta) return false;
        }
        std::size_t k = 0;
        for (Side side : hit) {
            if (on_side(box, s, side) && unit_distance(p, midpoint(side)) <= delta) hit_ok[k] = 1;
            ++k;
        }
    }
    return std::all_of(hit_ok.begin(), hit_ok.end(), [](char c) { return c != 0; });
}

bool crosses_left_right(const ClusterLabeling& lab, Color color, int id) {
    bool left = false, right = false;
    for (std::uint32_t i : lab.members(color, id)) {
        const TriCoord s = lab.box().site(i);
        left = left || on_side(lab.box(), s, Side::Left);
        right = right || on_side(lab.box(), s, Side::Right);
    }
    return left && right;
}

}  // namespace

std::vector<CrossingLevel> closed_crossing_levels(const ClusterLabeling& labeling) {
    std::vector<CrossingLevel> out;
    for (const auto& [id, row] : crossing_rows(labeling, true)) out.push_back({id, row, 0});
    const auto up = crossing_rows(labeling, false);
    for (auto& level : out) {
        for (const auto& [id, row] : up) {
            if (id == level.cluster_id) level.ceiling = row;
        }
    }
    std::sort(out.begin(), out.end(), [](const CrossingLevel& x, const CrossingLevel& y) {
        return x.cluster_id < y.cluster_id;
    });
    return out;
}

EventEReport detect_event_E(const ClusterLabeling& lab, double delta, bool strict) {
    if (strict && !(delta > 0.0 && delta < 0.25)) {
        throw std::invalid_argument("detect_event_E: delta must lie in (0, 1/4)");
    }
    EventEReport rep;
    rep.delta_used = delta;
    rep.strict = strict;
    const auto levels = closed_crossing_levels(lab);
    if (levels.size() < 2) return rep;
    const auto top = std::max_element(levels.begin(), levels.end(), [](const auto& x, const auto& y) {
        return x.floor < y.floor;
    });
    const auto bottom = std::min_element(levels.begin(), levels.end(), [](const auto& x, const auto& y) {
        return x.ceiling < y.ceiling;
    });
    if (top->cluster_id == bottom->cluster_id) return rep;

    const Box& box = lab.box();
    const Configuration& cfg = lab.config();
    auto in_cluster = [&](TriCoord s, int id) {
        return box.contains(s) && !cfg.is_open(s) && lab.label(s) == id;
    };
    std::optional<TriCoord> u, v;
    for (std::uint32_t i : lab.members(Color::Closed, top->cluster_id)) {
        const TriCoord t = box.site(i);
        for (const TriCoord& off : kNeighborOffsets) {
            const TriCoord s = t + off;
            if (!box.contains(s) || !cfg.is_open(s)) continue;
            bool touches_bottom = false;
            for (const TriCoord& off2 : kNeighborOffsets) {
                touches_bottom = touches_bottom || in_cluster(s + off2, bottom->cluster_id);
            }
            if (!touches_bottom) continue;
            if (!u || left_of(s, *u)) u = s;
            if (!v || left_of(*v, s)) v = s;
        }
    }
    if (!u) return rep;
    const int middle = lab.label(*u);
    if (lab.label(*v) != middle || !crosses_left_right(lab, Color::Open, middle)) return rep;
    if (strict) {
        using enum Side;
        if (!midpoint_pattern(lab, Color::Closed, top->cluster_id, {Top}, {Right, Bottom, Left}, delta) ||
            !midpoint_pattern(lab, Color::Closed, bottom->cluster_id, {Bottom}, {Top, Right, Left}, delta) ||
            !midpoint_pattern(lab, Color::Open, middle, {Left, Right}, {Top, Bottom}, delta)) {
            return rep;
        }
    }
    rep.holds = true;
    rep.top_cluster_id = top->cluster_id;
    rep.bottom_cluster_id = bottom->cluster_id;
    rep.middle_open_cluster_id = middle;
    rep.u = u;
    rep.v = v;
    return rep;
}

EventEReport detect_event_E(const Configuration& cfg, double delta, bool strict) {
    return detect_event_E(label_clusters(cfg), delta, strict);
}

bool event_E_screen(const Configuration& cfg) {
    const Box& box = cfg.box();
    const int n = box.side;
    UnionFind uf(box.size());
    for (std::size_t i = 0; i < box.size(); ++i) {
        if (cfg.is_open(i)) continue;
        const TriCoord s = box.site(i);
        for (const TriCoord& off : {TriCoord{1, 0}, TriCoord{0, 1}, TriCoord{-1, 1}}) {
            const TriCoord w = s + off;
            if (box.contains(w) && !cfg.is_open(w)) {
                uf.unite(static_cast<std::uint32_t>(i), static_cast<std::uint32_t>(box.index(w)));
            }
        }
    }
    std::vector<std::uint8_t> flags(box.size(), 0);
    for (int b = box.lo.b; b < box.lo.b + n; ++b) {
        const TriCoord l{box.lo.a, b};
        const TriCoord r{box.lo.a + n - 1, b};
        if (!cfg.is_open(l)) flags[uf.find(static_cast<std::uint32_t>(box.index(l)))] |= 1;
        if (!cfg.is_open(r)) flags[uf.find(static_cast<std::uint32_t>(box.index(r)))] |= 2;
    }
    int crossing = 0;
    for (std::size_t i = 0; i < box.size(); ++i) crossing += flags[i] == 3;
    if (crossing < 2) return false;
    for (std::size_t i = 0; i < box.size(); ++i) {
        if (!cfg.is_open(i)) continue;
        const TriCoord s = box.site(i);
        std::uint32_t first = UINT32_MAX;
        for (const TriCoord& off : kNeighborOffsets) {
            const TriCoord w = s + off;
            if (!box.contains(w) || cfg.is_open(w)) continue;
            const std::uint32_t root = uf.find(static_cast<std::uint32_t>(box.index(w)));
            if (flags[root] != 3) continue;
            if (first == UINT32_MAX) {
                first = root;
            } else if (root != first) {
                return true;
            }
        }
    }
    return false;
}

double compute_Xn(const ClusterLabeling& lab, const EventEReport& report, MetricKind kind,
                  const SolverOptions& options) {
    if (!report.holds || !report.u || !report.v) {
        throw std::invalid_argument("compute_Xn: the event does not hold");
    }
    const TriCoord u = *report.u;
    const TriCoord v = *report.v;
    if (!lab.config().is_open(u) || !lab.same_cluster(u, v)) {
        throw std::logic_error("compute_Xn: touch points are not in one open cluster");
    }
    if (u == v) return 0.0;
    if (kind == MetricKind::Geo) return *geodesic_distance(lab, u, v);
    const SiteGraph g = SiteGraph::cluster_of(lab, u);
    const int a[] = {g.local(u)};
    const int b[] = {g.local(v)};
    return effective_resistance(g, a, b, options);
}

double empirical_quantile(std::vector<double> values, double level) {
    if (values.empty()) throw std::invalid_argument("empirical_quantile: no values");
    std::sort(values.begin(), values.end());
    const double m = static_cast<double>(values.size());
    auto k = static_cast<std::ptrdiff_t>(std::ceil(level * m - 1e-9)) - 1;
    k = std::clamp<std::ptrdiff_t>(k, 0, static_cast<std::ptrdiff_t>(values.size()) - 1);
    return values[static_cast<std::size_t>(k)];
}

ConditionalSamples sample_Xn(const ConditionalSampling& setup) {
    if (setup.n < 2) throw std::invalid_argument("sample_Xn: n must be at least 2");
    ConditionalSamples out;
    out.setup = setup;
    out.delta_used = setup.delta > 0.0 ? setup.delta : default_delta(setup.n);
    const Box box = Box::lambda(setup.n);
    struct Outcome {
        bool holds = false;
        double geo = 0.0;
        double res = 0.0;
    };
    constexpr std::size_t kBatch = 256;
    std::vector<Outcome> batch(kBatch);
    std::uint64_t next = 0;
    while (out.accepted.size() < setup.n_conditional) {
        const std::uint64_t base = next;
        parallel_for(kBatch, setup.workers, [&](std::size_t i, int) {
            Outcome& o = batch[i];
            o = {};
            auto cfg = Configuration::sample(box, hash64(setup.seed, static_cast<std::uint64_t>(setup.n), base + i));
            if (!event_E_screen(cfg)) return;
            const ClusterLabeling lab(std::move(cfg));
            const auto rep = detect_event_E(lab, out.delta_used, setup.strict);
            if (!rep.holds) return;
            o.holds = true;
            if (setup.geo) o.geo = compute_Xn(lab, rep, MetricKind::Geo);
            if (setup.res) o.res = compute_Xn(lab, rep, MetricKind::Res);
        }, 1);
        for (std::size_t i = 0; i < kBatch && out.accepted.size() < setup.n_conditional; ++i) {
            ++out.attempts;
            if (batch[i].holds) {
                out.accepted.push_back(base + i);
                if (setup.geo) out.geo.push_back(batch[i].geo);
                if (setup.res) out.res.push_back(batch[i].res);
            }
            if (out.attempts == setup.max_attempts && out.acceptance_rate() < setup.min_acceptance) {
                throw AcceptanceError("sample_Xn: acceptance rate " + std::to_string(out.acceptance_rate()) +
                                          " after " + std::to_string(out.attempts) + " attempts at n=" +
                                          std::to_string(setup.n),
                                      out.attempts, out.accepted.size());
            }
        }
        next += kBatch;
    }
    return out;
}

QuantileEstimate quantile_estimate(const ConditionalSamples& samples, MetricKind metric, double p, int resamples) {
    if (!(p > 0.0 && p < 1.0)) throw std::invalid_argument("quantile_estimate: p must lie in (0, 1)");
    const auto& values = samples.values(metric);
    if (values.empty()) throw std::invalid_argument("quantile_estimate: no samples for this metric");
    QuantileEstimate q;
    q.n = samples.setup.n;
    q.p = p;
    q.metric = metric;
    q.n_conditional_samples = values.size();
    q.attempts = samples.attempts;
    q.acceptance_rate = samples.acceptance_rate();
    q.delta = samples.delta_used;
    q.strict = samples.setup.strict;
    q.seed = samples.setup.seed;
    q.q_hat = empirical_quantile(values, 1.0 - p);

    const std::size_t m = values.size();
    const std::uint64_t key = hash64(samples.setup.seed, static_cast<std::uint64_t>(samples.setup.n), 0xB0075ull);
    std::vector<double> boot(static_cast<std::size_t>(std::max(resamples, 0)));
    std::vector<double> draw(m);
    for (int r = 0; r < resamples; ++r) {
        for (std::size_t j = 0; j < m; ++j) {
            const auto k = static_cast<std::size_t>(to_unit(stream_uniform(key, static_cast<std::uint64_t>(r), j)) *
                                                    static_cast<double>(m));
            draw[j] = values[std::min(k, m - 1)];
        }
        boot[static_cast<std::size_t>(r)] = empirical_quantile(draw, 1.0 - p);
    }
    q.ci_lo = resamples > 0 ? std::min(q.q_hat, empirical_quantile(boot, 0.025)) : q.q_hat;
    q.ci_hi = resamples > 0 ? std::max(q.q_hat, empirical_quantile(boot, 0.975)) : q.q_hat;
    return q;
}

QuantileEstimate estimate_qn(int n, double p, MetricKind metric, std::size_t n_conditional, std::uint64_t seed,
                             bool strict, int workers) {
    if (!(p > 0.0 && p <= 0.5)) throw std::invalid_argument("estimate_qn: p must lie in (0, 1/2]");
    if (n_conditional < 100) throw std::invalid_argument("estimate_qn: need at least 100 conditional samples");
    ConditionalSampling setup;
    setup.n = n;
    setup.geo = metric == MetricKind::Geo;
    setup.res = metric == MetricKind::Res;
    setup.n_conditional = n_conditional;
    setup.seed = seed;
    setup.strict = strict;
    setup.workers = workers;
    return quantile_estimate(sample_Xn(setup), metric, p);
}

}  // namespace perclab
