#include "perclab/ghtool.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "perclab/graph.hpp"

namespace perclab {

FiniteMetricSpace::FiniteMetricSpace(std::vector<int> ids, std::vector<double> dist,
                                     std::optional<std::vector<Point2>> embedding)
    : ids_(std::move(ids)), dist_(std::move(dist)), embedding_(std::move(embedding)) {
    const std::size_t m = ids_.size();
    if (dist_.size() != m * m) throw std::invalid_argument("FiniteMetricSpace: distance matrix has the wrong size");
    if (embedding_ && embedding_->size() != m) {
        throw std::invalid_argument("FiniteMetricSpace: embedding has the wrong size");
    }
    for (std::size_t i = 0; i < m; ++i) {
        if (d(i, i) != 0.0) throw std::invalid_argument("FiniteMetricSpace: nonzero diagonal at point " + std::to_string(ids_[i]));
        for (std::size_t j = 0; j < m; ++j) {
            if (!(d(i, j) >= 0.0) || d(i, j) != d(j, i)) {
                throw std::invalid_argument("FiniteMetricSpace: distances between points " + std::to_string(ids_[i]) +
                                            " and " + std::to_string(ids_[j]) + " are negative or asymmetric");
            }
        }
    }
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = 0; j < m; ++j) {
            for (std::size_t k = 0; k < m; ++k) {
                if (d(i, k) > d(i, j) + d(j, k) + 1e-9) {
                    throw std::invalid_argument("FiniteMetricSpace: triangle inequality fails at points " +
                                                std::to_string(ids_[i]) + ", " + std::to_string(ids_[j]) + ", " +
                                                std::to_string(ids_[k]));
                }
            }
        }
    }
}

double FiniteMetricSpace::diameter() const {
    double best = 0.0;
    for (double v : dist_) best = std::max(best, v);
    return best;
}

FiniteMetricSpace FiniteMetricSpace::subspace(std::span<const std::size_t> points) const {
    FiniteMetricSpace out;
    const std::size_t k = points.size();
    out.ids_.reserve(k);
    out.dist_.resize(k * k);
    for (std::size_t i = 0; i < k; ++i) {
        out.ids_.push_back(ids_.at(points[i]));
        for (std::size_t j = 0; j < k; ++j) out.dist_[i * k + j] = d(points[i], points[j]);
    }
    if (embedding_) {
        out.embedding_.emplace();
        for (std::size_t p : points) out.embedding_->push_back((*embedding_)[p]);
    }
    return out;
}

namespace {

struct ExactSearch {
    const FiniteMetricSpace& X;
    const FiniteMetricSpace& Y;
    std::vector<std::pair<std::size_t, std::size_t>> chosen;
    std::vector<int> cover_x, cover_y;
    double best = std::numeric_limits<double>::infinity();

    double added(std::size_t x, std::size_t y) const {
        double worst = 0.0;
        for (const auto& [u, v] : chosen) worst = std::max(worst, std::abs(X.d(x, u) - Y.d(y, v)));
        return worst;
    }

    void take(std::size_t x, std::size_t y, double current) {
        const double next = std::max(current, added(x, y));
        if (next >= best) return;
        chosen.emplace_back(x, y);
        ++cover_x[x];
        ++cover_y[y];
        run(next);
        --cover_x[x];
        --cover_y[y];
        chosen.pop_back();
    }

    void run(double current) {
        const auto fx = std::find(cover_x.begin(), cover_x.end(), 0);
        if (fx != cover_x.end()) {
            const auto x = static_cast<std::size_t>(fx - cover_x.begin());
            for (std::size_t y = 0; y < Y.size(); ++y) take(x, y, current);
            return;
        }
        const auto fy = std::find(cover_y.begin(), cover_y.end(), 0);
        if (fy != cover_y.end()) {
            const auto y = static_cast<std::size_t>(fy - cover_y.begin());
            for (std::size_t x = 0; x < X.size(); ++x) take(x, y, current);
            return;
        }
        best = current;
    }
};

double euclid(const Point2& p, const Point2& q) { return std::hypot(p[0] - q[0], p[1] - q[1]); }

void require_embedding(const FiniteMetricSpace& S, const char* name) {
    if (!S.has_embedding()) throw std::invalid_argument(std::string("gh: space ") + name + " has no embedding");
}

}  // namespace

double gh_exact_small(const FiniteMetricSpace& X, const FiniteMetricSpace& Y) {
    if (X.size() == 0 || Y.size() == 0) throw std::invalid_argument("gh_exact_small: empty space");
    if (X.size() * Y.size() > kExactGhCap) {
        throw std::length_error("gh_exact_small: |X| * |Y| = " + std::to_string(X.size() * Y.size()) +
                                " exceeds the exhaustive cap of " + std::to_string(kExactGhCap));
    }
    ExactSearch s{X, Y, {}, std::vector<int>(X.size(), 0), std::vector<int>(Y.size(), 0)};
    s.run(0.0);
    return s.best / 2.0;
}

double gh_upper_by_embedding(const FiniteMetricSpace& X, const FiniteMetricSpace& Y, double match_radius) {
    require_embedding(X, "X");
    require_embedding(Y, "Y");
    std::vector<std::vector<std::size_t>> partners(X.size());
    std::vector<char> y_covered(Y.size(), 0);
    for (std::size_t x = 0; x < X.size(); ++x) {
        for (std::size_t y = 0; y < Y.size(); ++y) {
            if (euclid(X.position(x), Y.position(y)) <= match_radius) {
                partners[x].push_back(y);
                y_covered[y] = 1;
            }
        }
        if (partners[x].empty()) {
            throw std::invalid_argument("gh_upper_by_embedding: point " + std::to_string(X.id(x)) +
                                        " of X has no partner within radius " + std::to_string(match_radius));
        }
    }
    for (std::size_t y = 0; y < Y.size(); ++y) {
        if (!y_covered[y]) {
            throw std::invalid_argument("gh_upper_by_embedding: point " + std::to_string(Y.id(y)) +
                                        " of Y has no partner within radius " + std::to_string(match_radius));
        }
    }
    double worst = 0.0;
    for (std::size_t x = 0; x < X.size(); ++x) {
        for (std::size_t u = x; u < X.size(); ++u) {
            const double dx = X.d(x, u);
            for (std::size_t y : partners[x]) {
                for (std::size_t v : partners[u]) worst = std::max(worst, std::abs(dx - Y.d(y, v)));
            }
        }
    }
    return worst / 2.0;
}

double embedding_hausdorff(const FiniteMetricSpace& X, const FiniteMetricSpace& Y) {
    require_embedding(X, "X");
    require_embedding(Y, "Y");
    auto one_side = [](const FiniteMetricSpace& A, const FiniteMetricSpace& B) {
        double worst = 0.0;
        for (std::size_t i = 0; i < A.size(); ++i) {
            double near = std::numeric_limits<double>::infinity();
            for (std::size_t j = 0; j < B.size(); ++j) near = std::min(near, euclid(A.position(i), B.position(j)));
            worst = std::max(worst, near);
        }
        return worst;
    };
    return std::max(one_side(X, Y), one_side(Y, X));
}

std::vector<std::size_t> farthest_point_sample(const FiniteMetricSpace& X, std::size_t k, std::size_t first) {
    const std::size_t m = X.size();
    k = std::min(k, m);
    std::vector<std::size_t> out;
    if (k == 0) return out;
    if (first >= m) throw std::out_of_range("farthest_point_sample: first point out of range");
    std::vector<double> gap(m, std::numeric_limits<double>::infinity());
    std::size_t next = first;
    while (out.size() < k) {
        out.push_back(next);
        for (std::size_t i = 0; i < m; ++i) gap[i] = std::min(gap[i], X.d(next, i));
        next = static_cast<std::size_t>(std::max_element(gap.begin(), gap.end()) - gap.begin());
    }
    return out;
}

FiniteMetricSpace cluster_geodesic_space(const ClusterLabeling& labeling, int cluster_id, double q_geo,
                                         std::size_t sample) {
    if (!(q_geo > 0.0)) throw std::invalid_argument("cluster_geodesic_space: q_geo must be positive");
    if (sample == 0) throw std::invalid_argument("cluster_geodesic_space: sample must be positive");
    const SiteGraph g = SiteGraph::cluster(labeling, Color::Open, cluster_id);
    const auto m = static_cast<std::size_t>(g.size());
    const std::size_t k = std::min(sample, m);

    // Farthest-point net under hop distance; rows[i] holds BFS distances from the i-th chosen vertex.
    std::vector<std::vector<int>> rows;
    std::vector<int> chosen;
    std::vector<int> gap(m, std::numeric_limits<int>::max());
    int next = 0;
    while (chosen.size() < k) {
        chosen.push_back(next);
        rows.push_back(bfs_distances(g, next));
        const auto& row = rows.back();
        for (std::size_t i = 0; i < m; ++i) gap[i] = std::min(gap[i], row[i]);
        next = static_cast<int>(std::max_element(gap.begin(), gap.end()) - gap.begin());
    }

    const Box& box = labeling.box();
    const double n = box.side;
    std::vector<int> ids;
    std::vector<double> dist(k * k);
    std::vector<Point2> pos;
    for (std::size_t i = 0; i < k; ++i) {
        const TriCoord s = g.site(chosen[i]);
        ids.push_back(static_cast<int>(box.index(s)));
        pos.push_back({(s.a - box.lo.a) / n, (s.b - box.lo.b) / n});
        for (std::size_t j = 0; j < k; ++j) {
            dist[i * k + j] = rows[i][static_cast<std::size_t>(chosen[j])] / q_geo;
        }
    }
    return FiniteMetricSpace(std::move(ids), std::move(dist), std::move(pos));
}

CoupledGh coupled_gh(int n, std::uint64_t seed, double q1, double q2, std::size_t sample) {
    if (n < 2) throw std::invalid_argument("coupled_gh: n must be at least 2");
    auto space = [&](int side, double q) {
        const Box box{{-side / 2, -side / 2}, side};
        const ClusterLabeling lab(Configuration::sample(box, seed));
        if (lab.largest_open() < 0) throw std::runtime_error("coupled_gh: no open site in a box of side " + std::to_string(side));
        return cluster_geodesic_space(lab, lab.largest_open(), q, sample);
    };
    const auto X = space(n, q1);
    const auto Y = space(2 * n, q2);
    CoupledGh out{n, 2 * n, embedding_hausdorff(X, Y), 0.0};
    out.value = gh_upper_by_embedding(X, Y, out.match_radius);
    return out;
}

double measure_discrepancy(const AtomicMeasure& mu1, const AtomicMeasure& mu2, int grid_k) {
    if (grid_k < 1) throw std::invalid_argument("measure_discrepancy: grid_k must be positive");
    const auto cells = static_cast<std::size_t>(grid_k) * static_cast<std::size_t>(grid_k);
    std::vector<double> diff(cells, 0.0);
    auto add = [&](const AtomicMeasure& mu, double sign) {
        if (mu.atoms.empty()) return;
        if (mu.n < 1) throw std::invalid_argument("measure_discrepancy: measure without a box side");
        auto cell = [&](int offset) {
            const int c = static_cast<int>(std::floor(static_cast<double>(offset) / mu.n * grid_k));
            return static_cast<std::size_t>(std::clamp(c, 0, grid_k - 1));
        };
        for (const Atom& at : mu.atoms) {
            const std::size_t i = cell(at.site.b - mu.origin.b) * static_cast<std::size_t>(grid_k) + cell(at.site.a - mu.origin.a);
            diff[i] += sign * at.weight / mu.normalization;
        }
    };
    add(mu1, 1.0);
    add(mu2, -1.0);
    double total = 0.0;
    for (double v : diff) total += std::abs(v);
    return total;
}

}  // namespace perclab
