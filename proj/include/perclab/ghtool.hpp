// Gromov-Hausdorff distances between finite metric spaces.
#pragma once

#include <array>
#include <cstdint>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "perclab/measures.hpp"
#include "perclab/percolation.hpp"

namespace perclab {

using Point2 = std::array<double, 2>;

class FiniteMetricSpace {
public:
    FiniteMetricSpace() = default;

    /// `dist` is row-major |ids| x |ids|. Throws std::invalid_argument unless
    /// the diagonal is zero, the matrix symmetric and nonnegative, and the
    /// triangle inequality holds within 1e-9.
    FiniteMetricSpace(std::vector<int> ids, std::vector<double> dist,
                      std::optional<std::vector<Point2>> embedding = std::nullopt);

    std::size_t size() const { return ids_.size(); }
    int id(std::size_t i) const { return ids_[i]; }
    double d(std::size_t i, std::size_t j) const { return dist_[i * ids_.size() + j]; }
    bool has_embedding() const { return embedding_.has_value(); }
    const Point2& position(std::size_t i) const { return (*embedding_)[i]; }
    double diameter() const;

    /// The subspace on the given points, in that order.
    FiniteMetricSpace subspace(std::span<const std::size_t> points) const;

private:
    std::vector<int> ids_;
    std::vector<double> dist_;
    std::optional<std::vector<Point2>> embedding_;
};

inline constexpr std::size_t kExactGhCap = 36;

/// Half the least distortion over all correspondences, by branch and bound.
/// Requires |X| * |Y| <= kExactGhCap.
double gh_exact_small(const FiniteMetricSpace& X, const FiniteMetricSpace& Y);

/// Half the distortion of {(x, y) : |pi(x) - pi(y)| <= match_radius}, an upper
/// bound for the distance. Throws if a point has no partner, naming it.
double gh_upper_by_embedding(const FiniteMetricSpace& X, const FiniteMetricSpace& Y, double match_radius);

/// Least match radius for which every point of either space has a partner:
/// the Hausdorff distance between the embedded point sets.
double embedding_hausdorff(const FiniteMetricSpace& X, const FiniteMetricSpace& Y);

/// Greedy farthest-point net of k points, starting from point `first`.
std::vector<std::size_t> farthest_point_sample(const FiniteMetricSpace& X, std::size_t k, std::size_t first = 0);

inline constexpr std::size_t kGhSampleSize = 200;

/// The open cluster with hop distances divided by q_geo, embedded in the unit
/// square by (site - box corner) / n. Clusters larger than `sample` points
/// are reduced to a farthest-point net, built with BFS from each chosen site.
FiniteMetricSpace cluster_geodesic_space(const ClusterLabeling& labeling, int cluster_id, double q_geo,
                                         std::size_t sample = kGhSampleSize);

struct CoupledGh {
    int n1 = 0;
    int n2 = 0;
    double match_radius = 0.0;
    double value = 0.0;
};

/// Boxes of sides n and 2n centered on the origin share the sites of the
/// smaller one, so one seed couples both. Compares the largest open clusters,
/// rescaled by q1 and q2, through the embedding correspondence at the least
/// covering radius.
CoupledGh coupled_gh(int n, std::uint64_t seed, double q1, double q2, std::size_t sample = kGhSampleSize);

/// L1 distance between the masses the two measures give the cells of a
/// grid_k x grid_k partition of the unit square. A coarse surrogate only: it is
/// not the Prokhorov distance and is not bounded by it.
double measure_discrepancy(const AtomicMeasure& mu1, const AtomicMeasure& mu2, int grid_k);

}  // namespace perclab
