// Chemical distance and the path-diameter metric on clusters.
#pragma once

#include <optional>

#include "perclab/lattice.hpp"
#include "perclab/percolation.hpp"

namespace perclab {

/// Hop count inside a cluster; std::nullopt stands for an infinite distance.
using HopDistance = std::optional<int>;

struct MetricSample {
    TriCoord x{};
    TriCoord y{};
    HopDistance d_geo;
    std::optional<double> d_path_lo;
    std::optional<double> d_path_hi;
    std::optional<double> d_res;
};

HopDistance geodesic_distance(const ClusterLabeling& labeling, TriCoord x, TriCoord y);

/// Certified bounds on the smallest Euclidean diameter of a same-color path
/// from x to y, divided by `n` (the box side when n <= 0).
///
/// lo is the least r such that x and y are joined inside the lens
/// {z : |z - x| <= r and |z - y| <= r}; every path leaves the lens of any
/// smaller radius, so its diameter is at least lo. hi is the diameter of a
/// path found inside the lens of radius lo, hence hi <= 2 lo.
struct PathBracket {
    double lo = 0.0;
    double hi = 0.0;
};

PathBracket path_metric_bracket(const ClusterLabeling& labeling, TriCoord x, TriCoord y, int n = 0);

struct RescaledSample {
    TriCoord x{};
    TriCoord y{};
    std::optional<double> d_geo;
    std::optional<double> d_path_lo;
    std::optional<double> d_path_hi;
    std::optional<double> d_res;
};

/// Distances divided by the normalizing constants; d_path is already in
/// rescaled Euclidean units and is copied unchanged.
RescaledSample rescale(const MetricSample& sample, double q_geo, double q_res);

/// d_geo and the path bracket for one pair; d_res is left empty.
MetricSample measure_pair(const ClusterLabeling& labeling, TriCoord x, TriCoord y, int n = 0);

}  // namespace perclab
