// The three-crossing event on Lambda_n, the distance X_n between its touch
// points, and conditional quantiles of X_n.
#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string_view>
#include <vector>

#include "perclab/lattice.hpp"
#include "perclab/percolation.hpp"
#include "perclab/resistance.hpp"

namespace perclab {

enum class MetricKind { Geo, Res };

std::string_view to_string(MetricKind kind);
MetricKind parse_metric_kind(std::string_view text);

struct EventEReport {
    bool holds = false;
    int top_cluster_id = -1;     // closed
    int bottom_cluster_id = -1;  // closed
    int middle_open_cluster_id = -1;
    std::optional<TriCoord> u;
    std::optional<TriCoord> v;
    double delta_used = 0.0;
    bool strict = false;
};

/// max(1/10000, 4/n).
double default_delta(int n);

/// Closed left-right crossing clusters with, for each, the largest over its
/// crossing paths of the lowest row visited (`floor`) and the smallest over its
/// crossing paths of the highest row visited (`ceiling`).
struct CrossingLevel {
    int cluster_id = -1;
    int floor = 0;
    int ceiling = 0;
};
std::vector<CrossingLevel> closed_crossing_levels(const ClusterLabeling& labeling);

/// Top is the closed crossing cluster with the highest floor, bottom the one
/// with the lowest ceiling. The event needs them distinct, an open site next
/// to both, and the open cluster of the touch points crossing left to right.
/// With `strict` the clusters must also hit and avoid the side midpoints at
/// scales delta and 2 delta, in coordinates where the box is the unit square.
EventEReport detect_event_E(const ClusterLabeling& labeling, double delta, bool strict);
EventEReport detect_event_E(const Configuration& cfg, double delta, bool strict);

/// Necessary condition for the event, checked without a full labeling: two
/// closed left-right crossing clusters share an open neighbor.
bool event_E_screen(const Configuration& cfg);

/// D(u, v) on the middle open cluster.
double compute_Xn(const ClusterLabeling& labeling, const EventEReport& report, MetricKind kind,
                  const SolverOptions& options = {});

/// inf{x : #{values <= x} >= level * size}.
double empirical_quantile(std::vector<double> values, double level);

class AcceptanceError : public std::runtime_error {
public:
    AcceptanceError(const std::string& what, std::uint64_t attempts, std::uint64_t accepted)
        : std::runtime_error(what), attempts_(attempts), accepted_(accepted) {}
    std::uint64_t attempts() const { return attempts_; }
    std::uint64_t accepted() const { return accepted_; }

private:
    std::uint64_t attempts_;
    std::uint64_t accepted_;
};

struct ConditionalSampling {
    int n = 0;
    bool geo = true;
    bool res = false;
    std::size_t n_conditional = 100;
    std::uint64_t seed = 0;
    bool strict = false;
    double delta = 0.0;  // 0 picks default_delta(n)
    int workers = 1;
    std::uint64_t max_attempts = 10'000'000;
    double min_acceptance = 1e-4;
};

struct ConditionalSamples {
    ConditionalSampling setup;
    double delta_used = 0.0;
    std::uint64_t attempts = 0;
    std::vector<std::uint64_t> accepted;  // attempt indices
    std::vector<double> geo;              // X_n per accepted attempt, when requested
    std::vector<double> res;

    const std::vector<double>& values(MetricKind kind) const { return kind == MetricKind::Geo ? geo : res; }
    double acceptance_rate() const {
        return attempts == 0 ? 0.0 : static_cast<double>(accepted.size()) / static_cast<double>(attempts);
    }
};

/// Rejection sampling of critical configurations on Lambda_n until
/// n_conditional attempts satisfy the event. Attempt i uses the configuration
/// seeded by hash64(seed, n, i), so results do not depend on the worker count.
/// Throws AcceptanceError when the acceptance rate is below min_acceptance
/// after max_attempts attempts.
ConditionalSamples sample_Xn(const ConditionalSampling& setup);

struct QuantileEstimate {
    int n = 0;
    double p = 0.5;
    MetricKind metric = MetricKind::Geo;
    double q_hat = 0.0;
    std::size_t n_conditional_samples = 0;
    double ci_lo = 0.0;
    double ci_hi = 0.0;
    std::uint64_t attempts = 0;
    double acceptance_rate = 0.0;
    double delta = 0.0;
    bool strict = false;
    std::uint64_t seed = 0;
};

inline constexpr int kBootstrapResamples = 1000;

/// (1 - p)-quantile of the samples with a 95% percentile bootstrap interval.
QuantileEstimate quantile_estimate(const ConditionalSamples& samples, MetricKind metric, double p,
                                   int resamples = kBootstrapResamples);

QuantileEstimate estimate_qn(int n, double p, MetricKind metric, std::size_t n_conditional,
                             std::uint64_t seed, bool strict, int workers = 1);

}  // namespace perclab
