// Simple random walk on open clusters: return probabilities, exit times and
// one-arm conditioned environments.
#pragma once

#include <cstdint>
#include <vector>

#include "perclab/graph.hpp"
#include "perclab/percolation.hpp"
#include "perclab/resistance.hpp"

namespace perclab {

enum class Conditioning { None, OneArm };

struct WalkEnvironment {
    ClusterLabeling labeling;
    TriCoord start{};
    int cluster_id = -1;
    Conditioning conditioning = Conditioning::None;
    int arm_radius = 0;  // R of the one-arm conditioning
    std::uint64_t seed = 0;
    std::uint64_t attempts = 0;
};

/// Unconditioned environment; throws unless `start` is open.
WalkEnvironment make_environment(ClusterLabeling labeling, TriCoord start);

/// Transition matrix of the walk on the start cluster: uniform over open
/// neighbors, a self-loop at isolated sites.
struct WalkKernel {
    SiteGraph graph;
    int start = 0;

    double step(int from, int to) const;
};
WalkKernel walk_kernel(const WalkEnvironment& env);

inline constexpr std::size_t kExactWalkCap = 500'000;

/// p_{2t}(start, start) for t = 0..T by exact iteration of the kernel.
std::vector<double> return_probability_series(const WalkEnvironment& env, int T,
                                              std::size_t cap = kExactWalkCap);

/// Exit set of radius n: cluster sites at sup distance >= n - 1 from start.
/// Returns the expected number of steps to reach it.
double expected_exit_time(const WalkEnvironment& env, int radius, const SolverOptions& options = {});

struct IicSampling {
    int r = 8;
    int R_factor = 128;
    std::uint64_t seed = 0;
    std::uint64_t max_attempts = 10'000'000;  // gives up with AcceptanceError
};

/// Attempt i draws the lazily sampled plane configuration keyed by
/// hash64(seed, R, i), R = R_factor * r, and is accepted when the origin is
/// joined to the ring at distance R - 1. The environment is the configuration
/// on B(0, r) with the origin's cluster inside it.
WalkEnvironment sample_iic_environment(const IicSampling& setup);

struct WalkSimulation {
    std::uint64_t n_walks = 0;
    std::vector<double> p_hat;  // p_{2t} for t = 0..T
    std::vector<double> p_se;
    double tau_hat = 0.0;  // only when an exit radius was given
    double tau_se = 0.0;
};

struct WalkSimulationSetup {
    std::uint64_t n_walks = 1000;
    int t_max = 10;        // returns recorded at even times up to 2 t_max
    int exit_radius = 0;   // 0 skips exit times
    std::uint64_t seed = 0;
    int workers = 1;
    std::uint64_t max_steps = 100'000'000;
};

/// Monte Carlo counterpart of the exact operations. Walk w draws its steps
/// from stream w of the seed, so results do not depend on the worker count.
WalkSimulation simulate_walk_paths(const WalkEnvironment& env, const WalkSimulationSetup& setup);

}  // namespace perclab
