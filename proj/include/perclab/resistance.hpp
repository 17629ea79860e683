// Effective resistance on unit-conductance site graphs.
#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "perclab/graph.hpp"
#include "perclab/metrics.hpp"
#include "perclab/percolation.hpp"

namespace perclab {

struct SolverOptions {
    double tolerance = 1e-10;  // relative residual
    int max_iters = 0;         // 0 picks 20 * unknowns + 100
};

class SolverError : public std::runtime_error {
public:
    SolverError(const std::string& what, double residual, int iterations)
        : std::runtime_error(what), residual_(residual), iterations_(iterations) {}
    double residual() const { return residual_; }
    int iterations() const { return iterations_; }

private:
    double residual_;
    int iterations_;
};

/// Solves the Dirichlet problem deg(v) u(v) - sum_{w ~ v} u(w) = rhs(v) at free
/// vertices, with u = value on vertices where `fixed` is nonzero, by
/// Jacobi-preconditioned conjugate gradients. Returns u on every vertex.
std::vector<double> solve_dirichlet(const SiteGraph& graph, std::span<const std::uint8_t> fixed,
                                    std::span<const double> value, std::span<const double> rhs,
                                    const SolverOptions& options = {});

/// Same system by envelope Cholesky under a reverse Cuthill-McKee order.
std::vector<double> solve_dirichlet_exact(const SiteGraph& graph, std::span<const std::uint8_t> fixed,
                                          std::span<const double> value, std::span<const double> rhs);

/// sum over edges of (u(v) - u(w))^2.
double dirichlet_energy(const SiteGraph& graph, std::span<const double> u);

inline constexpr std::size_t kExactResistanceCap = 2000;

/// Resistance between disjoint nonempty vertex sets a and b.
double effective_resistance(const SiteGraph& graph, std::span<const int> a, std::span<const int> b,
                            const SolverOptions& options = {});
double effective_resistance_exact(const SiteGraph& graph, std::span<const int> a, std::span<const int> b,
                                  std::size_t cap = kExactResistanceCap);

struct ResistanceProblem {
    const ClusterLabeling* labeling = nullptr;
    int cluster_id = 0;  // open cluster
    std::vector<TriCoord> source;
    std::vector<TriCoord> sink;
    double tolerance = 1e-10;
    int max_iters = 0;
};

double effective_resistance(const ResistanceProblem& problem);
double effective_resistance_exact(const ResistanceProblem& problem, std::size_t cap = kExactResistanceCap);

/// Fills d_res for every sample whose endpoints share a cluster, building one
/// graph per cluster.
void pairwise_resistance_fill(const ClusterLabeling& labeling, std::span<MetricSample> samples,
                              const SolverOptions& options = {});

}  // namespace perclab
