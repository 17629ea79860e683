// Normalized counting measures on clusters and box-counting volume.
#pragma once

#include <vector>

#include "perclab/arms.hpp"
#include "perclab/lattice.hpp"
#include "perclab/percolation.hpp"

namespace perclab {

struct Atom {
    TriCoord site{};
    double weight = 1.0;
};

struct AtomicMeasure {
    std::vector<Atom> atoms;
    double normalization = 1.0;
    int n = 0;
    TriCoord origin{};  // lower corner of the box; (site - origin) / n lies in the unit square

    double total_mass() const;
};

/// Unit atoms on the open cluster, divided by n^2 * one_arm_hat with n the box side.
AtomicMeasure cluster_measure(const ClusterLabeling& labeling, int cluster_id, double one_arm_hat);

/// The inner face of an annulus is the hole {sup_distance < r_in - 1}; the
/// outer face is {sup_distance > r_out - 1}. Atoms sit on open inner-face
/// sites joined inside the box to an outer-face site.
std::vector<TriCoord> inner_face(const Box& box, const Annulus& annulus);
AtomicMeasure annulus_measure(const Configuration& cfg, const Annulus& annulus, double one_arm_hat = 1.0);

/// Level-k boxes have side floor(n / 2^k) and are anchored at the box corner;
/// the last row and column of boxes may be partial. Y_k counts boxes Q whose
/// double 2Q (same center, floor(side / 2) more on each side) meets the open
/// cluster. Returns 0 for cluster_id < 0.
int box_count_Yk(const ClusterLabeling& labeling, int cluster_id, int k);

/// Y_0 .. Y_kmax in one pass.
std::vector<int> box_counts(const ClusterLabeling& labeling, int cluster_id, int kmax);

/// Mass of the annulus measure carried by atoms x with two disjoint open arms
/// across A(x; 2, r); atoms too close to the box edge for that annulus are skipped.
double two_arm_mass(const Configuration& cfg, const Annulus& annulus, int r, double one_arm_hat = 1.0);

}  // namespace perclab
