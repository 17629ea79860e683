// Arm events across annuli, arm-probability estimation and pivotal sites.
//
// An arm of A(c; r, R) is a same-color path inside the closed annulus
// r - 1 <= sup_distance(x, c) <= R - 1 joining its inner ring to its outer
// ring. In the half-plane variant only sites with b >= c.b take part.
#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "perclab/lattice.hpp"
#include "perclab/percolation.hpp"

namespace perclab {

using ColorSequence = std::vector<Color>;

/// "OCOC" style strings; 'O'/'o'/'1' open, 'C'/'c'/'0' closed.
ColorSequence parse_sigma(std::string_view text);
std::string sigma_string(const ColorSequence& sigma);

struct ArmQuery {
    Annulus annulus;
    ColorSequence sigma;
    bool half_plane = false;
};

struct ArmCount {
    ArmQuery query;
    bool satisfied = false;  // last evaluated configuration
    std::uint64_t n_samples = 0;
    std::uint64_t n_hits = 0;
    std::uint64_t seed = 0;

    double estimate() const;
    double standard_error() const;
};

bool in_arm_region(const Annulus& annulus, bool half_plane, TriCoord site);

/// Maximum number of vertex-disjoint `color` arms (Menger via max-flow).
int count_disjoint_monochromatic(const Configuration& cfg, const Annulus& annulus, Color color,
                                 bool half_plane = false);

/// Colors of the crossing clusters of the annulus in the order they meet the
/// outer ring, read counterclockwise. Consecutive hits of one cluster are
/// merged. `capacity[i]` is the number of disjoint arms inside cluster i,
/// capped at `capacity_cap` (capacities are not computed when the cap is 1).
struct CrossingWord {
    std::vector<Color> colors;
    std::vector<int> capacity;
    bool cyclic = true;
};

CrossingWord crossing_word(const Configuration& cfg, const Annulus& annulus, bool half_plane,
                           int capacity_cap = 1);

/// True when sigma, read clockwise, embeds into the word: each arm of sigma is
/// placed on a crossing cluster of its color, in order, using at most
/// capacity[i] arms of cluster i.
bool word_matches(const CrossingWord& word, const ColorSequence& sigma);

/// Longest run of equal colors in sigma (cyclically unless half-plane).
int longest_run(const ColorSequence& sigma, bool cyclic);

bool has_alternating_arms(const Configuration& cfg, const ArmQuery& query);

/// Open sites whose closure destroys the open left-right crossing, sorted left
/// to right. Throws std::invalid_argument without a crossing.
std::vector<TriCoord> find_pivotals(const Configuration& cfg);

/// Depth-first search of one color component of the arm region around the
/// origin on a lazily sampled configuration, preferring outward steps and
/// stopping as soon as the ring at distance `stop` is reached.
class OutwardExplorer {
public:
    explicit OutwardExplorer(int max_radius);

    /// Largest sup distance reached by the `color` component of the sites at
    /// distance `inner` (restricted to distances >= inner), capped at `stop`;
    /// inner - 1 when no inner site has that color.
    int explore(std::uint64_t seed, double p, Color color, int inner, int stop, bool half_plane);

    int max_radius() const { return max_radius_; }

private:
    static bool test(const std::vector<std::uint64_t>& bits, std::size_t i) {
        return (bits[i >> 6] >> (i & 63)) & 1u;
    }
    void set(std::vector<std::uint64_t>& bits, std::size_t i) {
        bits[i >> 6] |= 1ull << (i & 63);
        touched_.push_back(i);
    }
    void clear();

    int max_radius_;
    Box box_;
    std::vector<std::uint64_t> visited_;
    std::vector<std::uint64_t> other_;
    std::vector<std::size_t> touched_;
    std::vector<TriCoord> stack_;
};

/// Evaluates one arm event for all outer radii at once on a lazily sampled
/// configuration centered at the origin. reach() returns the largest outer
/// ring distance d for which the event holds, so the event for A(0; r, R)
/// holds iff R - 1 <= reach.
class ArmScanner {
public:
    ArmScanner(int r, int r_max, ColorSequence sigma, bool half_plane, double p = 0.5);
    int reach(std::uint64_t seed);

    int r() const { return r_; }
    int r_max() const { return r_max_; }

private:
    int reach_monochromatic(std::uint64_t seed);
    int reach_alternating(std::uint64_t seed);
    int reach_general(std::uint64_t seed);
    bool in_region(TriCoord s, int outer) const;

    int r_;
    int r_max_;
    ColorSequence sigma_;
    bool half_;
    double p_;
    Box box_;
    std::unique_ptr<OutwardExplorer> explorer_;
    std::vector<std::vector<TriCoord>> rings_;
    std::vector<std::uint32_t> parent_;
    std::vector<std::uint8_t> state_;
    std::vector<std::uint32_t> touched_;
    std::vector<std::uint32_t> size_;
};

struct ArmFamily {
    int r = 1;
    std::vector<int> radii;  // outer radii R, each > r (or >= r for one color)
    ColorSequence sigma;
    bool half_plane = false;
};

/// One count per radius; sample i uses seed hash64(seed, max radius, i) and
/// all radii are read from the same configuration.
std::vector<ArmCount> estimate_arm_probability(const ArmFamily& family, std::uint64_t n_samples,
                                               std::uint64_t seed, int workers = 1, double p = 0.5);

}  // namespace perclab
