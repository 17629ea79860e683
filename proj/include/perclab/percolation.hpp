// Site percolation configurations on a box of the triangular lattice, their
// open/closed cluster structure, crossing events and interface loops.
#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string_view>
#include <vector>

#include "perclab/lattice.hpp"
#include "perclab/rng.hpp"

namespace perclab {

enum class Color : std::uint8_t { Closed = 0, Open = 1 };

constexpr Color opposite(Color c) { return c == Color::Open ? Color::Closed : Color::Open; }
constexpr char color_letter(Color c) { return c == Color::Open ? 'O' : 'C'; }

enum class Direction { LeftRight, TopBottom };

/// Colors of every site in a box, one bit per site in row-major order.
class Configuration {
public:
    Configuration() = default;
    /// All-closed configuration on `box`.
    Configuration(Box box, std::uint64_t seed, double p);

    static Configuration sample(const Box& box, std::uint64_t seed, double p = 0.5);
    static Configuration filled(const Box& box, Color color);
    /// Hand-laid configuration on Lambda_n. Rows are listed top (b = n - 1)
    /// to bottom (b = 0); '1', 'O', 'o' or '#' mark open sites.
    static Configuration from_rows(std::span<const std::string_view> rows);

    const Box& box() const { return box_; }
    std::uint64_t seed() const { return seed_; }
    double p() const { return p_; }

    bool is_open(std::size_t index) const { return (words_[index >> 6] >> (index & 63)) & 1u; }
    bool is_open(TriCoord s) const { return is_open(box_.index(s)); }
    Color color(std::size_t index) const { return is_open(index) ? Color::Open : Color::Closed; }
    Color color(TriCoord s) const { return color(box_.index(s)); }
    bool has_color(TriCoord s, Color c) const { return is_open(s) == (c == Color::Open); }

    void set_open(TriCoord s, bool open);
    void set_color(TriCoord s, Color c) { set_open(s, c == Color::Open); }
    void flip(TriCoord s) { set_open(s, !is_open(s)); }

    std::size_t count_open() const;
    const std::vector<std::uint64_t>& words() const { return words_; }

    friend bool operator==(const Configuration&, const Configuration&) = default;

private:
    Box box_{};
    std::uint64_t seed_ = 0;
    double p_ = 0.5;
    std::vector<std::uint64_t> words_;
};

/// Site colors evaluated on demand from (seed, p); agrees with
/// Configuration::sample on every site of every box.
class LazyConfiguration {
public:
    LazyConfiguration(std::uint64_t seed, double p = 0.5) : seed_(seed), threshold_(p) {}
    bool is_open(TriCoord s) const { return threshold_.open(site_uniform(seed_, s)); }
    std::uint64_t seed() const { return seed_; }
    double p() const { return threshold_.p(); }

private:
    std::uint64_t seed_;
    OpenThreshold threshold_;
};

/// Binary format: "PERC1" | u32 side | u64 seed | f64 p | ceil(side^2/8)
/// bitset bytes, row-major, LSB first, all little-endian. The box is Lambda_side.
void write_configuration(std::ostream& out, const Configuration& cfg);
Configuration read_configuration(std::istream& in);

/// Inclusive bounding rectangle in triangular coordinates.
struct SiteRect {
    TriCoord lo{};
    TriCoord hi{};
};

struct Cluster {
    int id = 0;
    Color color = Color::Open;
    std::size_t size = 0;
    double diam = 0.0;
    SiteRect bbox{};
    std::size_t min_site = 0;  // smallest row-major index in the cluster
};

/// Same-color connected components. Open and closed clusters have separate id
/// spaces; within a color, ids follow descending Euclidean diameter with ties
/// broken by the smallest member index.
class ClusterLabeling {
public:
    ClusterLabeling() = default;
    explicit ClusterLabeling(Configuration cfg);

    const Configuration& config() const { return cfg_; }
    const Box& box() const { return cfg_.box(); }

    int label(std::size_t index) const { return labels_[index]; }
    int label(TriCoord s) const { return labels_[cfg_.box().index(s)]; }
    Color color(TriCoord s) const { return cfg_.color(s); }

    const std::vector<Cluster>& clusters(Color c) const {
        return c == Color::Open ? open_ : closed_;
    }
    const Cluster& cluster(Color c, int id) const;
    /// Member site indices in increasing row-major order.
    std::span<const std::uint32_t> members(Color c, int id) const;
    std::vector<TriCoord> sites(Color c, int id) const;

    bool same_cluster(TriCoord x, TriCoord y) const {
        return cfg_.color(x) == cfg_.color(y) && label(x) == label(y);
    }
    /// Open cluster with the largest diameter, or -1 when there is none.
    int largest_open() const { return open_.empty() ? -1 : 0; }

private:
    Configuration cfg_;
    std::vector<int> labels_;
    std::vector<Cluster> open_;
    std::vector<Cluster> closed_;
    // members_[offsets_[c][id] .. offsets_[c][id + 1]) per color
    std::vector<std::uint32_t> open_members_;
    std::vector<std::uint32_t> closed_members_;
    std::vector<std::size_t> open_offsets_;
    std::vector<std::size_t> closed_offsets_;
};

ClusterLabeling label_clusters(const Configuration& cfg);

/// Euclidean diameter of a site set given in row-major order of `box`.
double euclidean_diameter(const Box& box, std::span<const std::uint32_t> sorted_members);

bool has_crossing(const Configuration& cfg, Color color, Direction direction);

/// Ids of `color` clusters that touch both sides named by `direction`.
std::vector<int> crossing_clusters(const ClusterLabeling& labeling, Color color,
                                   Direction direction);

/// A hexagonal dual edge, identified by the open and closed sites it separates.
/// Either site may lie outside the box, in the exterior collar.
struct DualEdge {
    TriCoord open_site{};
    TriCoord closed_site{};
    friend bool operator==(const DualEdge&, const DualEdge&) = default;
};

/// Closed interface curve, traversed with open sites on the left.
struct InterfaceLoop {
    std::vector<DualEdge> edges;
    Color enclosed_color = Color::Open;
};

std::vector<InterfaceLoop> trace_interfaces(const Configuration& cfg,
                                            Color collar = Color::Closed);

}  // namespace perclab
