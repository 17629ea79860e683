// Triangular-lattice geometry in integer triangular coordinates.
//
// A site (a, b) sits at the Euclidean point (a + b/2, b*sqrt(3)/2). Boxes are
// parallelograms with interior angles pi/3 and 2pi/3, and balls use the sup
// norm max(|da|, |db|), so every ball is itself a parallelogram.
#pragma once

#include <array>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <cstdlib>
#include <string_view>
#include <vector>

namespace perclab {

struct TriCoord {
    int a = 0;
    int b = 0;

    friend constexpr auto operator<=>(const TriCoord&, const TriCoord&) = default;
    constexpr TriCoord operator+(TriCoord o) const { return {a + o.a, b + o.b}; }
    constexpr TriCoord operator-(TriCoord o) const { return {a - o.a, b - o.b}; }
};

struct EuclidPoint {
    double x = 0.0;
    double y = 0.0;
};

EuclidPoint euclid(TriCoord site);
double euclid_distance(TriCoord x, TriCoord y);

/// Squared Euclidean distance scaled by 4, which is an exact integer.
constexpr std::int64_t euclid_distance_sq4(TriCoord x, TriCoord y) {
    const std::int64_t da = x.a - y.a;
    const std::int64_t db = x.b - y.b;
    return 4 * (da * da + da * db + db * db);
}

/// The six lattice directions in counterclockwise order starting from (+1, 0).
inline constexpr std::array<TriCoord, 6> kNeighborOffsets = {
    TriCoord{1, 0}, TriCoord{0, 1}, TriCoord{-1, 1},
    TriCoord{-1, 0}, TriCoord{0, -1}, TriCoord{1, -1}};

/// Index into kNeighborOffsets of `d`, or -1 when `d` is not a unit step.
int direction_index(TriCoord d);

constexpr bool adjacent(TriCoord x, TriCoord y) {
    const TriCoord d = y - x;
    return (d.a == 1 && d.b == 0) || (d.a == -1 && d.b == 0) || (d.a == 0 && d.b == 1) ||
           (d.a == 0 && d.b == -1) || (d.a == 1 && d.b == -1) || (d.a == -1 && d.b == 1);
}

/// Sup-norm distance in triangular coordinates. Adjacent sites are at distance 1.
constexpr int sup_distance(TriCoord x, TriCoord y) {
    const int da = std::abs(x.a - y.a);
    const int db = std::abs(x.b - y.b);
    return da > db ? da : db;
}

/// Left-to-right order used for pivotal sites: Euclidean x first, then b.
constexpr bool left_of(TriCoord x, TriCoord y) {
    const int kx = 2 * x.a + x.b;
    const int ky = 2 * y.a + y.b;
    return kx != ky ? kx < ky : x.b < y.b;
}

enum class Side { Left, Right, Top, Bottom };

/// The parallelogram {lo.a <= a < lo.a + side, lo.b <= b < lo.b + side}.
struct Box {
    TriCoord lo{};
    int side = 0;

    static constexpr Box lambda(int n) { return Box{{0, 0}, n}; }

    constexpr std::size_t size() const {
        return static_cast<std::size_t>(side) * static_cast<std::size_t>(side);
    }
    constexpr bool contains(TriCoord s) const {
        return s.a >= lo.a && s.a < lo.a + side && s.b >= lo.b && s.b < lo.b + side;
    }
    constexpr bool contains(const Box& o) const {
        return o.side <= 0 ||
               (o.lo.a >= lo.a && o.lo.b >= lo.b && o.lo.a + o.side <= lo.a + side &&
                o.lo.b + o.side <= lo.b + side);
    }
    /// Row-major index (b - lo.b) * side + (a - lo.a).
    constexpr std::size_t index(TriCoord s) const {
        return static_cast<std::size_t>(s.b - lo.b) * static_cast<std::size_t>(side) +
               static_cast<std::size_t>(s.a - lo.a);
    }
    constexpr TriCoord site(std::size_t index) const {
        const auto w = static_cast<std::size_t>(side);
        return {lo.a + static_cast<int>(index % w), lo.b + static_cast<int>(index / w)};
    }
    constexpr bool on_boundary(TriCoord s) const {
        return s.a == lo.a || s.b == lo.b || s.a == lo.a + side - 1 || s.b == lo.b + side - 1;
    }

    friend constexpr bool operator==(const Box&, const Box&) = default;
};

/// B(center, r) = {x : sup_distance(x, center) < r}, a box of side 2r - 1.
constexpr Box ball(TriCoord center, int r) {
    return Box{{center.a - (r - 1), center.b - (r - 1)}, 2 * r - 1};
}

enum class AnnulusZone { InnerFace, Annulus, Outside };

/// A(center; r_in, r_out) = B(center, r_out) minus B(center, r_in).
///
/// Arm events use the closed version of the annulus: crossings run from the
/// inner boundary ring {dist = r_in - 1} to the outer boundary ring
/// {dist = r_out - 1}. With r_in = 1 the inner ring is the center itself.
struct Annulus {
    TriCoord center{};
    int r_in = 1;
    int r_out = 2;

    constexpr int inner_ring() const { return r_in - 1; }
    constexpr int outer_ring() const { return r_out - 1; }
    constexpr Box outer_box() const { return ball(center, r_out); }

    friend constexpr bool operator==(const Annulus&, const Annulus&) = default;
};

std::vector<TriCoord> neighbors(TriCoord site, const Box& domain);
std::vector<TriCoord> boundary_sites(const Box& box, Side side);
AnnulusZone annulus_membership(const Annulus& annulus, TriCoord site);

/// Sites at sup distance exactly `radius` from `center`, counterclockwise
/// starting from (center.a + radius, center.b). Radius 0 yields the center.
std::vector<TriCoord> ring_sites(TriCoord center, int radius);

/// Upper half of ring_sites (b >= center.b), ordered from (radius, 0) through
/// the top to (-radius, 0).
std::vector<TriCoord> half_ring_sites(TriCoord center, int radius);

std::string_view to_string(Side side);

}  // namespace perclab
