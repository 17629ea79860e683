#include "perclab/lattice.hpp"

#include <cmath>

namespace perclab {

EuclidPoint euclid(TriCoord site) {
    return {site.a + 0.5 * site.b, site.b * (std::sqrt(3.0) / 2.0)};
}

double euclid_distance(TriCoord x, TriCoord y) {
    return 0.5 * std::sqrt(static_cast<double>(euclid_distance_sq4(x, y)));
}

int direction_index(TriCoord d) {
    for (int k = 0; k < 6; ++k) {
        if (kNeighborOffsets[k] == d) return k;
    }
    return -1;
}

std::vector<TriCoord> neighbors(TriCoord site, const Box& domain) {
    std::vector<TriCoord> out;
    out.reserve(6);
    for (const TriCoord& d : kNeighborOffsets) {
        const TriCoord y = site + d;
        if (domain.contains(y)) out.push_back(y);
    }
    return out;
}

std::vector<TriCoord> boundary_sites(const Box& box, Side side) {
    std::vector<TriCoord> out;
    out.reserve(static_cast<std::size_t>(box.side));
    for (int i = 0; i < box.side; ++i) {
        switch (side) {
            case Side::Left: out.push_back({box.lo.a, box.lo.b + i}); break;
            case Side::Right: out.push_back({box.lo.a + box.side - 1, box.lo.b + i}); break;
            case Side::Bottom: out.push_back({box.lo.a + i, box.lo.b}); break;
            case Side::Top: out.push_back({box.lo.a + i, box.lo.b + box.side - 1}); break;
        }
    }
    return out;
}

AnnulusZone annulus_membership(const Annulus& annulus, TriCoord site) {
    const int d = sup_distance(site, annulus.center);
    if (d < annulus.r_in) return AnnulusZone::InnerFace;
    if (d < annulus.r_out) return AnnulusZone::Annulus;
    return AnnulusZone::Outside;
}

std::vector<TriCoord> ring_sites(TriCoord c, int r) {
    if (r <= 0) return {c};
    std::vector<TriCoord> out;
    out.reserve(static_cast<std::size_t>(8 * r));
    for (int b = 0; b <= r; ++b) out.push_back({c.a + r, c.b + b});
    for (int a = r - 1; a >= -r; --a) out.push_back({c.a + a, c.b + r});
    for (int b = r - 1; b >= -r; --b) out.push_back({c.a - r, c.b + b});
    for (int a = -r + 1; a <= r; ++a) out.push_back({c.a + a, c.b - r});
    for (int b = -r + 1; b < 0; ++b) out.push_back({c.a + r, c.b + b});
    return out;
}

std::vector<TriCoord> half_ring_sites(TriCoord c, int r) {
    if (r <= 0) return {c};
    std::vector<TriCoord> out;
    out.reserve(static_cast<std::size_t>(4 * r + 1));
    for (int b = 0; b <= r; ++b) out.push_back({c.a + r, c.b + b});
    for (int a = r - 1; a >= -r; --a) out.push_back({c.a + a, c.b + r});
    for (int b = r - 1; b >= 0; --b) out.push_back({c.a - r, c.b + b});
    return out;
}

std::string_view to_string(Side side) {
    switch (side) {
        case Side::Left: return "L";
        case Side::Right: return "R";
        case Side::Top: return "T";
        case Side::Bottom: return "B";
    }
    return "?";
}

}  // namespace perclab
