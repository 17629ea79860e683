#include <algorithm>
#include <cmath>

#include "doctest.h"
#include "perclab/lattice.hpp"

using namespace perclab;

TEST_CASE("neighbors: corner, interior and edge sites of Lambda_3") {
    const Box box = Box::lambda(3);
    CHECK(neighbors({0, 0}, box) == std::vector<TriCoord>{{1, 0}, {0, 1}});
    CHECK(neighbors({1, 1}, box) ==
          std::vector<TriCoord>{{2, 1}, {1, 2}, {0, 2}, {0, 1}, {1, 0}, {2, 0}});
    CHECK(neighbors({2, 0}, box) == std::vector<TriCoord>{{2, 1}, {1, 1}, {1, 0}});
}

TEST_CASE("neighbors: symmetric relation and degree profile") {
    for (int n = 1; n <= 7; ++n) {
        const Box box = Box::lambda(n);
        for (std::size_t i = 0; i < box.size(); ++i) {
            const TriCoord x = box.site(i);
            const auto nx = neighbors(x, box);
            for (const TriCoord& y : nx) {
                const auto ny = neighbors(y, box);
                CHECK(std::find(ny.begin(), ny.end(), x) != ny.end());
                CHECK(adjacent(x, y));
            }
            if (n >= 3) {
                if (box.on_boundary(x)) {
                    CHECK(nx.size() >= 2);
                    CHECK(nx.size() <= 4);
                } else {
                    CHECK(nx.size() == 6);
                }
            }
        }
    }
}

TEST_CASE("boundary sites") {
    CHECK(boundary_sites(Box::lambda(2), Side::Left) == std::vector<TriCoord>{{0, 0}, {0, 1}});
    CHECK(boundary_sites(Box::lambda(2), Side::Right) == std::vector<TriCoord>{{1, 0}, {1, 1}});
    CHECK(boundary_sites(Box::lambda(4), Side::Top) ==
          std::vector<TriCoord>{{0, 3}, {1, 3}, {2, 3}, {3, 3}});
    for (int n = 2; n <= 6; ++n) {
        const Box box{{-3, 5}, n};
        const auto l = boundary_sites(box, Side::Left);
        const auto r = boundary_sites(box, Side::Right);
        CHECK(l.size() == static_cast<std::size_t>(n));
        CHECK(boundary_sites(box, Side::Top).size() == static_cast<std::size_t>(n));
        CHECK(boundary_sites(box, Side::Bottom).size() == static_cast<std::size_t>(n));
        for (const auto& s : l) CHECK(std::find(r.begin(), r.end(), s) == r.end());
    }
}

TEST_CASE("annulus membership by sup distance") {
    const Annulus ann{{0, 0}, 2, 4};
    CHECK(annulus_membership(ann, {0, 0}) == AnnulusZone::InnerFace);
    CHECK(annulus_membership(ann, {3, 0}) == AnnulusZone::Annulus);
    CHECK(annulus_membership(ann, {4, 4}) == AnnulusZone::Outside);
    CHECK(annulus_membership(ann, {1, -1}) == AnnulusZone::InnerFace);
    CHECK(annulus_membership(ann, {-2, 2}) == AnnulusZone::Annulus);
}

TEST_CASE("euclidean embedding") {
    const EuclidPoint p = euclid({1, 1});
    CHECK(p.x == doctest::Approx(1.5));
    CHECK(p.y == doctest::Approx(std::sqrt(3.0) / 2.0));
    for (const TriCoord& d : kNeighborOffsets) CHECK(euclid_distance({0, 0}, d) == doctest::Approx(1.0));
    // Injective on a window.
    std::vector<std::pair<double, double>> seen;
    for (int a = -4; a <= 4; ++a) {
        for (int b = -4; b <= 4; ++b) {
            const EuclidPoint e = euclid({a, b});
            for (const auto& [x, y] : seen) CHECK((std::abs(x - e.x) + std::abs(y - e.y)) > 1e-9);
            seen.emplace_back(e.x, e.y);
        }
    }
}

TEST_CASE("box indexing is row-major from lo") {
    const Box box{{2, -1}, 4};
    CHECK(box.index({2, -1}) == 0);
    CHECK(box.index({3, -1}) == 1);
    CHECK(box.index({2, 0}) == 4);
    for (std::size_t i = 0; i < box.size(); ++i) CHECK(box.index(box.site(i)) == i);
    CHECK(ball({0, 0}, 3) == Box{{-2, -2}, 5});
}

TEST_CASE("rings are closed lattice cycles") {
    for (int r = 1; r <= 6; ++r) {
        const auto ring = ring_sites({1, -2}, r);
        REQUIRE(ring.size() == static_cast<std::size_t>(8 * r));
        for (std::size_t i = 0; i < ring.size(); ++i) {
            CHECK(sup_distance(ring[i], {1, -2}) == r);
            CHECK(adjacent(ring[i], ring[(i + 1) % ring.size()]));
        }
        const auto half = half_ring_sites({0, 0}, r);
        CHECK(half.size() == static_cast<std::size_t>(4 * r + 1));
        CHECK(half.front() == TriCoord{r, 0});
        CHECK(half.back() == TriCoord{-r, 0});
        for (std::size_t i = 0; i + 1 < half.size(); ++i) CHECK(adjacent(half[i], half[i + 1]));
    }
    CHECK(ring_sites({3, 3}, 0) == std::vector<TriCoord>{{3, 3}});
}
