#include <algorithm>
#include <bit>
#include <cstdint>
#include <set>

#include "doctest.h"
#include "menger_oracle.hpp"
#include "perclab/arms.hpp"
#include "perclab/rng.hpp"

using namespace perclab;
using namespace perclab::oracle;

namespace {

bool bfs_connects(const Configuration& cfg, const Annulus& ann, bool half, Color color) {
    std::vector<TriCoord> queue;
    std::set<TriCoord> seen;
    for (std::size_t i = 0; i < cfg.box().size(); ++i) {
        const TriCoord s = cfg.box().site(i);
        if (in_arm_region(ann, half, s) && cfg.has_color(s, color) &&
            sup_distance(s, ann.center) == ann.inner_ring()) {
            queue.push_back(s);
            seen.insert(s);
        }
    }
    for (std::size_t q = 0; q < queue.size(); ++q) {
        if (sup_distance(queue[q], ann.center) == ann.outer_ring()) return true;
        for (const TriCoord& y : neighbors(queue[q], cfg.box())) {
            if (in_arm_region(ann, half, y) && cfg.has_color(y, color) && seen.insert(y).second) queue.push_back(y);
        }
    }
    return false;
}

Configuration random_config(const Box& box, std::uint64_t seed, double p) {
    return Configuration::sample(box, seed, p);
}

}  // namespace

TEST_CASE("sigma parsing and runs") {
    CHECK(sigma_string(parse_sigma("ocOC")) == "OCOC");
    CHECK_THROWS(parse_sigma("OX"));
    CHECK_THROWS(parse_sigma(""));
    CHECK(longest_run(parse_sigma("OCOC"), true) == 1);
    CHECK(longest_run(parse_sigma("OCCO"), true) == 2);
    CHECK(longest_run(parse_sigma("OCOO"), true) == 3);
    CHECK(longest_run(parse_sigma("OCOO"), false) == 2);
    CHECK(longest_run(parse_sigma("OOO"), true) == 3);
}

TEST_CASE("word matching") {
    CrossingWord w{{Color::Open, Color::Closed, Color::Open, Color::Closed}, {1, 1, 1, 1}, true};
    CHECK(word_matches(w, parse_sigma("OCOC")));
    CHECK(word_matches(w, parse_sigma("CO")));
    CHECK_FALSE(word_matches(w, parse_sigma("OCOCOC")));
    CHECK(word_matches(w, parse_sigma("OOC")));
    CrossingWord w2{{Color::Open, Color::Closed}, {2, 1}, true};
    CHECK(word_matches(w2, parse_sigma("OOC")));
    CHECK_FALSE(word_matches(w2, parse_sigma("OOCC")));
    CrossingWord line{{Color::Closed, Color::Open, Color::Closed}, {1, 1, 1}, false};
    // Clockwise reading reverses the counterclockwise word.
    CHECK(word_matches(line, parse_sigma("COC")));
    CHECK_FALSE(word_matches(line, parse_sigma("OCO")));
}

TEST_CASE("count_disjoint_monochromatic: examples") {
    const Annulus ann{{3, 3}, 2, 4};
    const Box box = Box::lambda(7);
    CHECK(count_disjoint_monochromatic(Configuration::filled(box, Color::Closed), ann, Color::Open) == 0);
    // Every crossing meets the 8-site inner ring, and the 8 radial rays from it are disjoint.
    CHECK(count_disjoint_monochromatic(Configuration::filled(box, Color::Open), ann, Color::Open) == 8);

    Configuration ray(box, 0, 0.5);
    for (int a = 3; a < 7; ++a) ray.set_open({a, 3}, true);
    CHECK(count_disjoint_monochromatic(ray, ann, Color::Open) == 1);
    CHECK(count_disjoint_monochromatic(ray, ann, Color::Closed) ==
          brute_force_menger(annulus_graph(ray, ann, false, Color::Closed)));
    CHECK(brute_force_menger(annulus_graph(Configuration::filled(box, Color::Open), ann, false, Color::Open)) == 8);
    CHECK_THROWS(count_disjoint_monochromatic(ray, Annulus{{3, 3}, 2, 5}, Color::Open));
}

TEST_CASE("max-flow equals brute-force Menger value on small annuli") {
    struct Geometry {
        int r_in, r_out;
        bool half;
    };
    const Geometry geoms[] = {{1, 2, false}, {1, 3, false}, {2, 3, false}, {3, 4, false},
                              {1, 3, true},  {2, 4, true},  {3, 5, true},  {5, 6, true}};
    int checked = 0;
    for (const auto& g : geoms) {
        const Annulus ann{{5, g.half ? 0 : 5}, g.r_in, g.r_out};
        const Box box = g.half ? Box{{0, 0}, 11} : Box::lambda(11);
        for (double p : {0.3, 0.5, 0.7}) {
            for (std::uint64_t seed = 0; seed < 60; ++seed) {
                const auto cfg = random_config(box, hash64(seed, g.r_out, static_cast<std::uint64_t>(p * 10)), p);
                for (Color c : {Color::Open, Color::Closed}) {
                    const auto expected = brute_force_menger(annulus_graph(cfg, ann, g.half, c));
                    CHECK(count_disjoint_monochromatic(cfg, ann, c, g.half) == expected);
                    ++checked;
                }
            }
        }
    }
    CHECK(checked == 8 * 3 * 60 * 2);
}

TEST_CASE("Menger consistency with BFS connectivity") {
    for (std::uint64_t seed = 0; seed < 1000; ++seed) {
        const int r_in = 1 + static_cast<int>(seed % 4);
        const int r_out = r_in + 1 + static_cast<int>((seed / 4) % 3);
        const Annulus ann{{7, 7}, r_in, r_out};
        const auto cfg = random_config(Box::lambda(15), seed, 0.5);
        const int count = count_disjoint_monochromatic(cfg, ann, Color::Open);
        CHECK((count >= 1) == bfs_connects(cfg, ann, false, Color::Open));
    }
}

TEST_CASE("has_alternating_arms: examples") {
    const Box box = Box::lambda(7);
    const Annulus ann{{3, 3}, 2, 4};
    const auto open = Configuration::filled(box, Color::Open);
    CHECK(has_alternating_arms(open, {ann, parse_sigma("O"), false}));
    CHECK_FALSE(has_alternating_arms(open, {ann, parse_sigma("OC"), false}));
    CHECK(has_alternating_arms(open, {ann, parse_sigma("OO"), false}));
    CHECK_FALSE(has_alternating_arms(open, {ann, parse_sigma("OOC"), false}));

    // Two open halves joined only through the center.
    const std::string_view rows[] = {"1110111", "1110111", "1110111", "1111111",
                                     "1110111", "1110111", "1110111"};
    const auto hour = Configuration::from_rows(rows);
    CHECK(has_alternating_arms(hour, {ann, parse_sigma("OCOC"), false}));
    CHECK(has_alternating_arms(hour, {ann, parse_sigma("COCO"), false}));
    CHECK_FALSE(has_alternating_arms(hour, {ann, parse_sigma("OCOCOC"), false}));
    // The four arms, checked directly: disjoint, colored, inner ring to outer ring.
    const std::vector<std::vector<TriCoord>> arms = {
        {{2, 3}, {1, 3}, {0, 3}}, {{3, 4}, {3, 5}, {3, 6}}, {{4, 3}, {5, 3}, {6, 3}}, {{3, 2}, {3, 1}, {3, 0}}};
    std::set<TriCoord> used;
    for (std::size_t k = 0; k < arms.size(); ++k) {
        const Color want = k % 2 == 0 ? Color::Open : Color::Closed;
        CHECK(sup_distance(arms[k].front(), ann.center) == ann.inner_ring());
        CHECK(sup_distance(arms[k].back(), ann.center) == ann.outer_ring());
        for (std::size_t i = 0; i < arms[k].size(); ++i) {
            CHECK(hour.has_color(arms[k][i], want));
            CHECK(used.insert(arms[k][i]).second);
            if (i > 0) CHECK(adjacent(arms[k][i - 1], arms[k][i]));
        }
    }
    // Closing the center's left neighbour leaves the left half attached
    // elsewhere: still four arms. Closing the whole left column of the ring
    // removes one open arm.
    Configuration broken = hour;
    for (int b = 0; b < 7; ++b) broken.set_open({2, b}, false);
    CHECK_FALSE(has_alternating_arms(broken, {ann, parse_sigma("OCOC"), false}));
}

TEST_CASE("has_alternating_arms: half-plane anchoring") {
    const Box box{{0, 0}, 9};
    const auto cfg = random_config(box, 3, 0.5);
    CHECK_THROWS(has_alternating_arms(cfg, {Annulus{{4, 2}, 1, 3}, parse_sigma("OCO"), true}));
    CHECK_NOTHROW(has_alternating_arms(cfg, {Annulus{{4, 0}, 1, 3}, parse_sigma("OCO"), true}));
}

TEST_CASE("find_pivotals: examples") {
    Configuration line(Box::lambda(5), 0, 0.5);
    for (int a = 0; a < 5; ++a) line.set_open({a, 2}, true);
    CHECK(find_pivotals(line) == std::vector<TriCoord>{{0, 2}, {1, 2}, {2, 2}, {3, 2}, {4, 2}});
    CHECK(find_pivotals(Configuration::filled(Box::lambda(3), Color::Open)).empty());
    const std::string_view hourglass[] = {"11011", "11011", "11011", "11111", "11011"};
    CHECK(find_pivotals(Configuration::from_rows(hourglass)) == std::vector<TriCoord>{{2, 1}});
    CHECK_THROWS(find_pivotals(Configuration::filled(Box::lambda(4), Color::Closed)));
}

TEST_CASE("find_pivotals agrees with exhaustive single-site removal") {
    int with_crossing = 0;
    for (std::uint64_t seed = 0; seed < 400; ++seed) {
        const int n = 4 + static_cast<int>(seed % 9);
        const auto cfg = random_config(Box::lambda(n), seed, 0.5);
        if (!has_crossing(cfg, Color::Open, Direction::LeftRight)) {
            CHECK_THROWS(find_pivotals(cfg));
            continue;
        }
        ++with_crossing;
        std::vector<TriCoord> expected;
        for (std::size_t i = 0; i < cfg.box().size(); ++i) {
            if (!cfg.is_open(i)) continue;
            Configuration flipped = cfg;
            flipped.set_open(cfg.box().site(i), false);
            if (!has_crossing(flipped, Color::Open, Direction::LeftRight)) expected.push_back(cfg.box().site(i));
        }
        std::sort(expected.begin(), expected.end(), left_of);
        CHECK(find_pivotals(cfg) == expected);
    }
    CHECK(with_crossing > 100);
}

TEST_CASE("pivotal sites carry four alternating arms") {
    int found = 0, checked = 0;
    for (std::uint64_t seed = 0; found < 200; ++seed) {
        const auto cfg = random_config(Box::lambda(32), hash64(77, 32, seed), 0.5);
        if (!has_crossing(cfg, Color::Open, Direction::LeftRight)) continue;
        ++found;
        for (const TriCoord& x : find_pivotals(cfg)) {
            const int room = std::min({x.a, x.b, 31 - x.a, 31 - x.b});
            if (room < 2) continue;
            const Annulus ann{x, 2, room + 1};
            CHECK(has_alternating_arms(cfg, {ann, parse_sigma("OCOC"), false}));
            ++checked;
        }
    }
    CHECK(checked > 200);
}

TEST_CASE("scanner agrees with per-radius evaluation") {
    struct Case {
        const char* sigma;
        int r;
        bool half;
    };
    const Case cases[] = {{"O", 1, false}, {"C", 2, false}, {"O", 2, true},    {"OC", 1, false},
                          {"OCOC", 2, false}, {"OCO", 2, true}, {"OCOC", 3, true}, {"OOC", 2, false},
                          {"OO", 2, true}};
    const int r_max = 10;
    for (const auto& c : cases) {
        ArmScanner scanner(c.r, r_max, parse_sigma(c.sigma), c.half);
        for (std::uint64_t seed = 0; seed < 150; ++seed) {
            const int reach = scanner.reach(seed);
            const Box box = c.half ? Box{{-(r_max - 1), 0}, 2 * r_max - 1} : ball({0, 0}, r_max);
            const auto cfg = Configuration::sample(box, seed, 0.5);
            for (int R = c.r + 1; R <= r_max; ++R) {
                const bool holds = has_alternating_arms(cfg, {Annulus{{0, 0}, c.r, R}, parse_sigma(c.sigma), c.half});
                CHECK(holds == (R - 1 <= reach));
            }
        }
    }
}

TEST_CASE("estimate_arm_probability: center site and determinism") {
    const ArmFamily fam{1, {1}, parse_sigma("O"), false};
    const auto est = estimate_arm_probability(fam, 40000, 9);
    REQUIRE(est.size() == 1);
    CHECK(std::abs(est[0].estimate() - 0.5) <= 4.0 * est[0].standard_error());

    const ArmFamily four{2, {4, 8, 12}, parse_sigma("OCOC"), false};
    const auto a = estimate_arm_probability(four, 3000, 5, 1);
    const auto b = estimate_arm_probability(four, 3000, 5, 3);
    for (std::size_t k = 0; k < a.size(); ++k) CHECK(a[k].n_hits == b[k].n_hits);
    CHECK(a[0].n_hits >= a[1].n_hits);
    CHECK(a[1].n_hits >= a[2].n_hits);
    CHECK_THROWS(estimate_arm_probability(ArmFamily{4, {4}, parse_sigma("OC"), false}, 10, 1));
}
