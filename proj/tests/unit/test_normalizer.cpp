#include <algorithm>
#include <set>
#include <string>
#include <string_view>

#include "doctest.h"
#include "perclab/arms.hpp"
#include "perclab/normalizer.hpp"
#include "perclab/rng.hpp"

using namespace perclab;

namespace {

Configuration rows_config(const std::vector<std::string>& rows) {
    std::vector<std::string_view> views(rows.begin(), rows.end());
    return Configuration::from_rows(views);
}

// Two closed bars on rows 6 and 2 of Lambda_9, each with closed spikes toward
// the middle at the given columns.
Configuration bars(std::initializer_list<int> spikes, bool join_right = false) {
    std::vector<std::string> rows(9, std::string(9, 'O'));
    auto row = [&](int b) -> std::string& { return rows[static_cast<std::size_t>(8 - b)]; };
    row(6) = std::string(9, '.');
    row(2) = std::string(9, '.');
    for (int a : spikes) {
        row(5)[static_cast<std::size_t>(a)] = '.';
        row(3)[static_cast<std::size_t>(a)] = '.';
    }
    if (join_right) {
        for (int b = 2; b <= 6; ++b) row(b)[8] = '.';
    }
    return rows_config(rows);
}

// Lambda_40 with closed bars on rows 30 and 9, closed columns at a = 20
// reaching the top and bottom sides and pinching the middle at (20, 20).
Configuration pinched40(int top_column) {
    auto cfg = Configuration::filled(Box::lambda(40), Color::Open);
    for (int a = 0; a < 40; ++a) {
        cfg.set_open({a, 30}, false);
        cfg.set_open({a, 9}, false);
    }
    for (int b = 31; b < 40; ++b) cfg.set_open({top_column, b}, false);
    for (int b = 21; b < 30; ++b) cfg.set_open({20, b}, false);
    for (int b = 0; b < 9; ++b) cfg.set_open({20, b}, false);
    for (int b = 10; b < 20; ++b) cfg.set_open({20, b}, false);
    return cfg;
}

bool crosses(const std::vector<TriCoord>& sites, int n) {
    bool l = false, r = false;
    for (const auto& s : sites) {
        l = l || s.a == 0;
        r = r || s.a == n - 1;
    }
    return l && r;
}

bool touches(const ClusterLabeling& lab, TriCoord s, int closed_id) {
    for (const auto& off : kNeighborOffsets) {
        const TriCoord w = s + off;
        if (lab.box().contains(w) && !lab.config().is_open(w) && lab.label(w) == closed_id) return true;
    }
    return false;
}

}  // namespace

TEST_CASE("event on trivial configurations") {
    for (Color c : {Color::Open, Color::Closed}) {
        const auto rep = detect_event_E(Configuration::filled(Box::lambda(12), c), 0.1, false);
        CHECK_FALSE(rep.holds);
        CHECK_FALSE(rep.u.has_value());
    }
    CHECK_FALSE(event_E_screen(Configuration::filled(Box::lambda(12), Color::Open)));
}

TEST_CASE("hand-laid bars with one pinch") {
    const auto cfg = bars({4});
    const auto lab = label_clusters(cfg);
    const auto rep = detect_event_E(lab, 0.1, false);
    REQUIRE(rep.holds);
    CHECK(*rep.u == TriCoord{4, 4});
    CHECK(*rep.v == TriCoord{4, 4});
    CHECK(rep.top_cluster_id == lab.label(TriCoord{0, 6}));
    CHECK(rep.bottom_cluster_id == lab.label(TriCoord{0, 2}));
    CHECK(rep.middle_open_cluster_id == lab.label(TriCoord{0, 4}));
    CHECK(compute_Xn(lab, rep, MetricKind::Geo) == 0.0);
    CHECK(compute_Xn(lab, rep, MetricKind::Res) == 0.0);
    CHECK(event_E_screen(cfg));

    const auto levels = closed_crossing_levels(lab);
    REQUIRE(levels.size() == 2);
    for (const auto& l : levels) {
        if (l.cluster_id == rep.top_cluster_id) {
            CHECK(l.floor == 6);
            CHECK(l.ceiling == 6);
        } else {
            CHECK(l.floor == 2);
            CHECK(l.ceiling == 2);
        }
    }
}

TEST_CASE("hand-laid bars with two pinches") {
    const auto cfg = bars({1, 7});
    const auto lab = label_clusters(cfg);
    const auto rep = detect_event_E(lab, 0.1, false);
    REQUIRE(rep.holds);
    CHECK(*rep.u == TriCoord{1, 4});
    CHECK(*rep.v == TriCoord{7, 4});
    CHECK(compute_Xn(lab, rep, MetricKind::Geo) == 6.0);
    ResistanceProblem pr;
    pr.labeling = &lab;
    pr.cluster_id = rep.middle_open_cluster_id;
    pr.source = {*rep.u};
    pr.sink = {*rep.v};
    CHECK(compute_Xn(lab, rep, MetricKind::Res) == doctest::Approx(effective_resistance_exact(pr)).epsilon(1e-9));

    EventEReport adjacent = rep;
    adjacent.v = TriCoord{2, 4};
    CHECK(compute_Xn(lab, adjacent, MetricKind::Geo) == 1.0);
    EventEReport broken = rep;
    broken.v = TriCoord{1, 6};
    CHECK_THROWS_AS(compute_Xn(lab, broken, MetricKind::Geo), std::logic_error);
    CHECK_THROWS_AS(compute_Xn(lab, EventEReport{}, MetricKind::Geo), std::invalid_argument);
}

TEST_CASE("joined closed bars do not give the event") {
    const auto cfg = bars({4}, true);
    const auto lab = label_clusters(cfg);
    CHECK(closed_crossing_levels(lab).size() == 1);
    CHECK_FALSE(detect_event_E(lab, 0.1, false).holds);
    CHECK_FALSE(event_E_screen(cfg));
}

TEST_CASE("strict midpoint conditions") {
    const auto good = pinched40(20);
    auto rep = detect_event_E(good, 0.1, true);
    REQUIRE(rep.holds);
    CHECK(*rep.u == TriCoord{20, 20});
    CHECK(*rep.v == TriCoord{20, 20});
    CHECK(rep.strict);

    const auto off_center = pinched40(5);
    CHECK(detect_event_E(off_center, 0.1, false).holds);
    CHECK_FALSE(detect_event_E(off_center, 0.1, true).holds);
    // a window of 1/100 misses every top-row site of the column
    CHECK_FALSE(detect_event_E(good, 0.01, true).holds);

    CHECK_THROWS_AS(detect_event_E(good, 0.3, true), std::invalid_argument);
    CHECK_THROWS_AS(detect_event_E(good, 0.0, true), std::invalid_argument);
}

TEST_CASE("event invariants on random configurations") {
    ConditionalSampling setup;
    setup.n = 12;
    setup.n_conditional = 120;
    setup.seed = 5;
    const auto samples = sample_Xn(setup);
    REQUIRE(samples.accepted.size() == 120);
    const Box box = Box::lambda(12);
    for (std::size_t k = 0; k < samples.accepted.size(); ++k) {
        const auto cfg = Configuration::sample(box, hash64(setup.seed, 12, samples.accepted[k]));
        const auto lab = label_clusters(cfg);
        const auto rep = detect_event_E(lab, default_delta(12), false);
        REQUIRE(rep.holds);
        CHECK(rep.top_cluster_id != rep.bottom_cluster_id);
        CHECK(crosses(lab.sites(Color::Closed, rep.top_cluster_id), 12));
        CHECK(crosses(lab.sites(Color::Closed, rep.bottom_cluster_id), 12));
        CHECK(crosses(lab.sites(Color::Open, rep.middle_open_cluster_id), 12));
        const TriCoord u = *rep.u, v = *rep.v;
        CHECK_FALSE(left_of(v, u));

        // brute-force extremes among open sites touching both closed clusters
        std::vector<TriCoord> cand;
        for (std::size_t i = 0; i < box.size(); ++i) {
            const TriCoord s = box.site(i);
            if (cfg.is_open(s) && touches(lab, s, rep.top_cluster_id) && touches(lab, s, rep.bottom_cluster_id)) {
                cand.push_back(s);
            }
        }
        std::sort(cand.begin(), cand.end(), left_of);
        REQUIRE_FALSE(cand.empty());
        CHECK(cand.front() == u);
        CHECK(cand.back() == v);
        CHECK(samples.geo[k] == static_cast<double>(*geodesic_distance(lab, u, v)));

        // closing u or v cuts every crossing of the middle cluster
        for (TriCoord s : {u, v}) {
            auto cut = cfg;
            cut.set_open(s, false);
            const auto cut_lab = label_clusters(cut);
            std::set<int> ids;
            for (std::uint32_t i : lab.members(Color::Open, rep.middle_open_cluster_id)) {
                if (box.site(i) != s) ids.insert(cut_lab.label(i));
            }
            for (int id : ids) CHECK_FALSE(crosses(cut_lab.sites(Color::Open, id), 12));
        }

        // four alternating arms from u out to the nearest side
        const int room = std::min({u.a, u.b, 11 - u.a, 11 - u.b});
        if (room >= 2) {
            CHECK(has_alternating_arms(cfg, {Annulus{u, 2, room + 1}, parse_sigma("OCOC"), false}));
        }
    }
}

TEST_CASE("screen never rejects the event") {
    int holds = 0;
    for (std::uint64_t seed = 0; seed < 6000; ++seed) {
        const auto cfg = Configuration::sample(Box::lambda(10), seed);
        const bool screened = event_E_screen(cfg);
        const bool e = detect_event_E(cfg, 0.1, false).holds;
        if (e) {
            CHECK(screened);
            ++holds;
        }
    }
    CHECK(holds > 5);
}

TEST_CASE("acceptance rate is stable in n") {
    std::vector<double> rates;
    for (int n : {16, 32, 64}) {
        ConditionalSampling setup;
        setup.n = n;
        setup.n_conditional = 60;
        setup.seed = 11;
        setup.geo = false;
        rates.push_back(sample_Xn(setup).acceptance_rate());
    }
    const double lo = *std::min_element(rates.begin(), rates.end());
    const double hi = *std::max_element(rates.begin(), rates.end());
    CHECK(lo > 0.0);
    CHECK(hi <= 3.0 * lo);
}

TEST_CASE("conditional sampling is deterministic and worker independent") {
    ConditionalSampling setup;
    setup.n = 16;
    setup.n_conditional = 40;
    setup.seed = 3;
    setup.res = true;
    const auto one = sample_Xn(setup);
    setup.workers = 3;
    const auto three = sample_Xn(setup);
    CHECK(one.attempts == three.attempts);
    CHECK(one.accepted == three.accepted);
    CHECK(one.geo == three.geo);
    CHECK(one.res == three.res);
    for (std::size_t i = 0; i < one.res.size(); ++i) CHECK(one.res[i] <= one.geo[i] + 1e-9);

    const auto q1 = quantile_estimate(one, MetricKind::Geo, 0.5);
    const auto q2 = quantile_estimate(three, MetricKind::Geo, 0.5);
    CHECK(q1.q_hat == q2.q_hat);
    CHECK(q1.ci_lo == q2.ci_lo);
    CHECK(q1.ci_hi == q2.ci_hi);
}

TEST_CASE("quantiles") {
    CHECK(empirical_quantile({4, 1, 3, 2}, 0.5) == 2);
    CHECK(empirical_quantile({4, 1, 3, 2}, 0.75) == 3);
    CHECK(empirical_quantile({4, 1, 3, 2}, 1.0) == 4);
    CHECK(empirical_quantile({4, 1, 3, 2}, 0.01) == 1);
    CHECK_THROWS_AS(empirical_quantile({}, 0.5), std::invalid_argument);

    ConditionalSampling setup;
    setup.n = 16;
    setup.n_conditional = 100;
    setup.seed = 9;
    const auto s = sample_Xn(setup);
    const auto median = quantile_estimate(s, MetricKind::Geo, 0.5);
    CHECK(median.q_hat == empirical_quantile(s.geo, 0.5));
    double prev = 1e18;
    for (double p : {0.1, 0.25, 0.5}) {
        const auto q = quantile_estimate(s, MetricKind::Geo, p);
        CHECK(q.q_hat <= prev);
        CHECK(q.ci_lo <= q.q_hat);
        CHECK(q.q_hat <= q.ci_hi);
        prev = q.q_hat;
    }
    CHECK_THROWS_AS(quantile_estimate(s, MetricKind::Res, 0.5), std::invalid_argument);
    CHECK_THROWS_AS(estimate_qn(16, 0.6, MetricKind::Geo, 100, 1, false), std::invalid_argument);
    CHECK_THROWS_AS(estimate_qn(16, 0.5, MetricKind::Geo, 99, 1, false), std::invalid_argument);
    CHECK(parse_metric_kind("res") == MetricKind::Res);
    CHECK(to_string(MetricKind::Geo) == "geo");
    CHECK_THROWS_AS(parse_metric_kind("hops"), std::invalid_argument);
}

TEST_CASE("acceptance safeguard") {
    ConditionalSampling setup;
    setup.n = 16;
    setup.n_conditional = 1000;
    setup.max_attempts = 512;
    setup.min_acceptance = 0.5;
    try {
        sample_Xn(setup);
        FAIL("expected AcceptanceError");
    } catch (const AcceptanceError& e) {
        CHECK(e.attempts() == 512);
        CHECK(e.accepted() < 256);
    }
    CHECK(default_delta(64) == doctest::Approx(1.0 / 16));
    CHECK(default_delta(100000) == doctest::Approx(1e-4));
}
