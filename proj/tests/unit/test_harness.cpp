#include <cmath>
#include <fstream>
#include <random>
#include <sstream>
#include <unistd.h>

#include "doctest.h"
#include "perclab/harness.hpp"

using namespace perclab;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / ("perclab_" + std::to_string(::getpid())) / name;
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_lines(const fs::path& p, const std::vector<Json>& records) {
    JsonlWriter w(p);
    for (const auto& r : records) w.write(r);
    w.close();
}

int plan_error_line(const std::string& text) {
    try {
        parse_plan(text, "t.json");
    } catch (const PlanError& e) {
        return e.line();
    }
    return -1;
}

// Records that satisfy every criterion exactly.
void write_fixtures(const fs::path& dir) {
    write_lines(dir / "check_duality.jsonl", {{{"kind", "check"}, {"name", "duality_exhaustive"}, {"configs", 512}, {"exceptions", 0}}});
    std::vector<Json> random, mc;
    for (int i = 0; i < 10; ++i) random.push_back({{"kind", "crossing"}, {"n", 64}, {"sample", i}, {"open_lr", i % 3 == 0}, {"closed_tb", i % 3 != 0}});
    for (int n : {8, 32, 128}) {
        for (int i = 0; i < 1000; ++i) mc.push_back({{"kind", "crossing"}, {"n", n}, {"sample", i}, {"open_lr", i % 2 == 0}, {"closed_tb", i % 2 != 0}});
    }
    write_lines(dir / "crossing_random.jsonl", random);
    write_lines(dir / "crossing_mc.jsonl", mc);

    auto arms = [](const std::string& sigma, bool half, int r, std::vector<int> radii, double c, double slope, double m) {
        std::vector<Json> out;
        for (int R : radii) {
            out.push_back({{"kind", "arm"}, {"sigma", sigma}, {"half", half}, {"r", r}, {"R", R},
                           {"samples", m}, {"hits", std::round(m * c * std::pow(R, slope))}, {"seed", 1}});
        }
        return out;
    };
    write_lines(dir / "arms_one.jsonl", arms("O", false, 1, {8, 16, 32, 64, 128, 256, 512}, 0.9, -5.0 / 48.0, 1e5));
    write_lines(dir / "arms_four.jsonl", arms("OCOC", false, 2, {8, 16, 32, 64, 128}, 0.5, -1.25, 1e6));
    write_lines(dir / "arms_half3.jsonl", arms("OCO", true, 2, {8, 16, 32, 64, 128}, 1.0, -2.0, 1e7));
    auto quasi = arms("OCOC", false, 4, {16, 64}, 1.0, 0.0, 1e5);
    quasi[0]["hits"] = 52000;
    quasi[1]["hits"] = 10600;
    quasi.push_back({{"kind", "arm"}, {"sigma", "OCOC"}, {"half", false}, {"r", 16}, {"R", 64}, {"samples", 1e5}, {"hits", 75000}});
    write_lines(dir / "arms_quasi.jsonl", quasi);

    std::vector<Json> volume;
    for (int k = 0; k <= 10; ++k) volume.push_back({{"kind", "yk"}, {"n", 1024}, {"sample", 0}, {"k", k}, {"count", std::pow(2.0, k * 91.0 / 48.0)}});
    write_lines(dir / "volume.jsonl", volume);

    std::vector<Json> qn;
    for (int n : {32, 64, 128, 256}) {
        qn.push_back({{"kind", "qn"}, {"n", n}, {"metric", "geo"}, {"q_hat", std::pow(n, 1.13)}});
        qn.push_back({{"kind", "qn"}, {"n", n}, {"metric", "res"}, {"q_hat", std::pow(n, 1.0)}});
    }
    write_lines(dir / "qn.jsonl", qn);

    std::vector<Json> walk;
    for (int t : {1, 10, 20, 40, 80, 160, 320}) walk.push_back({{"kind", "walk"}, {"n", 64}, {"sample", 0}, {"t", t}, {"p2t", std::pow(t, -0.659)}});
    for (int r : {8, 16, 32}) walk.push_back({{"kind", "exit"}, {"n", 64}, {"sample", 0}, {"radius", r}, {"e_tau", std::pow(r, 91.0 / 48.0 + 1.0)}});
    write_lines(dir / "walk.jsonl", walk);

    write_lines(dir / "check_resistance.jsonl",
                {{{"kind", "check"}, {"name", "resistance_oracle"}, {"cases", 200}, {"max_rel_err", 1e-12}, {"law_checks", 50}, {"law_failures", 0}}});
    write_lines(dir / "check_menger.jsonl", {{{"kind", "check"}, {"name", "menger"}, {"annuli", 3}, {"configurations", 300}, {"mismatches", 0}}});
    write_lines(dir / "check_gh.jsonl", {{{"kind", "check"}, {"name", "gh_exactness"}, {"two_point_cases", 16}, {"two_point_failures", 0},
                                          {"identity_cases", 6}, {"identity_failures", 0}, {"upper_cases", 100}, {"upper_failures", 0}}});
}

ReportOptions fixture_options() {
    ReportOptions o;
    o.crossing_mc_samples = 1000;
    o.crossing_random_samples = 10;
    return o;
}

const CriterionResult& find(const AcceptanceReport& r, const std::string& id) {
    for (const auto& c : r.criteria) {
        if (c.id == id) return c;
    }
    throw std::out_of_range(id);
}

}  // namespace

TEST_CASE("plan documents") {
    const std::string text = R"({
  "kind": "arms",
  "sizes": [8, 16, 32],
  "samples": 500,
  "base_seed": 9,
  "output": "out/arms.jsonl",
  "arms": {"sigma": "OCOC", "inner_radii": [2]}
})";
    const ExperimentPlan plan = parse_plan(text);
    CHECK(plan.kind == ExperimentKind::Arms);
    CHECK(plan.sizes == std::vector<int>{8, 16, 32});
    CHECK(plan.samples == 500);
    CHECK(plan.base_seed == 9);
    CHECK(plan.arms.sigma == "OCOC");
    CHECK(plan.arms.inner_radii == std::vector<int>{2});
    CHECK(plan_to_json(parse_plan(plan_to_json(plan).dump())) == plan_to_json(plan));

    CHECK(plan_error_line("{\"kind\": \"crossing\",\n \"sizes\": [8],\n \"sample\": 3}") == 3);
    CHECK(plan_error_line("{\"kind\": \"crossing\",\n \"sizes\": [8],\n \"samples\": \"many\"}") == 3);
    CHECK(plan_error_line("{\"kind\": \"crossing\",\n \"sizes\": [16, 8]}") == 2);
    CHECK(plan_error_line("{\"kind\": \"walk\",\n \"sizes\": [16],\n \"walk\": {\n  \"R_factor\": 10}}") == 4);
    CHECK(plan_error_line("{\"kind\": \"crossing\",\n \"sizes\": [8,\n}") == 3);
    CHECK(plan_error_line("{\"kind\": \"percolate\", \"sizes\": [8]}") == 1);
    CHECK(plan_error_line("{\"kind\": \"crossing\", \"sizes\": [8], \"samples\": -2}") == 1);
    CHECK_THROWS_WITH_AS(parse_plan("{\"kind\": \"crossing\",\n \"sizes\": [8],\n \"sample\": 3}", "t.json"),
                         "t.json:3:2: unknown key 'sample'", PlanError);
    CHECK_THROWS_AS(parse_plan("[1, 2]"), PlanError);
    CHECK_THROWS_AS(parse_plan("{\"kind\": \"gh\", \"sizes\": [8]}"), PlanError);  // q_exponent required
    CHECK_THROWS_AS(load_plan("/nonexistent/plan.json"), std::runtime_error);
}

TEST_CASE("crossing runs: counts, manifest, determinism") {
    const fs::path dir = scratch("crossing");
    ExperimentPlan plan;
    plan.kind = ExperimentKind::Crossing;
    plan.sizes = {8};
    plan.samples = 1000;
    plan.base_seed = 4;
    plan.output_path = (dir / "a.jsonl").string();
    const RunSummary s = run(plan, 1);
    CHECK(s.records == 1000);
    CHECK(s.errors == 0);
    const auto records = read_jsonl(s.output);
    REQUIRE(records.size() == 1000);
    for (std::size_t i = 0; i < records.size(); ++i) {
        CHECK(records[i].at("sample") == i);
        CHECK(records[i].at("open_lr") != records[i].at("closed_tb"));
    }
    const std::string first_line = slurp(s.output).substr(0, slurp(s.output).find('\n'));
    CHECK(first_line.find("{\"closed_tb\"") == 0);  // sorted keys

    const Json manifest = Json::parse(slurp(s.manifest));
    CHECK(manifest.at("records") == 1000);
    CHECK(manifest.at("plan") == plan_to_json(plan));
    CHECK(manifest.at("seed_derivation").get<std::string>().find("hash64(base_seed, size, sample_index)") != std::string::npos);
    CHECK(manifest.contains("rng"));
    CHECK(manifest.at("modules").contains("harness"));

    const std::string bytes = slurp(s.output);
    run(plan, 1);
    CHECK(slurp(s.output) == bytes);
    plan.output_path = (dir / "b.jsonl").string();
    run(plan, 3);
    CHECK(slurp(dir / "b.jsonl") == bytes);

    plan.output_path = (dir / "missing_dir_is_created" / "c.jsonl").string();
    CHECK_NOTHROW(run(plan, 1));
    plan.output_path = "/proc/definitely/not/writable.jsonl";
    CHECK_THROWS_WITH_AS(run(plan, 1), doctest::Contains("/proc/definitely/not/writable.jsonl"), std::runtime_error);
}

TEST_CASE("per-sample failures become error records") {
    const fs::path dir = scratch("errors");
    ExperimentPlan plan;
    plan.kind = ExperimentKind::Volume;
    plan.sizes = {8, 16};
    plan.samples = 3;
    plan.volume.kmax = 4;  // 2^4 > 8 fails on the first size only
    plan.output_path = (dir / "v.jsonl").string();
    const RunSummary s = run(plan, 2);
    CHECK(s.errors == 3);
    const auto records = read_jsonl(s.output);
    int errors = 0, yk = 0;
    for (const auto& r : records) {
        if (r.at("kind") == "error") {
            ++errors;
            CHECK(r.at("n") == 8);
            CHECK(r.at("op") == "volume");
        }
        if (r.at("kind") == "yk") ++yk;
    }
    CHECK(errors == 3);
    CHECK(yk == 3 * 5);
}

TEST_CASE("every experiment kind produces its records") {
    const fs::path dir = scratch("kinds");
    auto go = [&](ExperimentPlan plan, const std::string& name) {
        plan.output_path = (dir / (name + ".jsonl")).string();
        const RunSummary s = run(plan, 2);
        CHECK(s.errors == 0);
        return read_jsonl(s.output);
    };
    ExperimentPlan arms;
    arms.kind = ExperimentKind::Arms;
    arms.sizes = {4, 8, 16};
    arms.samples = 200;
    arms.arms.inner_radii = {1, 4};
    const auto a = go(arms, "arms");
    CHECK(a.size() == 3 + 2);
    CHECK(a[0].at("sigma") == "O");
    CHECK(a[3].at("r") == 4);
    CHECK(a[3].at("R") == 8);

    ExperimentPlan metrics;
    metrics.kind = ExperimentKind::Metrics;
    metrics.sizes = {16};
    metrics.samples = 5;
    for (const auto& r : go(metrics, "metrics")) {
        CHECK(r.at("kind") == "metric");
        CHECK(r.at("d_geo").is_number());
        CHECK(r.at("d_res").is_number());
        CHECK(r.at("d_path_lo").get<double>() <= r.at("d_path_hi").get<double>());
    }

    ExperimentPlan walk;
    walk.kind = ExperimentKind::Walk;
    walk.sizes = {8};
    walk.samples = 2;
    walk.walk.t_max = 30;
    walk.walk.exit_radii = {4, 8};
    const auto w = go(walk, "walk");
    int envs = 0, exits = 0;
    for (const auto& r : w) {
        envs += r.at("kind") == "environment";
        exits += r.at("kind") == "exit";
        if (r.at("kind") == "walk" && r.at("t") == 0) CHECK(r.at("p2t") == 1.0);
    }
    CHECK(envs == 2);
    CHECK(exits == 4);

    ExperimentPlan gh;
    gh.kind = ExperimentKind::Gh;
    gh.sizes = {8};
    gh.samples = 2;
    gh.gh.q_exponent = 1.0;
    gh.gh.sample = 20;
    for (const auto& r : go(gh, "gh")) {
        CHECK(r.at("n2") == 16);
        CHECK(r.at("metric") == "geo");
    }
}

TEST_CASE("qn plan gives one estimate per size") {
    const fs::path dir = scratch("qn");
    ExperimentPlan plan;
    plan.kind = ExperimentKind::Qn;
    plan.sizes = {32, 64, 128};
    plan.samples = 100;
    plan.output_path = (dir / "qn.jsonl").string();
    const auto records = read_jsonl(run(plan, 1).output);
    REQUIRE(records.size() == 3);
    for (std::size_t i = 0; i < 3; ++i) {
        CHECK(records[i].at("n") == plan.sizes[i]);
        CHECK(records[i].at("metric") == "geo");
        CHECK(records[i].at("ci_lo").get<double>() <= records[i].at("q_hat").get<double>());
    }
}

TEST_CASE("exponent fits") {
    std::vector<double> x, y;
    for (double v : {2.0, 4.0, 8.0, 16.0}) {
        x.push_back(v);
        y.push_back(v * v);
    }
    auto f = fit_exponent(x, y);
    CHECK(f.slope == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(f.stderr_ < 1e-12);
    CHECK(fit_exponent(x, std::vector<double>(4, 3.0)).slope == doctest::Approx(0.0));

    std::mt19937_64 rng(1);
    std::normal_distribution<double> noise(0.0, 1.0);
    std::vector<double> xs, ys;
    for (int i = 0; i < 40; ++i) {
        const double v = 4.0 * std::pow(1.15, i);
        xs.push_back(v);
        ys.push_back(std::pow(v, 1.5) * (1.0 + 0.01 * noise(rng)));
    }
    const auto g = fit_exponent(xs, ys);
    CHECK(g.slope >= 1.45);
    CHECK(g.slope <= 1.55);
    CHECK(g.stderr_ > 0.0);

    const std::vector<double> px{3.0, 7.0, 11.0}, py{5.0, 2.0, 9.0};
    const auto two = fit_exponent(px, py, {3.0, 7.0});
    CHECK(two.xs.size() == 2);
    CHECK(two.slope == doctest::Approx(std::log(2.0 / 5.0) / std::log(7.0 / 3.0)));
    CHECK(two.stderr_ == 0.0);

    CHECK_THROWS_AS(fit_exponent(std::vector<double>{2.0, 2.0, 2.0}, std::vector<double>{1.0, 2.0, 3.0}), std::invalid_argument);
    CHECK_THROWS_AS(fit_exponent(std::vector<double>{1.0, 2.0}, std::vector<double>{1.0, 0.0}), std::invalid_argument);
    CHECK_THROWS_AS(fit_exponent(px, py, {100.0, 200.0}), std::invalid_argument);

    std::vector<Json> records;
    for (double v : {2.0, 4.0, 8.0}) records.push_back({{"n", v}, {"q", 3.0 * v * v * v}});
    records.push_back({{"n", "bad"}});
    CHECK(fit_exponent(records, "n", "q").slope == doctest::Approx(3.0));
}

TEST_CASE("acceptance report") {
    const fs::path empty = scratch("empty");
    const auto none = acceptance_report(empty);
    CHECK(none.criteria.size() == 13);
    for (const auto& c : none.criteria) CHECK(c.verdict == Verdict::MissingInput);
    CHECK_FALSE(none.passed());

    const fs::path dir = scratch("fixtures");
    write_fixtures(dir);
    const auto good = acceptance_report(dir, fixture_options());
    for (const auto& c : good.criteria) {
        INFO(c.id << ": " << c.detail);
        CHECK(c.verdict == Verdict::Pass);
    }
    CHECK(good.passed());
    CHECK(find(good, "volume_growth").value == doctest::Approx(91.0 / 48.0));
    CHECK(find(good, "spectral_dimension").value == doctest::Approx(1.318));
    CHECK(good.to_json().at("passed") == true);
    CHECK(good.table().find("ALL CRITERIA PASS") != std::string::npos);

    // default minimum sample counts reject the small crossing fixtures
    CHECK(find(acceptance_report(dir), "crossing_duality").verdict == Verdict::Fail);

    // corrupt the third qn record
    {
        std::vector<std::string> lines;
        std::ifstream in(dir / "qn.jsonl");
        for (std::string l; std::getline(in, l);) lines.push_back(l);
        lines[2] = "{\"kind\": \"qn\", \"n\": 64, \"metric\": \"geo\", \"q_hat\": ";
        std::ofstream out(dir / "qn.jsonl");
        for (const auto& l : lines) out << l << '\n';
    }
    const auto bad = acceptance_report(dir, fixture_options());
    const auto& chem = find(bad, "chemical_distance");
    CHECK(chem.verdict == Verdict::Fail);
    CHECK(chem.detail.find("qn.jsonl:3") != std::string::npos);
    CHECK(find(bad, "one_arm").verdict == Verdict::Pass);
    CHECK_FALSE(bad.passed());

    // a record with a wrong field type names the record
    write_lines(dir / "check_menger.jsonl", {{{"kind", "check"}, {"name", "menger"}, {"annuli", "three"}, {"mismatches", 0}}});
    const auto& menger = find(acceptance_report(dir, fixture_options()), "menger");
    CHECK(menger.verdict == Verdict::Fail);
    CHECK(menger.detail.find("record 1") != std::string::npos);
}
