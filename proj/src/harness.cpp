#include "perclab/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ctime>
#include <iomanip>
#include <optional>
#include <sstream>

#include "perclab/arms.hpp"
#include "perclab/ghtool.hpp"
#include "perclab/measures.hpp"
#include "perclab/metrics.hpp"
#include "perclab/normalizer.hpp"
#include "perclab/parallel.hpp"
#include "perclab/percolation.hpp"
#include "perclab/resistance.hpp"
#include "perclab/rng.hpp"
#include "perclab/walk.hpp"

#ifndef PERCLAB_VERSION
#define PERCLAB_VERSION "0.0.0"
#endif

namespace perclab {

namespace {

constexpr const char* kKindNames[] = {"crossing", "arms", "qn", "metrics", "volume", "walk", "gh"};

}  // namespace

std::string to_string(ExperimentKind kind) { return kKindNames[static_cast<int>(kind)]; }

ExperimentKind parse_experiment_kind(std::string_view text) {
    for (int i = 0; i < 7; ++i) {
        if (text == kKindNames[i]) return static_cast<ExperimentKind>(i);
    }
    throw std::invalid_argument("unknown experiment kind '" + std::string(text) + "'");
}

PlanError::PlanError(const std::string& source, int line, int column, const std::string& message)
    : std::runtime_error(line > 0 ? source + ":" + std::to_string(line) + ":" + std::to_string(column) + ": " + message
                                  : source + ": " + message),
      line_(line),
      column_(column) {}

// ---- plan documents ----

namespace {

struct Position {
    int line = 0;
    int column = 0;
};

Position position_of(std::string_view text, std::size_t offset) {
    Position p{1, 1};
    for (std::size_t i = 0; i < offset && i < text.size(); ++i) {
        if (text[i] == '\n') {
            ++p.line;
            p.column = 1;
        } else {
            ++p.column;
        }
    }
    return p;
}

class PlanReader {
public:
    PlanReader(std::string_view text, const std::string& source) : text_(text), source_(source) {}

    [[noreturn]] void fail(const std::string& key, std::size_t from, const std::string& message) const {
        const std::size_t at = text_.find("\"" + key + "\"", from);
        const Position p = at == std::string_view::npos ? Position{} : position_of(text_, at);
        throw PlanError(source_, p.line, p.column, message);
    }

    std::size_t offset_of(const std::string& key, std::size_t from = 0) const {
        const std::size_t at = text_.find("\"" + key + "\"", from);
        return at == std::string_view::npos ? from : at;
    }

    void check_keys(const Json& obj, std::initializer_list<const char*> allowed, std::size_t from) const {
        for (const auto& [key, value] : obj.items()) {
            if (std::none_of(allowed.begin(), allowed.end(), [&](const char* a) { return key == a; })) {
                fail(key, from, "unknown key '" + key + "'");
            }
        }
    }

    template <class T>
    void read(const Json& obj, const char* key, T& out, std::size_t from) const {
        if (!obj.contains(key)) return;
        const Json& v = obj.at(key);
        try {
            if constexpr (std::is_same_v<T, bool>) {
                if (!v.is_boolean()) throw std::invalid_argument("expected a boolean");
            } else if constexpr (std::is_same_v<T, std::string>) {
                if (!v.is_string()) throw std::invalid_argument("expected a string");
            } else if constexpr (std::is_integral_v<T>) {
                if (!v.is_number_integer()) throw std::invalid_argument("expected an integer");
                if (std::is_unsigned_v<T> && v.is_number_integer() && !v.is_number_unsigned()) {
                    throw std::invalid_argument("expected a nonnegative integer");
                }
            } else if constexpr (std::is_floating_point_v<T>) {
                if (!v.is_number()) throw std::invalid_argument("expected a number");
            } else {
                if (!v.is_array() || !std::all_of(v.begin(), v.end(), [](const Json& e) { return e.is_number_integer(); })) {
                    throw std::invalid_argument("expected a list of integers");
                }
            }
            out = v.get<T>();
        } catch (const std::exception& e) {
            fail(key, from, std::string("'") + key + "': " + e.what());
        }
    }

private:
    std::string_view text_;
    std::string source_;
};

}  // namespace

namespace {

struct Problem {
    std::string key;  // "field" or "section.field"
    std::string message;
};

std::optional<Problem> plan_problem(const ExperimentPlan& plan) {
    if (plan.sizes.empty()) return Problem{"sizes", "sizes must not be empty"};
    if (!std::is_sorted(plan.sizes.begin(), plan.sizes.end())) return Problem{"sizes", "sizes must be sorted ascending"};
    if (plan.sizes.front() < 1) return Problem{"sizes", "sizes must be positive"};
    if (plan.samples < 1) return Problem{"samples", "samples must be at least 1"};
    if (!(plan.p > 0.0 && plan.p < 1.0)) return Problem{"p", "p must lie in (0, 1)"};
    switch (plan.kind) {
        case ExperimentKind::Arms:
            try {
                if (parse_sigma(plan.arms.sigma).empty()) return Problem{"arms.sigma", "arms.sigma must not be empty"};
            } catch (const std::invalid_argument& e) {
                return Problem{"arms.sigma", std::string("arms.sigma: ") + e.what()};
            }
            if (plan.arms.inner_radii.empty()) return Problem{"arms.inner_radii", "arms.inner_radii must not be empty"};
            break;
        case ExperimentKind::Qn:
            if (plan.metric != "geo" && plan.metric != "res" && plan.metric != "both") {
                return Problem{"metric", "metric must be geo, res or both"};
            }
            if (!(plan.p <= 0.5)) return Problem{"p", "qn needs p in (0, 1/2]"};
            break;
        case ExperimentKind::Volume:
            if (!(plan.volume.one_arm_hat > 0.0)) return Problem{"volume.one_arm_hat", "volume.one_arm_hat must be positive"};
            break;
        case ExperimentKind::Walk:
            if (plan.walk.R_factor < 100) return Problem{"walk.R_factor", "walk.R_factor must be at least 100"};
            if (plan.walk.t_max < 0) return Problem{"walk.t_max", "walk.t_max must be nonnegative"};
            break;
        case ExperimentKind::Gh:
            if (!(plan.gh.q_exponent > 0.0)) return Problem{"gh.q_exponent", "gh.q_exponent must be positive"};
            if (plan.gh.sample < 1) return Problem{"gh.sample", "gh.sample must be positive"};
            if (plan.metric != "geo") return Problem{"metric", "gh supports the geo metric only"};
            break;
        default:
            break;
    }
    return std::nullopt;
}

}  // namespace

ExperimentPlan parse_plan(std::string_view text, const std::string& source) {
    Json doc;
    try {
        doc = Json::parse(text);
    } catch (const Json::parse_error& e) {
        const Position p = position_of(text, e.byte > 0 ? e.byte - 1 : 0);
        throw PlanError(source, p.line, p.column, "malformed JSON");
    }
    if (!doc.is_object()) throw PlanError(source, 1, 1, "a plan must be a JSON object");
    const PlanReader in(text, source);
    in.check_keys(doc, {"kind", "sizes", "samples", "base_seed", "metric", "p", "strict", "output", "arms", "volume", "walk", "gh"}, 0);

    ExperimentPlan plan;
    if (!doc.contains("kind")) throw PlanError(source, 1, 1, "missing key 'kind'");
    std::string kind;
    in.read(doc, "kind", kind, 0);
    try {
        plan.kind = parse_experiment_kind(kind);
    } catch (const std::invalid_argument& e) {
        in.fail("kind", 0, e.what());
    }
    if (!doc.contains("sizes")) throw PlanError(source, 1, 1, "missing key 'sizes'");
    in.read(doc, "sizes", plan.sizes, 0);
    in.read(doc, "samples", plan.samples, 0);
    in.read(doc, "base_seed", plan.base_seed, 0);
    in.read(doc, "metric", plan.metric, 0);
    in.read(doc, "p", plan.p, 0);
    in.read(doc, "strict", plan.strict, 0);
    in.read(doc, "output", plan.output_path, 0);

    auto section = [&](const char* name, std::initializer_list<const char*> keys) -> const Json* {
        if (!doc.contains(name)) return nullptr;
        if (!doc.at(name).is_object()) in.fail(name, 0, std::string("'") + name + "' must be an object");
        in.check_keys(doc.at(name), keys, in.offset_of(name));
        return &doc.at(name);
    };
    if (const Json* s = section("arms", {"sigma", "half_plane", "inner_radii"})) {
        const std::size_t at = in.offset_of("arms");
        in.read(*s, "sigma", plan.arms.sigma, at);
        in.read(*s, "half_plane", plan.arms.half_plane, at);
        in.read(*s, "inner_radii", plan.arms.inner_radii, at);
    }
    if (const Json* s = section("volume", {"kmax", "one_arm_hat"})) {
        const std::size_t at = in.offset_of("volume");
        in.read(*s, "kmax", plan.volume.kmax, at);
        in.read(*s, "one_arm_hat", plan.volume.one_arm_hat, at);
    }
    if (const Json* s = section("walk", {"R_factor", "t_max", "exit_radii"})) {
        const std::size_t at = in.offset_of("walk");
        in.read(*s, "R_factor", plan.walk.R_factor, at);
        in.read(*s, "t_max", plan.walk.t_max, at);
        in.read(*s, "exit_radii", plan.walk.exit_radii, at);
    }
    if (const Json* s = section("gh", {"q_exponent", "sample"})) {
        const std::size_t at = in.offset_of("gh");
        in.read(*s, "q_exponent", plan.gh.q_exponent, at);
        in.read(*s, "sample", plan.gh.sample, at);
    }
    if (auto problem = plan_problem(plan)) {
        const auto dot = problem->key.find('.');
        if (dot == std::string::npos) in.fail(problem->key, 0, problem->message);
        const std::string section_name = problem->key.substr(0, dot);
        if (!doc.contains(section_name)) throw PlanError(source, 0, 0, problem->message);
        in.fail(problem->key.substr(dot + 1), in.offset_of(section_name), problem->message);
    }
    return plan;
}

ExperimentPlan load_plan(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error(path.string() + ": cannot open plan");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_plan(ss.str(), path.string());
}

void validate_plan(const ExperimentPlan& plan) {
    if (auto p = plan_problem(plan)) throw PlanError("plan", 0, 0, p->message);
}

Json plan_to_json(const ExperimentPlan& plan) {
    Json j{{"kind", to_string(plan.kind)}, {"sizes", plan.sizes},   {"samples", plan.samples},
           {"base_seed", plan.base_seed},  {"metric", plan.metric}, {"p", plan.p},
           {"strict", plan.strict},        {"output", plan.output_path}};
    switch (plan.kind) {
        case ExperimentKind::Arms:
            j["arms"] = {{"sigma", plan.arms.sigma}, {"half_plane", plan.arms.half_plane}, {"inner_radii", plan.arms.inner_radii}};
            break;
        case ExperimentKind::Volume:
            j["volume"] = {{"kmax", plan.volume.kmax}, {"one_arm_hat", plan.volume.one_arm_hat}};
            break;
        case ExperimentKind::Walk:
            j["walk"] = {{"R_factor", plan.walk.R_factor}, {"t_max", plan.walk.t_max}, {"exit_radii", plan.walk.exit_radii}};
            break;
        case ExperimentKind::Gh:
            j["gh"] = {{"q_exponent", plan.gh.q_exponent}, {"sample", plan.gh.sample}};
            break;
        default:
            break;
    }
    return j;
}

// ---- JSONL files ----

JsonlWriter::JsonlWriter(const std::filesystem::path& path) : path_(path) {
    if (path.has_parent_path()) {
        std::error_code ec;
        std::filesystem::create_directories(path.parent_path(), ec);
    }
    out_.open(path, std::ios::binary | std::ios::trunc);
    if (!out_) throw std::runtime_error(path.string() + ": cannot open for writing");
}

void JsonlWriter::write(const Json& record) {
    out_ << record.dump() << '\n';
    if (!out_) throw std::runtime_error(path_.string() + ": write failed after " + std::to_string(count_) + " records");
    ++count_;
}

void JsonlWriter::close() {
    out_.close();
    if (out_.fail()) throw std::runtime_error(path_.string() + ": close failed");
}

std::vector<Json> read_jsonl(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error(path.string() + ": cannot open");
    std::vector<Json> out;
    std::string line;
    for (int number = 1; std::getline(in, line); ++number) {
        if (line.empty()) continue;
        try {
            out.push_back(Json::parse(line));
        } catch (const Json::parse_error& e) {
            throw std::runtime_error(path.string() + ":" + std::to_string(number) + ": " + e.what());
        }
        if (!out.back().is_object()) {
            throw std::runtime_error(path.string() + ":" + std::to_string(number) + ": record is not an object");
        }
    }
    return out;
}

std::filesystem::path manifest_path(const std::filesystem::path& data_path) {
    return data_path.string() + ".manifest.json";
}

// ---- runs ----

namespace {

Json coord(TriCoord s) { return Json::array({s.a, s.b}); }

template <class T>
Json optional_json(const std::optional<T>& v) {
    return v ? Json(*v) : Json(nullptr);
}

std::vector<int> time_grid(int t_max) {
    std::vector<int> ts;
    for (int t = 0; t <= std::min(t_max, 10); ++t) ts.push_back(t);
    for (double x = 10.0; t_max > 10;) {
        x *= 1.15;
        const int t = static_cast<int>(std::lround(x));
        if (t >= t_max) break;
        if (t > ts.back()) ts.push_back(t);
    }
    if (ts.back() != t_max) ts.push_back(t_max);
    return ts;
}

std::vector<Json> sample_records(const ExperimentPlan& plan, int n, std::uint64_t i) {
    const std::uint64_t seed = hash64(plan.base_seed, static_cast<std::uint64_t>(n), i);
    std::vector<Json> out;
    switch (plan.kind) {
        case ExperimentKind::Crossing: {
            const auto cfg = Configuration::sample(Box::lambda(n), seed, plan.p);
            out.push_back({{"kind", "crossing"},
                           {"n", n},
                           {"sample", i},
                           {"seed", seed},
                           {"open_lr", has_crossing(cfg, Color::Open, Direction::LeftRight)},
                           {"closed_tb", has_crossing(cfg, Color::Closed, Direction::TopBottom)}});
            break;
        }
        case ExperimentKind::Metrics: {
            const auto lab = label_clusters(Configuration::sample(Box::lambda(n), seed, plan.p));
            const int id = lab.largest_open();
            if (id < 0) throw std::runtime_error("no open cluster");
            const auto members = lab.members(Color::Open, id);
            auto pick = [&](std::uint64_t k) {
                const auto j = static_cast<std::size_t>(to_unit(stream_uniform(seed, 0xE7, k)) * members.size());
                return lab.box().site(members[std::min(j, members.size() - 1)]);
            };
            MetricSample s = measure_pair(lab, pick(0), pick(1));
            pairwise_resistance_fill(lab, std::span<MetricSample>(&s, 1));
            out.push_back({{"kind", "metric"},
                           {"n", n},
                           {"sample", i},
                           {"seed", seed},
                           {"x", coord(s.x)},
                           {"y", coord(s.y)},
                           {"d_geo", optional_json(s.d_geo)},
                           {"d_path_lo", optional_json(s.d_path_lo)},
                           {"d_path_hi", optional_json(s.d_path_hi)},
                           {"d_res", optional_json(s.d_res)}});
            break;
        }
        case ExperimentKind::Volume: {
            const auto lab = label_clusters(Configuration::sample(Box::lambda(n), seed, plan.p));
            const int id = lab.largest_open();
            int kmax = plan.volume.kmax;
            if (kmax < 0) kmax = static_cast<int>(std::floor(std::log2(n)));
            const auto y = box_counts(lab, id, kmax);
            const double mass = id < 0 ? 0.0 : cluster_measure(lab, id, plan.volume.one_arm_hat).total_mass();
            out.push_back({{"kind", "measure"},
                           {"n", n},
                           {"sample", i},
                           {"seed", seed},
                           {"cluster", id},
                           {"size", id < 0 ? 0 : lab.cluster(Color::Open, id).size},
                           {"mass", mass}});
            for (int k = 0; k <= kmax; ++k) {
                out.push_back({{"kind", "yk"}, {"n", n}, {"sample", i}, {"k", k}, {"count", y[static_cast<std::size_t>(k)]}});
            }
            break;
        }
        case ExperimentKind::Walk: {
            const auto env = sample_iic_environment({n, plan.walk.R_factor, seed, 10'000'000});
            out.push_back({{"kind", "environment"},
                           {"n", n},
                           {"sample", i},
                           {"seed", env.seed},
                           {"conditioning", "one-arm"},
                           {"R", env.arm_radius},
                           {"attempts", env.attempts},
                           {"cluster_size", env.labeling.cluster(Color::Open, env.cluster_id).size}});
            const auto series = return_probability_series(env, plan.walk.t_max);
            for (int t : time_grid(plan.walk.t_max)) {
                out.push_back({{"kind", "walk"}, {"n", n}, {"sample", i}, {"t", t}, {"p2t", series[static_cast<std::size_t>(t)]}});
            }
            std::vector<int> radii = plan.walk.exit_radii;
            if (radii.empty()) {
                for (int q = 8; q <= n / 2; q *= 2) radii.push_back(q);
            }
            for (int radius : radii) {
                out.push_back({{"kind", "exit"}, {"n", n}, {"sample", i}, {"radius", radius}, {"e_tau", expected_exit_time(env, radius)}});
            }
            break;
        }
        case ExperimentKind::Gh: {
            const double q1 = std::pow(n, plan.gh.q_exponent), q2 = std::pow(2.0 * n, plan.gh.q_exponent);
            const auto g = coupled_gh(n, seed, q1, q2, static_cast<std::size_t>(plan.gh.sample));
            out.push_back({{"kind", "gh"},
                           {"n1", g.n1},
                           {"n2", g.n2},
                           {"metric", "geo"},
                           {"value", g.value},
                           {"match_radius", g.match_radius},
                           {"sample", i},
                           {"seed", seed}});
            break;
        }
        default:
            throw std::logic_error("sample_records: kind has no per-sample records");
    }
    return out;
}

Json error_record(const ExperimentPlan& plan, int n, std::uint64_t i, const std::exception& e) {
    return {{"kind", "error"}, {"op", to_string(plan.kind)}, {"n", n}, {"sample", i}, {"message", e.what()}};
}

void run_per_sample(const ExperimentPlan& plan, int workers, JsonlWriter& sink, std::uint64_t& errors) {
    const std::uint64_t per_size = plan.samples;
    const std::uint64_t total = per_size * plan.sizes.size();
    const std::uint64_t block = std::max<std::uint64_t>(64, 16ull * static_cast<std::uint64_t>(workers));
    std::vector<std::vector<Json>> results;
    for (std::uint64_t begin = 0; begin < total; begin += block) {
        const std::uint64_t end = std::min(total, begin + block);
        results.assign(end - begin, {});
        parallel_for(end - begin, workers, [&](std::size_t j, int) {
            const std::uint64_t task = begin + j;
            const int n = plan.sizes[task / per_size];
            const std::uint64_t i = task % per_size;
            try {
                results[j] = sample_records(plan, n, i);
            } catch (const std::exception& e) {
                results[j] = {error_record(plan, n, i, e)};
            }
        }, 1);
        for (const auto& recs : results) {
            for (const auto& r : recs) {
                if (r.at("kind") == "error") ++errors;
                sink.write(r);
            }
        }
    }
}

void run_arms(const ExperimentPlan& plan, int workers, JsonlWriter& sink, std::uint64_t& errors) {
    const ColorSequence sigma = parse_sigma(plan.arms.sigma);
    for (int r : plan.arms.inner_radii) {
        ArmFamily family{r, {}, sigma, plan.arms.half_plane};
        for (int R : plan.sizes) {
            if (R > r) family.radii.push_back(R);
        }
        if (family.radii.empty()) continue;
        const std::uint64_t seed = hash64(plan.base_seed, static_cast<std::uint64_t>(r), 0);
        try {
            for (const ArmCount& c : estimate_arm_probability(family, plan.samples, seed, workers, plan.p)) {
                sink.write({{"kind", "arm"},
                            {"r", c.query.annulus.r_in},
                            {"R", c.query.annulus.r_out},
                            {"sigma", sigma_string(sigma)},
                            {"half", plan.arms.half_plane},
                            {"hits", c.n_hits},
                            {"samples", c.n_samples},
                            {"seed", seed}});
            }
        } catch (const std::exception& e) {
            ++errors;
            sink.write(error_record(plan, r, 0, e));
        }
    }
}

void run_qn(const ExperimentPlan& plan, int workers, JsonlWriter& sink, std::uint64_t& errors) {
    for (int n : plan.sizes) {
        try {
            ConditionalSampling setup;
            setup.n = n;
            setup.geo = plan.metric != "res";
            setup.res = plan.metric != "geo";
            setup.n_conditional = plan.samples;
            setup.seed = plan.base_seed;
            setup.strict = plan.strict;
            setup.workers = workers;
            const auto samples = sample_Xn(setup);
            for (MetricKind kind : {MetricKind::Geo, MetricKind::Res}) {
                if (samples.values(kind).empty()) continue;
                const auto q = quantile_estimate(samples, kind, plan.p);
                sink.write({{"kind", "qn"},
                            {"n", q.n},
                            {"p", q.p},
                            {"metric", to_string(q.metric)},
                            {"q_hat", q.q_hat},
                            {"ci_lo", q.ci_lo},
                            {"ci_hi", q.ci_hi},
                            {"n_conditional_samples", q.n_conditional_samples},
                            {"attempts", q.attempts},
                            {"acceptance_rate", q.acceptance_rate},
                            {"delta", q.delta},
                            {"strict", q.strict},
                            {"seed", q.seed}});
            }
        } catch (const std::exception& e) {
            ++errors;
            sink.write(error_record(plan, n, 0, e));
        }
    }
}

std::string utc_now() {
    const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    std::ostringstream ss;
    ss << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
    return ss.str();
}

}  // namespace

RunSummary run(const ExperimentPlan& plan, int workers) {
    validate_plan(plan);
    if (plan.output_path.empty()) throw std::invalid_argument("run: the plan has no output path");
    workers = std::max(1, workers);
    RunSummary summary;
    summary.output = plan.output_path;
    summary.manifest = manifest_path(summary.output);
    JsonlWriter sink(summary.output);
    switch (plan.kind) {
        case ExperimentKind::Arms:
            run_arms(plan, workers, sink, summary.errors);
            break;
        case ExperimentKind::Qn:
            run_qn(plan, workers, sink, summary.errors);
            break;
        default:
            run_per_sample(plan, workers, sink, summary.errors);
            break;
    }
    sink.close();
    summary.records = sink.count();

    const Json manifest{
        {"plan", plan_to_json(plan)},
        {"data", summary.output.filename().string()},
        {"records", summary.records},
        {"errors", summary.errors},
        {"seed_derivation",
         "sample_seed = hash64(base_seed, size, sample_index); arms: family seed hash64(base_seed, r, 0) and "
         "sample seed hash64(family_seed, max R, i); qn: attempt seed hash64(base_seed, n, i)"},
        {"rng", "Philox4x32-10 keyed by seed, counter = absolute site coordinates or (stream, step)"},
        {"code_version", PERCLAB_VERSION},
        {"modules",
         {{"lattice", "1"}, {"percolation", "1"}, {"arms", "1"}, {"metrics", "1"}, {"resistance", "1"},
          {"normalizer", "1"}, {"measures", "1"}, {"walk", "1"}, {"ghtool", "1"}, {"harness", "1"}}},
        {"created", utc_now()}};
    std::ofstream m(summary.manifest, std::ios::binary | std::ios::trunc);
    if (!m) throw std::runtime_error(summary.manifest.string() + ": cannot open for writing");
    m << manifest.dump(2) << '\n';
    if (!m) throw std::runtime_error(summary.manifest.string() + ": write failed");
    return summary;
}

}  // namespace perclab
