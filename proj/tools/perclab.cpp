// perclab: command line front end for sampling, experiments, fits and reports.
#include <cstdlib>
#include <fstream>
#include <iostream>

#include "CLI11.hpp"
#include "perclab/harness.hpp"
#include "perclab/parallel.hpp"
#include "perclab/percolation.hpp"

using namespace perclab;

namespace {

struct Common {
    std::uint64_t seed = 0;
    int workers = 0;
    std::string out;
};

struct ExperimentFlags {
    std::string plan_file;
    std::vector<int> sizes;
    std::uint64_t samples = 0;
    double p = 0.5;
};

void add_experiment_flags(CLI::App* cmd, ExperimentFlags& f) {
    cmd->add_option("--plan", f.plan_file, "JSON plan; flags given on the command line override it");
    cmd->add_option("--sizes", f.sizes, "box sizes, ascending")->delimiter(',');
    cmd->add_option("--samples", f.samples, "samples per size");
    cmd->add_option("--p", f.p, "site density");
}

ExperimentPlan build_plan(ExperimentKind kind, const ExperimentFlags& f, const Common& common, CLI::App* cmd) {
    ExperimentPlan plan;
    if (!f.plan_file.empty()) {
        plan = load_plan(f.plan_file);
        if (plan.kind != kind) throw std::runtime_error(f.plan_file + ": plan kind is " + to_string(plan.kind));
    }
    plan.kind = kind;
    if (!f.sizes.empty()) plan.sizes = f.sizes;
    if (cmd->count("--samples")) plan.samples = f.samples;
    if (cmd->count("--p")) plan.p = f.p;
    if (cmd->get_parent()->count("--seed") || f.plan_file.empty()) plan.base_seed = common.seed;
    if (!common.out.empty()) plan.output_path = common.out;
    if (plan.output_path.empty()) plan.output_path = to_string(kind) + ".jsonl";
    return plan;
}

int execute(const ExperimentPlan& plan, const Common& common) {
    const int workers = common.workers > 0 ? common.workers : default_workers();
    const RunSummary s = run(plan, workers);
    std::cerr << s.output.string() << ": " << s.records << " records, " << s.errors << " errors; manifest "
              << s.manifest.string() << '\n';
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Critical percolation experiments on the triangular lattice"};
    app.require_subcommand(1);
    app.fallthrough();
    Common common;
    app.add_option("--seed", common.seed, "base seed");
    app.add_option("--workers", common.workers, "worker threads (default PERC_LAB_WORKERS or all cores)");
    app.add_option("--out", common.out, "output file");

    int n = 64;
    auto* sample = app.add_subcommand("sample", "write one configuration of Lambda_n in PERC1 format");
    double sample_p = 0.5;
    sample->add_option("--n", n, "box side")->check(CLI::PositiveNumber);
    sample->add_option("--p", sample_p, "site density");

    ExperimentFlags crossing_f, metrics_f, volume_f, walk_f, gh_f, arms_f;
    auto* crossing = app.add_subcommand("crossing", "open left-right and closed top-bottom crossings");
    add_experiment_flags(crossing, crossing_f);
    auto* metrics = app.add_subcommand("metrics", "distances between two sites of the largest cluster");
    add_experiment_flags(metrics, metrics_f);
    auto* volume = app.add_subcommand("volume", "box counts Y_k and cluster mass");
    add_experiment_flags(volume, volume_f);
    int kmax = -1;
    volume->add_option("--kmax", kmax, "deepest level (default log2 n)");
    auto* walk = app.add_subcommand("walk", "random walk on one-arm conditioned environments");
    add_experiment_flags(walk, walk_f);
    int t_max = 1000, R_factor = 128;
    walk->add_option("--t-max", t_max, "largest half-time of the return series");
    walk->add_option("--R-factor", R_factor, "conditioning radius over environment radius");
    auto* gh = app.add_subcommand("gh", "coupled Gromov-Hausdorff diagnostic between sides n and 2n");
    add_experiment_flags(gh, gh_f);
    double q_exponent = 0.0;
    gh->add_option("--q-exponent", q_exponent, "rescale distances at side n by n^q");

    auto* arms = app.add_subcommand("arms", "arm-event probabilities over outer radii");
    add_experiment_flags(arms, arms_f);
    std::string sigma = "O";
    std::vector<int> inner{1};
    bool half = false;
    arms->add_option("--sigma", sigma, "color word such as OCOC");
    arms->add_option("--r", inner, "inner radii")->delimiter(',');
    arms->add_flag("--half", half, "half-plane arms");

    auto* qn = app.add_subcommand("qn", "quantile normalizer of the conditioned distance X_n");
    ExperimentFlags qn_f;
    add_experiment_flags(qn, qn_f);
    int qn_n = 0;
    std::string metric = "geo";
    bool strict = false;
    qn->add_option("--n", qn_n, "single box side");
    qn->add_option("--metric", metric, "geo, res or both")->check(CLI::IsMember({"geo", "res", "both"}));
    qn->add_flag("--strict", strict, "apply the nearly-touching conditions");

    auto* fit = app.add_subcommand("fit", "least-squares exponent of one record field against another");
    std::string fit_in, x_field, y_field, kind_filter;
    double lo = 0.0, hi = 1e300;
    fit->add_option("--in", fit_in, "JSONL file")->required();
    fit->add_option("--x", x_field, "x field")->required();
    fit->add_option("--y", y_field, "y field")->required();
    fit->add_option("--kind", kind_filter, "only records of this kind");
    fit->add_option("--lo", lo, "window lower end");
    fit->add_option("--hi", hi, "window upper end");

    auto* report = app.add_subcommand("report", "evaluate the acceptance criteria over a result directory");
    std::string dir = ".";
    report->add_option("--dir", dir, "result directory");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*sample) {
            const auto cfg = Configuration::sample(Box::lambda(n), common.seed, sample_p);
            const std::string path = common.out.empty() ? "config.perc" : common.out;
            std::ofstream out(path, std::ios::binary);
            if (!out) throw std::runtime_error(path + ": cannot open for writing");
            write_configuration(out, cfg);
            if (!out) throw std::runtime_error(path + ": write failed");
            return 0;
        }
        if (*crossing) return execute(build_plan(ExperimentKind::Crossing, crossing_f, common, crossing), common);
        if (*metrics) return execute(build_plan(ExperimentKind::Metrics, metrics_f, common, metrics), common);
        if (*volume) {
            auto plan = build_plan(ExperimentKind::Volume, volume_f, common, volume);
            if (volume->count("--kmax")) plan.volume.kmax = kmax;
            return execute(plan, common);
        }
        if (*walk) {
            auto plan = build_plan(ExperimentKind::Walk, walk_f, common, walk);
            if (walk->count("--t-max")) plan.walk.t_max = t_max;
            if (walk->count("--R-factor")) plan.walk.R_factor = R_factor;
            return execute(plan, common);
        }
        if (*gh) {
            auto plan = build_plan(ExperimentKind::Gh, gh_f, common, gh);
            if (gh->count("--q-exponent")) plan.gh.q_exponent = q_exponent;
            return execute(plan, common);
        }
        if (*arms) {
            auto plan = build_plan(ExperimentKind::Arms, arms_f, common, arms);
            if (arms->count("--sigma")) plan.arms.sigma = sigma;
            if (arms->count("--r")) plan.arms.inner_radii = inner;
            if (arms->count("--half")) plan.arms.half_plane = half;
            return execute(plan, common);
        }
        if (*qn) {
            auto plan = build_plan(ExperimentKind::Qn, qn_f, common, qn);
            if (qn->count("--n")) plan.sizes = {qn_n};
            if (qn->count("--metric")) plan.metric = metric;
            if (qn->count("--strict")) plan.strict = strict;
            if (!qn->count("--samples") && qn_f.plan_file.empty()) plan.samples = 100;
            return execute(plan, common);
        }
        if (*fit) {
            auto records = read_jsonl(fit_in);
            if (!kind_filter.empty()) {
                std::erase_if(records, [&](const Json& r) { return r.value("kind", "") != kind_filter; });
            }
            const ExponentFit f = fit_exponent(records, x_field, y_field, {lo, hi});
            const Json out{{"kind", "fit"},          {"x", x_field},        {"y", y_field},
                           {"slope", f.slope},       {"intercept", f.intercept}, {"stderr", f.stderr_},
                           {"points", f.xs.size()},  {"window", {lo, hi}}};
            std::cout << out.dump() << '\n';
            return 0;
        }
        if (*report) {
            const AcceptanceReport r = acceptance_report(dir);
            std::cout << r.table();
            std::filesystem::create_directories(dir);
            const std::string path = common.out.empty() ? (std::filesystem::path(dir) / "verdicts.json").string() : common.out;
            std::ofstream out(path);
            if (!out) throw std::runtime_error(path + ": cannot open for writing");
            out << r.to_json().dump(2) << '\n';
            return r.passed() ? 0 : 1;
        }
    } catch (const std::exception& e) {
        std::cerr << "perclab: " << e.what() << '\n';
        return 2;
    }
    return 0;
}
