// Experiment plans, ordered JSONL runs, exponent fits and the acceptance report.
//
// Every data file is JSON Lines with sorted keys and sits next to a
// "<file>.manifest.json" naming the plan, the seed derivation and the module
// versions. Sample i at size n uses the seed hash64(base_seed, n, i).
#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

namespace perclab {

using Json = nlohmann::json;

enum class ExperimentKind { Crossing, Arms, Qn, Metrics, Volume, Walk, Gh };

std::string to_string(ExperimentKind kind);
ExperimentKind parse_experiment_kind(std::string_view text);

struct ArmsParams {
    std::string sigma = "O";
    bool half_plane = false;
    std::vector<int> inner_radii{1};  // one family per inner radius, over the sizes above it
};

struct VolumeParams {
    int kmax = -1;  // -1: floor(log2 n)
    double one_arm_hat = 1.0;
};

struct WalkParams {
    int R_factor = 128;
    int t_max = 1000;
    std::vector<int> exit_radii;  // empty: 8, 16, ... up to r / 2
};

struct GhParams {
    double q_exponent = 0.0;  // clusters at side n are rescaled by n^q_exponent
    int sample = 200;
};

struct ExperimentPlan {
    ExperimentKind kind = ExperimentKind::Crossing;
    std::vector<int> sizes;
    std::uint64_t samples = 1;
    std::uint64_t base_seed = 0;
    std::string metric = "geo";  // qn: geo, res or both
    double p = 0.5;
    bool strict = false;
    std::string output_path;
    ArmsParams arms;
    VolumeParams volume;
    WalkParams walk;
    GhParams gh;
};

/// Schema or parse failure in a plan document, with its position.
class PlanError : public std::runtime_error {
public:
    PlanError(const std::string& source, int line, int column, const std::string& message);
    int line() const { return line_; }
    int column() const { return column_; }

private:
    int line_;
    int column_;
};

/// A JSON document whose top-level keys are the plan fields; kind-specific
/// settings live in a nested object named after the kind ("arms", "volume",
/// "walk", "gh"). Unknown keys and wrong types are rejected.
ExperimentPlan parse_plan(std::string_view text, const std::string& source = "plan");
ExperimentPlan load_plan(const std::filesystem::path& path);
Json plan_to_json(const ExperimentPlan& plan);

/// Throws PlanError (without a position) when the invariants fail.
void validate_plan(const ExperimentPlan& plan);

class JsonlWriter {
public:
    explicit JsonlWriter(const std::filesystem::path& path);
    void write(const Json& record);
    std::uint64_t count() const { return count_; }
    void close();

private:
    std::filesystem::path path_;
    std::ofstream out_;
    std::uint64_t count_ = 0;
};

/// Records of a JSONL file; malformed lines throw std::runtime_error naming
/// "file:line".
std::vector<Json> read_jsonl(const std::filesystem::path& path);

std::filesystem::path manifest_path(const std::filesystem::path& data_path);

struct RunSummary {
    std::filesystem::path output;
    std::filesystem::path manifest;
    std::uint64_t records = 0;
    std::uint64_t errors = 0;
};

/// Executes the plan with the given worker count and streams records in
/// (size, sample) order. A failing sample becomes an "error" record and the
/// run goes on. Data records do not depend on the worker count.
RunSummary run(const ExperimentPlan& plan, int workers = 1);

struct FitWindow {
    double lo = 0.0;
    double hi = 0.0;
};

struct ExponentFit {
    std::vector<double> xs;  // log x
    std::vector<double> ys;  // log y
    double slope = 0.0;
    double intercept = 0.0;
    double stderr_ = 0.0;
    FitWindow window;
};

/// Least squares on (log x, log y) over the points with x in the window.
/// Two points give the exact two-point slope with zero standard error.
ExponentFit fit_exponent(const std::vector<double>& x, const std::vector<double>& y,
                         FitWindow window = {0.0, 1e300});
ExponentFit fit_exponent(const std::vector<Json>& records, const std::string& x_field,
                         const std::string& y_field, FitWindow window = {0.0, 1e300});

enum class Verdict { Pass, Fail, MissingInput };
std::string to_string(Verdict v);

struct CriterionResult {
    std::string id;
    std::string title;
    Verdict verdict = Verdict::MissingInput;
    double value = 0.0;  // the statistic compared with the target
    std::string target;
    std::string detail;
};

/// Minimum sample counts the report insists on; the defaults are the
/// acceptance values.
struct ReportOptions {
    std::uint64_t crossing_mc_samples = 100'000;
    std::uint64_t crossing_random_samples = 10'000;
    std::uint64_t arm_samples = 100'000;
    std::uint64_t resistance_cases = 200;
    std::uint64_t gh_instances = 100;
};

struct AcceptanceReport {
    std::vector<CriterionResult> criteria;
    bool passed() const;
    std::string table() const;
    Json to_json() const;
};

/// Reads the experiment outputs in `result_dir` and evaluates every criterion.
/// Input file names are listed by kAcceptanceInputs.
AcceptanceReport acceptance_report(const std::filesystem::path& result_dir, const ReportOptions& options = {});

struct AcceptanceInput {
    const char* criterion;
    const char* file;
};
extern const std::vector<AcceptanceInput> kAcceptanceInputs;

}  // namespace perclab
