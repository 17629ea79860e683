#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <sstream>

#include "perclab/harness.hpp"

namespace perclab {

ExponentFit fit_exponent(const std::vector<double>& x, const std::vector<double>& y, FitWindow window) {
    if (x.size() != y.size()) throw std::invalid_argument("fit_exponent: x and y differ in length");
    ExponentFit fit;
    fit.window = window;
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (x[i] < window.lo || x[i] > window.hi) continue;
        if (!(x[i] > 0.0) || !(y[i] > 0.0)) {
            throw std::invalid_argument("fit_exponent: nonpositive value at x = " + std::to_string(x[i]));
        }
        fit.xs.push_back(std::log(x[i]));
        fit.ys.push_back(std::log(y[i]));
    }
    const std::size_t m = fit.xs.size();
    if (m < 2) throw std::invalid_argument("fit_exponent: fewer than two points in the window");
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
        mx += fit.xs[i];
        my += fit.ys[i];
    }
    mx /= static_cast<double>(m);
    my /= static_cast<double>(m);
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
        sxx += (fit.xs[i] - mx) * (fit.xs[i] - mx);
        sxy += (fit.xs[i] - mx) * (fit.ys[i] - my);
    }
    if (*std::min_element(fit.xs.begin(), fit.xs.end()) == *std::max_element(fit.xs.begin(), fit.xs.end())) throw std::invalid_argument("fit_exponent: degenerate x values");
    fit.slope = sxy / sxx;
    fit.intercept = my - fit.slope * mx;
    if (m > 2) {
        double sse = 0.0;
        for (std::size_t i = 0; i < m; ++i) {
            const double e = fit.ys[i] - fit.intercept - fit.slope * fit.xs[i];
            sse += e * e;
        }
        fit.stderr_ = std::sqrt(sse / static_cast<double>(m - 2) / sxx);
    }
    return fit;
}

ExponentFit fit_exponent(const std::vector<Json>& records, const std::string& x_field, const std::string& y_field,
                         FitWindow window) {
    std::vector<double> x, y;
    for (const Json& r : records) {
        if (!r.contains(x_field) || !r.contains(y_field)) continue;
        if (!r.at(x_field).is_number() || !r.at(y_field).is_number()) continue;
        x.push_back(r.at(x_field).get<double>());
        y.push_back(r.at(y_field).get<double>());
    }
    return fit_exponent(x, y, window);
}

std::string to_string(Verdict v) {
    switch (v) {
        case Verdict::Pass:
            return "pass";
        case Verdict::Fail:
            return "fail";
        default:
            return "missing-input";
    }
}

const std::vector<AcceptanceInput> kAcceptanceInputs = {
    {"crossing_duality", "check_duality.jsonl"},
    {"crossing_duality", "crossing_random.jsonl"},
    {"crossing_duality", "crossing_mc.jsonl"},
    {"one_arm", "arms_one.jsonl"},
    {"four_arm", "arms_four.jsonl"},
    {"half_plane_three_arm", "arms_half3.jsonl"},
    {"volume_growth", "volume.jsonl"},
    {"chemical_distance", "qn.jsonl"},
    {"resistance_exponent", "qn.jsonl"},
    {"spectral_dimension", "walk.jsonl"},
    {"einstein_relation", "walk.jsonl"},
    {"einstein_relation", "volume.jsonl"},
    {"einstein_relation", "qn.jsonl"},
    {"resistance_oracle", "check_resistance.jsonl"},
    {"menger", "check_menger.jsonl"},
    {"gh_exactness", "check_gh.jsonl"},
    {"quasi_multiplicativity", "arms_quasi.jsonl"},
};

namespace {

// Raised for inputs that exist but cannot be interpreted.
struct InputError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct Records {
    std::string file;
    std::vector<Json> rows;
};

double num(const Records& in, std::size_t i, const char* key) {
    const Json& r = in.rows[i];
    if (!r.contains(key) || !r.at(key).is_number()) {
        throw InputError(in.file + ": record " + std::to_string(i + 1) + ": missing or non-numeric '" + key + "'");
    }
    return r.at(key).get<double>();
}

bool flag(const Records& in, std::size_t i, const char* key) {
    const Json& r = in.rows[i];
    if (!r.contains(key) || !r.at(key).is_boolean()) {
        throw InputError(in.file + ": record " + std::to_string(i + 1) + ": missing or non-boolean '" + key + "'");
    }
    return r.at(key).get<bool>();
}

std::string str(const Records& in, std::size_t i, const char* key) {
    const Json& r = in.rows[i];
    if (!r.contains(key) || !r.at(key).is_string()) {
        throw InputError(in.file + ": record " + std::to_string(i + 1) + ": missing or non-string '" + key + "'");
    }
    return r.at(key).get<std::string>();
}

bool is_kind(const Records& in, std::size_t i, const char* kind) {
    const Json& r = in.rows[i];
    return r.contains("kind") && r.at("kind") == kind;
}

// The single check record called `name`.
std::size_t check_record(const Records& in, const char* name) {
    for (std::size_t i = 0; i < in.rows.size(); ++i) {
        if (is_kind(in, i, "check") && in.rows[i].value("name", "") == name) return i;
    }
    throw InputError(in.file + ": no check record named '" + name + "'");
}

std::string fmt(double v, int digits = 4) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", digits, v);
    return buf;
}

class Evaluator {
public:
    Evaluator(std::filesystem::path dir, ReportOptions options) : dir_(std::move(dir)), options_(options) {}

    const Records& load(const std::string& file) {
        auto it = cache_.find(file);
        if (it != cache_.end()) return it->second;
        const auto path = dir_ / file;
        Records r{path.string(), {}};
        try {
            r.rows = read_jsonl(path);
        } catch (const std::runtime_error& e) {
            throw InputError(e.what());
        }
        return cache_.emplace(file, std::move(r)).first->second;
    }

    bool present(const std::string& file) const { return std::filesystem::exists(dir_ / file); }

    using Body = std::function<void(CriterionResult&)>;

    CriterionResult evaluate(const char* id, const char* title, const char* target, Body body) {
        CriterionResult c{id, title, Verdict::MissingInput, 0.0, target, ""};
        std::vector<std::string> missing;
        for (const auto& in : kAcceptanceInputs) {
            if (std::string(in.criterion) == id && !present(in.file)) missing.push_back(in.file);
        }
        if (!missing.empty()) {
            c.detail = "missing:";
            for (const auto& m : missing) c.detail += " " + m;
            return c;
        }
        try {
            body(c);
        } catch (const InputError& e) {
            c.verdict = Verdict::Fail;
            c.detail = e.what();
        } catch (const std::exception& e) {
            c.verdict = Verdict::Fail;
            c.detail = std::string("evaluation error: ") + e.what();
        }
        return c;
    }

    // Points (R, hits / samples) of arm records matching the filter.
    ExponentFit arm_fit(const std::string& file, const std::string& sigma, bool half, int r, FitWindow window,
                        const std::vector<int>& required) {
        const Records& in = load(file);
        std::vector<double> x, y;
        std::set<int> seen;
        for (std::size_t i = 0; i < in.rows.size(); ++i) {
            if (!is_kind(in, i, "arm")) continue;
            if (str(in, i, "sigma") != sigma || flag(in, i, "half") != half || num(in, i, "r") != r) continue;
            const double R = num(in, i, "R");
            if (R < window.lo || R > window.hi) continue;
            const double samples = num(in, i, "samples");
            if (samples < static_cast<double>(options_.arm_samples)) {
                throw InputError(in.file + ": record " + std::to_string(i + 1) + ": " + fmt(samples, 0) +
                                 " samples, need " + std::to_string(options_.arm_samples));
            }
            x.push_back(R);
            y.push_back(num(in, i, "hits") / samples);
            seen.insert(static_cast<int>(R));
        }
        for (int R : required) {
            if (!seen.count(R)) throw InputError(in.file + ": no " + sigma + " record for R = " + std::to_string(R));
        }
        return fit_exponent(x, y, window);
    }

    // Inner radius of the first arm record.
    int inner_radius(const std::string& file) {
        const Records& in = load(file);
        for (std::size_t i = 0; i < in.rows.size(); ++i) {
            if (is_kind(in, i, "arm")) return static_cast<int>(num(in, i, "r"));
        }
        throw InputError(in.file + ": no arm records");
    }

    // log E[Y_k] against log 2^k on the largest n, over the top five levels.
    ExponentFit volume_fit() {
        const Records& in = load("volume.jsonl");
        double n_max = 0.0;
        for (std::size_t i = 0; i < in.rows.size(); ++i) {
            if (is_kind(in, i, "yk")) n_max = std::max(n_max, num(in, i, "n"));
        }
        std::map<int, std::pair<double, int>> by_k;
        for (std::size_t i = 0; i < in.rows.size(); ++i) {
            if (!is_kind(in, i, "yk") || num(in, i, "n") != n_max) continue;
            auto& acc = by_k[static_cast<int>(num(in, i, "k"))];
            acc.first += num(in, i, "count");
            ++acc.second;
        }
        if (by_k.empty()) throw InputError(in.file + ": no yk records");
        const int kmax = by_k.rbegin()->first;
        std::vector<double> x, y;
        for (const auto& [k, acc] : by_k) {
            x.push_back(std::ldexp(1.0, k));
            y.push_back(acc.first / acc.second);
        }
        return fit_exponent(x, y, {std::ldexp(1.0, kmax - 4), std::ldexp(1.0, kmax)});
    }

    ExponentFit qn_fit(const std::string& metric) {
        const Records& in = load("qn.jsonl");
        std::vector<double> x, y;
        for (std::size_t i = 0; i < in.rows.size(); ++i) {
            if (!is_kind(in, i, "qn") || str(in, i, "metric") != metric) continue;
            x.push_back(num(in, i, "n"));
            y.push_back(num(in, i, "q_hat"));
        }
        if (x.size() < 3) throw InputError(in.file + ": need q_n records at three or more sizes for " + metric);
        return fit_exponent(x, y);
    }

    double largest_n(const Records& in, const char* kind) {
        double n_max = 0.0;
        for (std::size_t i = 0; i < in.rows.size(); ++i) {
            if (is_kind(in, i, kind)) n_max = std::max(n_max, num(in, i, "n"));
        }
        if (n_max == 0.0) throw InputError(in.file + ": no " + kind + " records");
        return n_max;
    }

    // Mean return probability over environments, fitted for t >= 20.
    ExponentFit walk_fit() {
        const Records& in = load("walk.jsonl");
        const double n = largest_n(in, "walk");
        std::map<int, std::pair<double, int>> by_t;
        for (std::size_t i = 0; i < in.rows.size(); ++i) {
            if (!is_kind(in, i, "walk") || num(in, i, "n") != n) continue;
            auto& acc = by_t[static_cast<int>(num(in, i, "t"))];
            acc.first += num(in, i, "p2t");
            ++acc.second;
        }
        std::vector<double> x, y;
        for (const auto& [t, acc] : by_t) {
            x.push_back(t);
            y.push_back(acc.first / acc.second);
        }
        return fit_exponent(x, y, {20.0, 1e300});
    }

    // Geometric mean over environments of E tau per exit radius.
    ExponentFit exit_fit() {
        const Records& in = load("walk.jsonl");
        const double n = largest_n(in, "exit");
        std::map<int, std::pair<double, int>> by_r;
        for (std::size_t i = 0; i < in.rows.size(); ++i) {
            if (!is_kind(in, i, "exit") || num(in, i, "n") != n) continue;
            const double tau = num(in, i, "e_tau");
            if (!(tau > 0.0)) throw InputError(in.file + ": record " + std::to_string(i + 1) + ": nonpositive e_tau");
            auto& acc = by_r[static_cast<int>(num(in, i, "radius"))];
            acc.first += std::log(tau);
            ++acc.second;
        }
        std::vector<double> x, y;
        for (const auto& [r, acc] : by_r) {
            x.push_back(r);
            y.push_back(std::exp(acc.first / acc.second));
        }
        return fit_exponent(x, y);
    }

    const ReportOptions& options() const { return options_; }

private:
    std::filesystem::path dir_;
    ReportOptions options_;
    std::map<std::string, Records> cache_;
};

void crossing_duality(Evaluator& ev, CriterionResult& c) {
    const Records& checks = ev.load("check_duality.jsonl");
    const std::size_t e = check_record(checks, "duality_exhaustive");
    if (num(checks, e, "configs") != 512 || num(checks, e, "exceptions") != 0) {
        c.verdict = Verdict::Fail;
        c.detail = "exhaustive Lambda_3: " + fmt(num(checks, e, "exceptions"), 0) + " exceptions in " +
                   fmt(num(checks, e, "configs"), 0) + " configurations";
        return;
    }
    std::map<int, std::pair<std::uint64_t, std::uint64_t>> open_lr;  // n -> (samples, hits)
    std::uint64_t exceptions = 0;
    for (const char* file : {"crossing_random.jsonl", "crossing_mc.jsonl"}) {
        const Records& in = ev.load(file);
        for (std::size_t i = 0; i < in.rows.size(); ++i) {
            if (!is_kind(in, i, "crossing")) continue;
            const bool lr = flag(in, i, "open_lr"), tb = flag(in, i, "closed_tb");
            if (lr == tb) ++exceptions;
            if (std::string(file) == "crossing_mc.jsonl") {
                auto& acc = open_lr[static_cast<int>(num(in, i, "n"))];
                ++acc.first;
                acc.second += lr;
            }
        }
    }
    std::uint64_t random64 = 0;
    const Records& rnd = ev.load("crossing_random.jsonl");
    for (std::size_t i = 0; i < rnd.rows.size(); ++i) {
        if (is_kind(rnd, i, "crossing") && num(rnd, i, "n") == 64) ++random64;
    }
    std::ostringstream detail;
    detail << "exceptions=" << exceptions << " random_n64=" << random64;
    bool ok = exceptions == 0 && random64 >= ev.options().crossing_random_samples;
    double worst = 0.0;
    for (int n : {8, 32, 128}) {
        const auto [m, hits] = open_lr[n];
        if (m < ev.options().crossing_mc_samples) {
            ok = false;
            detail << " n=" << n << ":" << m << " samples (too few)";
            continue;
        }
        const double p = static_cast<double>(hits) / static_cast<double>(m);
        const double z = std::abs(p - 0.5) / std::sqrt(0.25 / static_cast<double>(m));
        worst = std::max(worst, z);
        detail << " n=" << n << ":P=" << fmt(p, 5) << "(" << fmt(z, 2) << "SE)";
    }
    c.value = worst;
    c.verdict = ok && worst <= 4.0 ? Verdict::Pass : Verdict::Fail;
    c.detail = detail.str();
}

void slope_in(CriterionResult& c, const ExponentFit& fit, double lo, double hi, bool open_interval = false) {
    c.value = fit.slope;
    const bool inside = open_interval ? fit.slope > lo && fit.slope < hi : fit.slope >= lo && fit.slope <= hi;
    c.verdict = inside ? Verdict::Pass : Verdict::Fail;
    c.detail = "slope=" + fmt(fit.slope) + " se=" + fmt(fit.stderr_) + " points=" + std::to_string(fit.xs.size());
}

}  // namespace

bool AcceptanceReport::passed() const {
    return std::all_of(criteria.begin(), criteria.end(), [](const CriterionResult& c) { return c.verdict == Verdict::Pass; });
}

std::string AcceptanceReport::table() const {
    std::ostringstream out;
    for (const auto& c : criteria) {
        char head[160];
        std::snprintf(head, sizeof head, "%-13s %-24s value=%-10s target %s", to_string(c.verdict).c_str(), c.id.c_str(),
                      fmt(c.value).c_str(), c.target.c_str());
        out << head << " | " << c.detail << '\n';
    }
    out << (passed() ? "ALL CRITERIA PASS" : "SOME CRITERIA DO NOT PASS") << '\n';
    return out.str();
}

Json AcceptanceReport::to_json() const {
    Json list = Json::array();
    for (const auto& c : criteria) {
        list.push_back({{"id", c.id},
                        {"title", c.title},
                        {"verdict", to_string(c.verdict)},
                        {"value", c.value},
                        {"target", c.target},
                        {"detail", c.detail}});
    }
    return {{"criteria", list}, {"passed", passed()}};
}

AcceptanceReport acceptance_report(const std::filesystem::path& result_dir, const ReportOptions& options) {
    Evaluator ev(result_dir, options);
    AcceptanceReport report;
    auto add = [&](const char* id, const char* title, const char* target, Evaluator::Body body) {
        report.criteria.push_back(ev.evaluate(id, title, target, std::move(body)));
    };
    constexpr double one_arm = -5.0 / 48.0;
    constexpr double volume = 91.0 / 48.0;

    add("crossing_duality", "Crossing duality and P[open LR] = 1/2", "0 exceptions, |P-1/2| <= 4 SE",
        [&](CriterionResult& c) { crossing_duality(ev, c); });
    add("one_arm", "One-arm exponent", "[-5/48-0.03, -5/48+0.03]", [&](CriterionResult& c) {
        slope_in(c, ev.arm_fit("arms_one.jsonl", "O", false, 1, {8, 512}, {8, 16, 32, 64, 128, 256, 512}), one_arm - 0.03,
                 one_arm + 0.03);
    });
    add("four_arm", "Four-arm alternating exponent", "[-5/4-0.12, -5/4+0.12]", [&](CriterionResult& c) {
        const int r = ev.inner_radius("arms_four.jsonl");
        slope_in(c, ev.arm_fit("arms_four.jsonl", "OCOC", false, r, {8, 128}, {8, 16, 32, 64, 128}), -1.25 - 0.12,
                 -1.25 + 0.12);
        c.detail += " r=" + std::to_string(r);
    });
    add("half_plane_three_arm", "Half-plane three-arm exponent", "[-2.2, -1.8]", [&](CriterionResult& c) {
        const int r = ev.inner_radius("arms_half3.jsonl");
        slope_in(c, ev.arm_fit("arms_half3.jsonl", "OCO", true, r, {0, 1e300}, {}), -2.2, -1.8);
        c.detail += " r=" + std::to_string(r);
    });
    add("volume_growth", "Volume growth exponent", "[91/48-0.08, 91/48+0.08]",
        [&](CriterionResult& c) { slope_in(c, ev.volume_fit(), volume - 0.08, volume + 0.08); });
    add("chemical_distance", "Chemical-distance exponent", "(1, 4/3)", [&](CriterionResult& c) {
        slope_in(c, ev.qn_fit("geo"), 1.0, 4.0 / 3.0, true);
        c.detail += " |slope-1.131|=" + fmt(std::abs(c.value - 1.131));
    });
    add("resistance_exponent", "Resistance exponent", "[3/4-0.1, 4/3+0.1]",
        [&](CriterionResult& c) { slope_in(c, ev.qn_fit("res"), 0.75 - 0.1, 4.0 / 3.0 + 0.1); });
    add("spectral_dimension", "Spectral dimension", "[1.20, 1.45]", [&](CriterionResult& c) {
        const ExponentFit fit = ev.walk_fit();
        const double ds = -2.0 * fit.slope;
        c.value = ds;
        c.verdict = ds >= 1.20 && ds <= 1.45 ? Verdict::Pass : Verdict::Fail;
        c.detail = "d_s=" + fmt(ds) + " se=" + fmt(2.0 * fit.stderr_) + " |d_s-1.318|=" + fmt(std::abs(ds - 1.318));
    });
    add("einstein_relation", "Einstein relation", "|diff| <= 0.15", [&](CriterionResult& c) {
        const double s_exit = ev.exit_fit().slope, s_vol = ev.volume_fit().slope, s_res = ev.qn_fit("res").slope;
        const double diff = s_exit - s_vol - s_res;
        c.value = diff;
        c.verdict = std::abs(diff) <= 0.15 ? Verdict::Pass : Verdict::Fail;
        c.detail = "exit=" + fmt(s_exit) + " volume=" + fmt(s_vol) + " res=" + fmt(s_res);
    });
    add("resistance_oracle", "Resistance solver against exact elimination", "rel err <= 1e-8, 0 law failures",
        [&](CriterionResult& c) {
            const Records& in = ev.load("check_resistance.jsonl");
            const std::size_t i = check_record(in, "resistance_oracle");
            const double cases = num(in, i, "cases"), err = num(in, i, "max_rel_err");
            const double checks = num(in, i, "law_checks"), failures = num(in, i, "law_failures");
            c.value = err;
            c.verdict = cases >= static_cast<double>(ev.options().resistance_cases) && err <= 1e-8 && checks > 0 &&
                                failures == 0
                            ? Verdict::Pass
                            : Verdict::Fail;
            std::ostringstream e;
            e << err;
            c.detail = "cases=" + fmt(cases, 0) + " max_rel_err=" + e.str() + " law_checks=" + fmt(checks, 0) + " law_failures=" + fmt(failures, 0);
        });
    add("menger", "Max-flow against brute-force disjoint paths", "0 mismatches", [&](CriterionResult& c) {
        const Records& in = ev.load("check_menger.jsonl");
        const std::size_t i = check_record(in, "menger");
        const double annuli = num(in, i, "annuli"), mismatches = num(in, i, "mismatches");
        c.value = mismatches;
        c.verdict = annuli > 0 && mismatches == 0 ? Verdict::Pass : Verdict::Fail;
        c.detail = "annuli=" + fmt(annuli, 0) + " configurations=" + fmt(num(in, i, "configurations"), 0);
    });
    add("gh_exactness", "Gromov-Hausdorff exactness", "0 failures", [&](CriterionResult& c) {
        const Records& in = ev.load("check_gh.jsonl");
        const std::size_t i = check_record(in, "gh_exactness");
        const double failures =
            num(in, i, "two_point_failures") + num(in, i, "identity_failures") + num(in, i, "upper_failures");
        c.value = failures;
        c.verdict = failures == 0 && num(in, i, "two_point_cases") > 0 && num(in, i, "identity_cases") > 0 &&
                            num(in, i, "upper_cases") >= static_cast<double>(ev.options().gh_instances)
                        ? Verdict::Pass
                        : Verdict::Fail;
        c.detail = "two_point=" + fmt(num(in, i, "two_point_cases"), 0) + " identity=" + fmt(num(in, i, "identity_cases"), 0) +
                   " upper=" + fmt(num(in, i, "upper_cases"), 0);
    });
    add("quasi_multiplicativity", "Four-arm quasi-multiplicativity over 4, 16, 64", "C > 0.1, upper within 5 SE",
        [&](CriterionResult& c) {
            const Records& in = ev.load("arms_quasi.jsonl");
            std::map<std::pair<int, int>, std::pair<double, double>> est;  // (r, R) -> (p, se)
            for (std::size_t i = 0; i < in.rows.size(); ++i) {
                if (!is_kind(in, i, "arm") || str(in, i, "sigma") != "OCOC" || flag(in, i, "half")) continue;
                const double m = num(in, i, "samples"), p = num(in, i, "hits") / m;
                est[{static_cast<int>(num(in, i, "r")), static_cast<int>(num(in, i, "R"))}] = {p, std::sqrt(p * (1 - p) / m)};
            }
            for (auto key : {std::pair{4, 16}, std::pair{16, 64}, std::pair{4, 64}}) {
                if (!est.count(key)) {
                    throw InputError(in.file + ": no OCOC record for A(" + std::to_string(key.first) + ", " +
                                     std::to_string(key.second) + ")");
                }
            }
            const auto [a, sa] = est[{4, 16}];
            const auto [b, sb] = est[{16, 64}];
            const auto [ab, sab] = est[{4, 64}];
            const double product = a * b;
            const double C = product > 0 ? ab / product : 0.0;
            const double se = std::sqrt(sab * sab + b * b * sa * sa + a * a * sb * sb);
            const double excess = se > 0 ? (ab - product) / se : (ab > product ? INFINITY : 0.0);
            c.value = C;
            c.verdict = C > 0.1 && excess <= 5.0 ? Verdict::Pass : Verdict::Fail;
            c.detail = "A(4,16)=" + fmt(a) + " A(16,64)=" + fmt(b) + " A(4,64)=" + fmt(ab) + " excess=" + fmt(excess, 2) + "SE";
        });
    return report;
}

}  // namespace perclab
