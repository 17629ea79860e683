#include "perclab/walk.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "perclab/arms.hpp"
#include "perclab/normalizer.hpp"
#include "perclab/parallel.hpp"
#include "perclab/rng.hpp"

namespace perclab {

WalkEnvironment make_environment(ClusterLabeling labeling, TriCoord start) {
    if (!labeling.box().contains(start) || !labeling.config().is_open(start)) {
        throw std::invalid_argument("make_environment: start must be an open site of the box");
    }
    WalkEnvironment env;
    env.cluster_id = labeling.label(start);
    env.labeling = std::move(labeling);
    env.start = start;
    return env;
}

double WalkKernel::step(int from, int to) const {
    const int d = graph.degree(from);
    if (d == 0) return from == to ? 1.0 : 0.0;
    const auto nb = graph.neighbors(from);
    return std::find(nb.begin(), nb.end(), to) != nb.end() ? 1.0 / d : 0.0;
}

WalkKernel walk_kernel(const WalkEnvironment& env) {
    WalkKernel k;
    k.graph = SiteGraph::cluster(env.labeling, Color::Open, env.cluster_id);
    k.start = k.graph.local(env.start);
    return k;
}

std::vector<double> return_probability_series(const WalkEnvironment& env, int T, std::size_t cap) {
    if (T < 0) throw std::invalid_argument("return_probability_series: T must be nonnegative");
    const auto& cluster = env.labeling.cluster(Color::Open, env.cluster_id);
    if (cluster.size > cap) {
        throw std::length_error("return_probability_series: cluster of " + std::to_string(cluster.size) +
                                " sites exceeds the exact cap of " + std::to_string(cap) +
                                "; shrink the environment or use simulate_walk_paths");
    }
    const WalkKernel k = walk_kernel(env);
    const auto m = static_cast<std::size_t>(k.graph.size());
    std::vector<double> v(m, 0.0), next(m, 0.0), out;
    out.reserve(static_cast<std::size_t>(T) + 1);
    v[static_cast<std::size_t>(k.start)] = 1.0;
    out.push_back(1.0);
    for (int t = 1; t <= 2 * T; ++t) {
        std::fill(next.begin(), next.end(), 0.0);
        for (int x = 0; x < k.graph.size(); ++x) {
            const double mass = v[static_cast<std::size_t>(x)];
            if (mass == 0.0) continue;
            const int d = k.graph.degree(x);
            if (d == 0) {
                next[static_cast<std::size_t>(x)] += mass;
                continue;
            }
            const double share = mass / d;
            for (int y : k.graph.neighbors(x)) next[static_cast<std::size_t>(y)] += share;
        }
        v.swap(next);
        if (t % 2 == 0) out.push_back(v[static_cast<std::size_t>(k.start)]);
    }
    return out;
}

double expected_exit_time(const WalkEnvironment& env, int radius, const SolverOptions& options) {
    if (radius < 1) throw std::invalid_argument("expected_exit_time: radius must be positive");
    const WalkKernel k = walk_kernel(env);
    const auto m = static_cast<std::size_t>(k.graph.size());
    std::vector<std::uint8_t> fixed(m, 0);
    bool any = false;
    for (int v = 0; v < k.graph.size(); ++v) {
        if (sup_distance(k.graph.site(v), env.start) >= radius - 1) {
            fixed[static_cast<std::size_t>(v)] = 1;
            any = true;
        }
    }
    if (!any) throw std::invalid_argument("expected_exit_time: the cluster does not reach the exit set");
    if (fixed[static_cast<std::size_t>(k.start)]) return 0.0;
    std::vector<double> value(m, 0.0), rhs(m, 0.0);
    for (int v = 0; v < k.graph.size(); ++v) rhs[static_cast<std::size_t>(v)] = k.graph.degree(v);
    const auto u = solve_dirichlet(k.graph, fixed, value, rhs, options);
    return u[static_cast<std::size_t>(k.start)];
}

WalkEnvironment sample_iic_environment(const IicSampling& setup) {
    if (setup.r < 1) throw std::invalid_argument("sample_iic_environment: r must be positive");
    if (setup.R_factor < 100) throw std::invalid_argument("sample_iic_environment: R_factor must be at least 100");
    const int R = setup.R_factor * setup.r;
    OutwardExplorer explorer(R);
    for (std::uint64_t i = 0;; ++i) {
        if (i == setup.max_attempts) {
            throw AcceptanceError("sample_iic_environment: no arm to distance " + std::to_string(R) + " in " +
                                      std::to_string(i) + " attempts",
                                  i, 0);
        }
        const std::uint64_t s = hash64(setup.seed, static_cast<std::uint64_t>(R), i);
        if (explorer.explore(s, 0.5, Color::Open, 0, R - 1, false) < R - 1) continue;
        auto env = make_environment(ClusterLabeling(Configuration::sample(ball({0, 0}, setup.r), s)), {0, 0});
        env.conditioning = Conditioning::OneArm;
        env.arm_radius = R;
        env.seed = s;
        env.attempts = i + 1;
        return env;
    }
}

WalkSimulation simulate_walk_paths(const WalkEnvironment& env, const WalkSimulationSetup& setup) {
    if (setup.n_walks < 1) throw std::invalid_argument("simulate_walk_paths: need at least one walk");
    const WalkKernel k = walk_kernel(env);
    const int workers = std::max(1, setup.workers);
    const auto T = static_cast<std::size_t>(std::max(setup.t_max, 0));
    std::vector<std::vector<std::uint64_t>> returns(static_cast<std::size_t>(workers),
                                                    std::vector<std::uint64_t>(T + 1, 0));
    std::vector<std::uint64_t> tau_sum(static_cast<std::size_t>(workers), 0);
    std::vector<long double> tau_sq(static_cast<std::size_t>(workers), 0.0L);
    const std::uint64_t key = hash64(setup.seed, 0x3A1C, static_cast<std::uint64_t>(env.cluster_id));

    auto move = [&](int x, std::uint64_t w, std::uint64_t t) {
        const int d = k.graph.degree(x);
        if (d == 0) return x;
        const auto j = static_cast<std::size_t>(to_unit(stream_uniform(key, w, t)) * d);
        return k.graph.neighbors(x)[std::min(j, static_cast<std::size_t>(d - 1))];
    };
    std::vector<char> exit_set;
    if (setup.exit_radius > 0) {
        exit_set.assign(static_cast<std::size_t>(k.graph.size()), 0);
        for (int v = 0; v < k.graph.size(); ++v) {
            exit_set[static_cast<std::size_t>(v)] = sup_distance(k.graph.site(v), env.start) >= setup.exit_radius - 1;
        }
    }
    // Exit walks use streams offset by n_walks so they are independent of the return walks.
    parallel_for(setup.n_walks, workers, [&](std::size_t w, int worker) {
        auto& ret = returns[static_cast<std::size_t>(worker)];
        int x = k.start;
        ret[0] += 1;
        for (std::size_t t = 1; t <= 2 * T; ++t) {
            x = move(x, w, t);
            if (t % 2 == 0 && x == k.start) ret[t / 2] += 1;
        }
        if (setup.exit_radius > 0) {
            const std::uint64_t stream = setup.n_walks + w;
            int y = k.start;
            std::uint64_t steps = 0;
            while (!exit_set[static_cast<std::size_t>(y)]) {
                if (steps == setup.max_steps) throw std::runtime_error("simulate_walk_paths: step limit reached");
                y = move(y, stream, ++steps);
            }
            tau_sum[static_cast<std::size_t>(worker)] += steps;
            tau_sq[static_cast<std::size_t>(worker)] += static_cast<long double>(steps) * steps;
        }
    });

    WalkSimulation out;
    out.n_walks = setup.n_walks;
    const double n = static_cast<double>(setup.n_walks);
    for (std::size_t t = 0; t <= T; ++t) {
        std::uint64_t hits = 0;
        for (const auto& r : returns) hits += r[t];
        const double p = static_cast<double>(hits) / n;
        out.p_hat.push_back(p);
        out.p_se.push_back(std::sqrt(p * (1.0 - p) / n));
    }
    if (setup.exit_radius > 0) {
        std::uint64_t sum = 0;
        long double sq = 0.0L;
        for (int w = 0; w < workers; ++w) {
            sum += tau_sum[static_cast<std::size_t>(w)];
            sq += tau_sq[static_cast<std::size_t>(w)];
        }
        const double mean = static_cast<double>(sum) / n;
        const double var = std::max(0.0, static_cast<double>(sq / n) - mean * mean);
        out.tau_hat = mean;
        out.tau_se = n > 1 ? std::sqrt(var * n / (n - 1) / n) : 0.0;
    }
    return out;
}

}  // namespace perclab
