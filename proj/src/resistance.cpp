#include "perclab/resistance.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

namespace perclab {

namespace {

void check_inputs(const SiteGraph& g, std::span<const std::uint8_t> fixed, std::span<const double> value,
                  std::span<const double> rhs) {
    const auto n = static_cast<std::size_t>(g.size());
    if (fixed.size() != n || value.size() != n || rhs.size() != n) {
        throw std::invalid_argument("solve_dirichlet: vector sizes do not match the graph");
    }
}

// Right-hand side on free vertices after moving the fixed values over.
std::vector<double> reduced_rhs(const SiteGraph& g, std::span<const std::uint8_t> fixed,
                                std::span<const double> value, std::span<const double> rhs) {
    std::vector<double> b(static_cast<std::size_t>(g.size()), 0.0);
    for (int v = 0; v < g.size(); ++v) {
        if (fixed[static_cast<std::size_t>(v)]) continue;
        double s = rhs[static_cast<std::size_t>(v)];
        for (int w : g.neighbors(v)) {
            if (fixed[static_cast<std::size_t>(w)]) s += value[static_cast<std::size_t>(w)];
        }
        b[static_cast<std::size_t>(v)] = s;
    }
    return b;
}

}  // namespace

std::vector<double> solve_dirichlet(const SiteGraph& g, std::span<const std::uint8_t> fixed,
                                    std::span<const double> value, std::span<const double> rhs,
                                    const SolverOptions& options) {
    check_inputs(g, fixed, value, rhs);
    const auto n = static_cast<std::size_t>(g.size());
    const std::vector<double> b = reduced_rhs(g, fixed, value, rhs);
    std::vector<double> x(n, 0.0), r = b, z(n, 0.0), p(n, 0.0), ap(n, 0.0);
    std::size_t unknowns = 0;
    for (std::size_t v = 0; v < n; ++v) unknowns += !fixed[v];
    const int max_iters = options.max_iters > 0 ? options.max_iters : static_cast<int>(20 * unknowns + 100);

    auto apply = [&](const std::vector<double>& in, std::vector<double>& out) {
        for (int v = 0; v < g.size(); ++v) {
            if (fixed[static_cast<std::size_t>(v)]) {
                out[static_cast<std::size_t>(v)] = 0.0;
                continue;
            }
            double s = g.degree(v) * in[static_cast<std::size_t>(v)];
            for (int w : g.neighbors(v)) {
                if (!fixed[static_cast<std::size_t>(w)]) s -= in[static_cast<std::size_t>(w)];
            }
            out[static_cast<std::size_t>(v)] = s;
        }
    };
    auto precondition = [&]() {
        for (int v = 0; v < g.size(); ++v) {
            const int d = g.degree(v);
            z[static_cast<std::size_t>(v)] = fixed[static_cast<std::size_t>(v)] || d == 0
                                                 ? 0.0
                                                 : r[static_cast<std::size_t>(v)] / d;
        }
    };
    auto dot = [](const std::vector<double>& a, const std::vector<double>& c) {
        return std::inner_product(a.begin(), a.end(), c.begin(), 0.0);
    };

    const double bnorm = std::sqrt(dot(b, b));
    int iter = 0;
    double rnorm = bnorm;
    if (bnorm > 0.0) {
        precondition();
        p = z;
        double rz = dot(r, z);
        while (rnorm > options.tolerance * bnorm) {
            if (iter >= max_iters) {
                throw SolverError("solve_dirichlet: no convergence", rnorm / bnorm, iter);
            }
            apply(p, ap);
            const double pap = dot(p, ap);
            if (!(pap > 0.0)) throw SolverError("solve_dirichlet: singular system", rnorm / bnorm, iter);
            const double alpha = rz / pap;
            for (std::size_t v = 0; v < n; ++v) {
                x[v] += alpha * p[v];
                r[v] -= alpha * ap[v];
            }
            rnorm = std::sqrt(dot(r, r));
            precondition();
            const double rz_next = dot(r, z);
            const double beta = rz_next / rz;
            rz = rz_next;
            for (std::size_t v = 0; v < n; ++v) p[v] = z[v] + beta * p[v];
            ++iter;
        }
    }
    for (std::size_t v = 0; v < n; ++v) {
        if (fixed[v]) x[v] = value[v];
    }
    return x;
}

std::vector<double> solve_dirichlet_exact(const SiteGraph& g, std::span<const std::uint8_t> fixed,
                                          std::span<const double> value, std::span<const double> rhs) {
    check_inputs(g, fixed, value, rhs);
    const int n = g.size();
    const std::vector<double> b = reduced_rhs(g, fixed, value, rhs);

    // Reverse Cuthill-McKee order of the free vertices.
    std::vector<int> order;
    std::vector<char> placed(static_cast<std::size_t>(n), 0);
    std::vector<int> free_vertices;
    for (int v = 0; v < n; ++v) {
        if (!fixed[static_cast<std::size_t>(v)]) free_vertices.push_back(v);
    }
    std::stable_sort(free_vertices.begin(), free_vertices.end(),
                     [&](int a, int c) { return g.degree(a) < g.degree(c); });
    for (int start : free_vertices) {
        if (placed[static_cast<std::size_t>(start)]) continue;
        placed[static_cast<std::size_t>(start)] = 1;
        std::size_t head = order.size();
        order.push_back(start);
        for (; head < order.size(); ++head) {
            std::vector<int> next;
            for (int w : g.neighbors(order[head])) {
                if (!fixed[static_cast<std::size_t>(w)] && !placed[static_cast<std::size_t>(w)]) {
                    placed[static_cast<std::size_t>(w)] = 1;
                    next.push_back(w);
                }
            }
            std::sort(next.begin(), next.end(), [&](int a, int c) { return g.degree(a) < g.degree(c); });
            order.insert(order.end(), next.begin(), next.end());
        }
    }
    std::reverse(order.begin(), order.end());
    const int m = static_cast<int>(order.size());
    std::vector<int> pos(static_cast<std::size_t>(n), -1);
    for (int i = 0; i < m; ++i) pos[static_cast<std::size_t>(order[static_cast<std::size_t>(i)])] = i;

    // Envelope storage: row i keeps columns first[i] .. i.
    std::vector<int> first(static_cast<std::size_t>(m));
    std::vector<std::size_t> start(static_cast<std::size_t>(m) + 1, 0);
    for (int i = 0; i < m; ++i) {
        int f = i;
        for (int w : g.neighbors(order[static_cast<std::size_t>(i)])) {
            const int j = pos[static_cast<std::size_t>(w)];
            if (j >= 0) f = std::min(f, j);
        }
        first[static_cast<std::size_t>(i)] = f;
        start[static_cast<std::size_t>(i) + 1] = start[static_cast<std::size_t>(i)] + static_cast<std::size_t>(i - f + 1);
    }
    std::vector<double> env(start.back(), 0.0);
    auto at = [&](int i, int j) -> double& {
        return env[start[static_cast<std::size_t>(i)] + static_cast<std::size_t>(j - first[static_cast<std::size_t>(i)])];
    };
    for (int i = 0; i < m; ++i) {
        const int v = order[static_cast<std::size_t>(i)];
        at(i, i) = g.degree(v);
        for (int w : g.neighbors(v)) {
            const int j = pos[static_cast<std::size_t>(w)];
            if (j >= 0 && j < i) at(i, j) -= 1.0;
        }
    }
    for (int i = 0; i < m; ++i) {
        const int fi = first[static_cast<std::size_t>(i)];
        for (int j = fi; j < i; ++j) {
            const int lo = std::max(fi, first[static_cast<std::size_t>(j)]);
            double s = at(i, j);
            for (int k = lo; k < j; ++k) s -= at(i, k) * at(j, k);
            at(i, j) = s / at(j, j);
        }
        double d = at(i, i);
        for (int k = fi; k < i; ++k) d -= at(i, k) * at(i, k);
        if (!(d > 0.0)) throw std::runtime_error("solve_dirichlet_exact: matrix is not positive definite");
        at(i, i) = std::sqrt(d);
    }
    std::vector<double> y(static_cast<std::size_t>(m));
    for (int i = 0; i < m; ++i) {
        double s = b[static_cast<std::size_t>(order[static_cast<std::size_t>(i)])];
        for (int k = first[static_cast<std::size_t>(i)]; k < i; ++k) s -= at(i, k) * y[static_cast<std::size_t>(k)];
        y[static_cast<std::size_t>(i)] = s / at(i, i);
    }
    for (int i = m - 1; i >= 0; --i) {
        y[static_cast<std::size_t>(i)] /= at(i, i);
        const double yi = y[static_cast<std::size_t>(i)];
        for (int k = first[static_cast<std::size_t>(i)]; k < i; ++k) y[static_cast<std::size_t>(k)] -= at(i, k) * yi;
    }
    std::vector<double> x(static_cast<std::size_t>(n), 0.0);
    for (int v = 0; v < n; ++v) {
        x[static_cast<std::size_t>(v)] = fixed[static_cast<std::size_t>(v)]
                                             ? value[static_cast<std::size_t>(v)]
                                             : y[static_cast<std::size_t>(pos[static_cast<std::size_t>(v)])];
    }
    return x;
}

double dirichlet_energy(const SiteGraph& g, std::span<const double> u) {
    double e = 0.0;
    for (int v = 0; v < g.size(); ++v) {
        for (int w : g.neighbors(v)) {
            if (w > v) {
                const double d = u[static_cast<std::size_t>(v)] - u[static_cast<std::size_t>(w)];
                e += d * d;
            }
        }
    }
    return e;
}

namespace {

struct Boundary {
    std::vector<std::uint8_t> fixed;
    std::vector<double> value;
    std::vector<double> rhs;
};

Boundary resistance_boundary(const SiteGraph& g, std::span<const int> a, std::span<const int> b) {
    if (a.empty() || b.empty()) throw std::invalid_argument("effective_resistance: empty terminal set");
    Boundary out;
    const auto n = static_cast<std::size_t>(g.size());
    out.fixed.assign(n, 0);
    out.value.assign(n, 0.0);
    out.rhs.assign(n, 0.0);
    for (int v : a) {
        if (v < 0 || v >= g.size()) throw std::invalid_argument("effective_resistance: terminal outside the graph");
        out.fixed[static_cast<std::size_t>(v)] = 1;
        out.value[static_cast<std::size_t>(v)] = 1.0;
    }
    for (int v : b) {
        if (v < 0 || v >= g.size()) throw std::invalid_argument("effective_resistance: terminal outside the graph");
        if (out.fixed[static_cast<std::size_t>(v)]) {
            throw std::invalid_argument("effective_resistance: source and sink sets intersect");
        }
        out.fixed[static_cast<std::size_t>(v)] = 2;
    }
    return out;
}

double from_energy(double energy) {
    if (!(energy > 0.0)) throw std::invalid_argument("effective_resistance: terminals are not connected");
    return 1.0 / energy;
}

struct ClusterTerminals {
    SiteGraph graph;
    std::vector<int> a;
    std::vector<int> b;
};

ClusterTerminals cluster_terminals(const ResistanceProblem& pr) {
    if (!pr.labeling) throw std::invalid_argument("effective_resistance: missing labeling");
    ClusterTerminals out{SiteGraph::cluster(*pr.labeling, Color::Open, pr.cluster_id), {}, {}};
    auto collect = [&](const std::vector<TriCoord>& sites, std::vector<int>& dst) {
        for (const TriCoord& s : sites) {
            const int v = out.graph.local(s);
            if (v < 0) throw std::invalid_argument("effective_resistance: terminal outside the cluster");
            dst.push_back(v);
        }
    };
    collect(pr.source, out.a);
    collect(pr.sink, out.b);
    return out;
}

}  // namespace

double effective_resistance(const SiteGraph& g, std::span<const int> a, std::span<const int> b,
                            const SolverOptions& options) {
    const Boundary bd = resistance_boundary(g, a, b);
    const auto u = solve_dirichlet(g, bd.fixed, bd.value, bd.rhs, options);
    return from_energy(dirichlet_energy(g, u));
}

double effective_resistance_exact(const SiteGraph& g, std::span<const int> a, std::span<const int> b,
                                  std::size_t cap) {
    if (static_cast<std::size_t>(g.size()) > cap) {
        throw std::length_error("effective_resistance_exact: graph exceeds the size cap");
    }
    const Boundary bd = resistance_boundary(g, a, b);
    const auto u = solve_dirichlet_exact(g, bd.fixed, bd.value, bd.rhs);
    return from_energy(dirichlet_energy(g, u));
}

double effective_resistance(const ResistanceProblem& problem) {
    const auto t = cluster_terminals(problem);
    return effective_resistance(t.graph, t.a, t.b, SolverOptions{problem.tolerance, problem.max_iters});
}

double effective_resistance_exact(const ResistanceProblem& problem, std::size_t cap) {
    const auto t = cluster_terminals(problem);
    return effective_resistance_exact(t.graph, t.a, t.b, cap);
}

void pairwise_resistance_fill(const ClusterLabeling& labeling, std::span<MetricSample> samples,
                              const SolverOptions& options) {
    std::map<std::pair<int, int>, std::vector<std::size_t>> groups;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const auto& s = samples[i];
        if (!labeling.same_cluster(s.x, s.y)) {
            samples[i].d_res.reset();
            continue;
        }
        groups[{static_cast<int>(labeling.color(s.x)), labeling.label(s.x)}].push_back(i);
    }
    for (const auto& [key, members] : groups) {
        const SiteGraph g = SiteGraph::cluster(labeling, static_cast<Color>(key.first), key.second);
        for (std::size_t i : members) {
            auto& s = samples[i];
            if (s.x == s.y) {
                s.d_res = 0.0;
                continue;
            }
            const int a[] = {g.local(s.x)};
            const int b[] = {g.local(s.y)};
            s.d_res = effective_resistance(g, a, b, options);
        }
    }
}

}  // namespace perclab
