#include "perclab/measures.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

namespace perclab {

double AtomicMeasure::total_mass() const {
    double w = 0.0;
    for (const Atom& a : atoms) w += a.weight;
    return w / normalization;
}

AtomicMeasure cluster_measure(const ClusterLabeling& labeling, int cluster_id, double one_arm_hat) {
    if (!(one_arm_hat > 0.0)) throw std::invalid_argument("cluster_measure: one_arm_hat must be positive");
    const auto& clusters = labeling.clusters(Color::Open);
    if (cluster_id < 0 || cluster_id >= static_cast<int>(clusters.size())) {
        throw std::out_of_range("cluster_measure: unknown cluster id " + std::to_string(cluster_id));
    }
    AtomicMeasure m;
    m.n = labeling.box().side;
    m.origin = labeling.box().lo;
    m.normalization = static_cast<double>(m.n) * m.n * one_arm_hat;
    for (const TriCoord& s : labeling.sites(Color::Open, cluster_id)) m.atoms.push_back({s, 1.0});
    return m;
}

std::vector<TriCoord> inner_face(const Box& box, const Annulus& annulus) {
    std::vector<TriCoord> out;
    for (std::size_t i = 0; i < box.size(); ++i) {
        const TriCoord s = box.site(i);
        if (sup_distance(s, annulus.center) < annulus.inner_ring()) out.push_back(s);
    }
    return out;
}

AtomicMeasure annulus_measure(const Configuration& cfg, const Annulus& annulus, double one_arm_hat) {
    const Box& box = cfg.box();
    if (!box.contains(annulus.outer_box())) {
        throw std::invalid_argument("annulus_measure: annulus does not fit in the box");
    }
    AtomicMeasure m;
    m.n = box.side;
    m.origin = box.lo;
    m.normalization = static_cast<double>(m.n) * m.n * one_arm_hat;
    const auto lab = label_clusters(cfg);
    std::vector<char> reaches(lab.clusters(Color::Open).size(), 0);
    for (std::size_t i = 0; i < box.size(); ++i) {
        const TriCoord s = box.site(i);
        if (cfg.is_open(i) && sup_distance(s, annulus.center) > annulus.outer_ring()) {
            reaches[static_cast<std::size_t>(lab.label(i))] = 1;
        }
    }
    for (const TriCoord& s : inner_face(box, annulus)) {
        if (cfg.is_open(s) && reaches[static_cast<std::size_t>(lab.label(s))]) m.atoms.push_back({s, 1.0});
    }
    return m;
}

std::vector<int> box_counts(const ClusterLabeling& labeling, int cluster_id, int kmax) {
    const Box& box = labeling.box();
    const int n = box.side;
    if (kmax < 0 || (1LL << kmax) > n) throw std::invalid_argument("box_counts: need 2^k <= n");
    std::vector<int> out(static_cast<std::size_t>(kmax) + 1, 0);
    if (cluster_id < 0) return out;
    // prefix[(b + 1) * (n + 1) + (a + 1)] counts cluster sites below and left of (a, b)
    const auto w = static_cast<std::size_t>(n) + 1;
    std::vector<int> prefix(w * w, 0);
    for (std::uint32_t i : labeling.members(Color::Open, cluster_id)) {
        const TriCoord s = box.site(i);
        prefix[static_cast<std::size_t>(s.b - box.lo.b + 1) * w + static_cast<std::size_t>(s.a - box.lo.a + 1)] = 1;
    }
    for (std::size_t b = 1; b < w; ++b) {
        for (std::size_t a = 1; a < w; ++a) {
            prefix[b * w + a] += prefix[(b - 1) * w + a] + prefix[b * w + a - 1] - prefix[(b - 1) * w + a - 1];
        }
    }
    auto count = [&](int a0, int a1, int b0, int b1) {  // half-open, clipped
        a0 = std::max(a0, 0);
        b0 = std::max(b0, 0);
        a1 = std::min(a1, n);
        b1 = std::min(b1, n);
        if (a0 >= a1 || b0 >= b1) return 0;
        const auto A0 = static_cast<std::size_t>(a0), A1 = static_cast<std::size_t>(a1);
        const auto B0 = static_cast<std::size_t>(b0), B1 = static_cast<std::size_t>(b1);
        return prefix[B1 * w + A1] - prefix[B0 * w + A1] - prefix[B1 * w + A0] + prefix[B0 * w + A0];
    };
    for (int k = 0; k <= kmax; ++k) {
        const int side = n >> k;
        const int e = side / 2;
        int total = 0;
        for (int b0 = 0; b0 < n; b0 += side) {
            for (int a0 = 0; a0 < n; a0 += side) {
                if (count(a0 - e, a0 + side + e, b0 - e, b0 + side + e) > 0) ++total;
            }
        }
        out[static_cast<std::size_t>(k)] = total;
    }
    return out;
}

int box_count_Yk(const ClusterLabeling& labeling, int cluster_id, int k) {
    return box_counts(labeling, cluster_id, k).back();
}

double two_arm_mass(const Configuration& cfg, const Annulus& annulus, int r, double one_arm_hat) {
    const AtomicMeasure m = annulus_measure(cfg, annulus, one_arm_hat);
    const ColorSequence two_open{Color::Open, Color::Open};
    double w = 0.0;
    for (const Atom& a : m.atoms) {
        const Annulus around{a.site, 2, r};
        if (!cfg.box().contains(around.outer_box())) continue;
        if (has_alternating_arms(cfg, {around, two_open, false})) w += a.weight;
    }
    return w / m.normalization;
}

}  // namespace perclab
