#pragma once

#include <cmath>
#include <cstdint>
#include <map>
#include <random>
#include <span>
#include <vector>

#include "oplt/io.hpp"
#include "oplt/sparse.hpp"
#include "oplt/tree.hpp"

namespace oplt {

/// Complete b-ary tree over ceil(m / preleaf_arity) pre-leaves, each holding
/// up to preleaf_arity label leaves. Label order is shuffled by the seed.
inline LabelTree build_balanced_tree(std::vector<LabelId> labels, std::uint32_t arity,
                                     std::uint32_t preleaf_arity, std::uint64_t seed) {
    if (arity < 2) throw std::invalid_argument("arity must be >= 2");
    if (preleaf_arity < arity) throw std::invalid_argument("preleaf_arity must be >= arity");
    canonicalize_labels(labels);
    seeded_shuffle(labels, seed);

    LabelTree t = LabelTree::single_root();
    if (labels.empty()) return t;

    const std::size_t num_preleaves = (labels.size() + preleaf_arity - 1) / preleaf_arity;

    // Recursively split a contiguous range of pre-leaf indices into <= arity
    // near-equal chunks until single pre-leaves remain.
    struct Builder {
        LabelTree& t;
        std::span<const LabelId> labels;
        std::size_t preleaf_arity;
        std::size_t arity;

        void build(NodeId at, std::size_t lo, std::size_t hi) { // pre-leaf index range [lo, hi)
            if (hi - lo == 1) {
                const std::size_t first = lo * preleaf_arity;
                const std::size_t last = std::min(labels.size(), first + preleaf_arity);
                for (std::size_t i = first; i < last; ++i) t.add_node(at, labels[i]);
                return;
            }
            const std::size_t n = hi - lo;
            const std::size_t parts = std::min(arity, n);
            std::size_t begin = lo;
            for (std::size_t p = 0; p < parts; ++p) {
                const std::size_t count = n / parts + (p < n % parts ? 1 : 0);
                build(t.add_node(at), begin, begin + count);
                begin += count;
            }
        }
    };

    Builder b{t, labels, preleaf_arity, arity};
    b.build(t.root(), 0, num_preleaves); // the root is the top split (or the sole pre-leaf)
    return t;
}

/// Per-label representation: mean of L2-normalized feature vectors of the
/// label's positive examples, re-normalized. Labels without examples get the
/// zero vector.
inline std::map<LabelId, SparseVector> label_representations(std::span<const Example> data) {
    std::map<LabelId, std::map<FeatureId, double>> sums;
    std::map<LabelId, std::size_t> counts;
    for (const Example& ex : data) {
        if (ex.labels.empty()) continue;
        const SparseVector unit = ex.features.normalized();
        for (LabelId j : ex.labels) {
            auto& acc = sums[j];
            for (const auto& e : unit.entries()) acc[e.id] += static_cast<double>(e.value);
            ++counts[j];
        }
    }
    std::map<LabelId, SparseVector> reps;
    for (auto& [j, acc] : sums) {
        std::vector<SparseVector::Entry> entries;
        entries.reserve(acc.size());
        const double inv = 1.0 / static_cast<double>(counts[j]);
        for (const auto& [id, s] : acc) entries.push_back({id, static_cast<float>(s * inv)});
        reps[j] = SparseVector::from_entries(std::move(entries)).normalized();
    }
    return reps;
}

namespace detail {

inline double dot_sorted(const SparseVector& a, const SparseVector& b) {
    double s = 0.0;
    auto ia = a.entries().begin(), ib = b.entries().begin();
    while (ia != a.entries().end() && ib != b.entries().end()) {
        if (ia->id < ib->id) ++ia;
        else if (ib->id < ia->id) ++ib;
        else s += static_cast<double>(ia++->value) * static_cast<double>(ib++->value);
    }
    return s;
}

// Balanced spherical 2-means: clusters forced to equal size +-1, assignment
// by sorted similarity margin, ties broken by label id.
inline std::pair<std::vector<std::uint32_t>, std::vector<std::uint32_t>>
balanced_two_means(std::span<const LabelId> labels, const std::map<LabelId, SparseVector>& reps,
                   std::mt19937_64& rng, int max_iters = 25) {
    const std::size_t n = labels.size();
    std::uniform_int_distribution<std::size_t> pick(0, n - 1);
    std::size_t c0 = pick(rng), c1 = pick(rng);
    while (c1 == c0) c1 = pick(rng);
    SparseVector centroid[2] = {reps.at(labels[c0]), reps.at(labels[c1])};

    std::vector<std::uint32_t> side(n, 0), prev;
    std::vector<std::pair<double, std::uint32_t>> margin(n);
    for (int it = 0; it < max_iters; ++it) {
        for (std::size_t i = 0; i < n; ++i) {
            const SparseVector& r = reps.at(labels[i]);
            margin[i] = {dot_sorted(r, centroid[0]) - dot_sorted(r, centroid[1]),
                         static_cast<std::uint32_t>(i)};
        }
        std::sort(margin.begin(), margin.end(), [&](const auto& a, const auto& b) {
            if (a.first != b.first) return a.first > b.first;
            return labels[a.second] < labels[b.second];
        });
        const std::size_t half = (n + 1) / 2;
        for (std::size_t i = 0; i < n; ++i) side[margin[i].second] = i < half ? 0 : 1;
        if (side == prev) break;
        prev = side;
        // recompute normalized mean centroids
        for (int s = 0; s < 2; ++s) {
            std::map<FeatureId, double> acc;
            std::size_t members = 0;
            for (std::size_t i = 0; i < n; ++i) {
                if (side[i] != static_cast<std::uint32_t>(s)) continue;
                ++members;
                for (const auto& e : reps.at(labels[i]).entries())
                    acc[e.id] += static_cast<double>(e.value);
            }
            std::vector<SparseVector::Entry> entries;
            for (const auto& [id, v] : acc)
                entries.push_back({id, static_cast<float>(v / static_cast<double>(members))});
            centroid[s] = SparseVector::from_entries(std::move(entries)).normalized();
        }
    }
    std::vector<std::uint32_t> left, right;
    for (std::size_t i = 0; i < n; ++i) (side[i] == 0 ? left : right).push_back(static_cast<std::uint32_t>(i));
    return {std::move(left), std::move(right)};
}

} // namespace detail

/// Hierarchical balanced 2-means over label representations. Clusters split
/// recursively until they fit a pre-leaf of up to preleaf_arity labels.
inline LabelTree build_kmeans_tree(const std::map<LabelId, SparseVector>& reps,
                                   std::uint32_t preleaf_arity, std::uint64_t seed) {
    if (preleaf_arity < 1) throw std::invalid_argument("preleaf_arity must be >= 1");
    LabelTree t = LabelTree::single_root();
    std::vector<LabelId> all;
    all.reserve(reps.size());
    for (const auto& [j, _] : reps) all.push_back(j);
    if (all.empty()) return t;

    std::mt19937_64 rng(seed);
    struct Builder {
        LabelTree& t;
        const std::map<LabelId, SparseVector>& reps;
        std::uint32_t preleaf_arity;
        std::mt19937_64& rng;

        // `node` represents this oversized cluster; split it into two children.
        void split_into(NodeId node, std::vector<LabelId> cluster) {
            auto [li, ri] = detail::balanced_two_means(cluster, reps, rng);
            std::vector<LabelId> left, right;
            for (auto i : li) left.push_back(cluster[i]);
            for (auto i : ri) right.push_back(cluster[i]);
            place(node, std::move(left));
            place(node, std::move(right));
        }

        // Attach a cluster under `at`: a pre-leaf when it fits, else a new
        // internal node split recursively.
        void place(NodeId at, std::vector<LabelId> cluster) {
            const NodeId n = t.add_node(at);
            if (cluster.size() <= preleaf_arity) {
                for (LabelId j : cluster) t.add_node(n, j);
                return;
            }
            split_into(n, std::move(cluster));
        }
    };

    Builder b{t, reps, preleaf_arity, rng};
    if (all.size() <= preleaf_arity)
        b.place(t.root(), std::move(all)); // single pre-leaf under the root
    else
        b.split_into(t.root(), std::move(all));
    return t;
}

} // namespace oplt
