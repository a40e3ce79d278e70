#pragma once

#include <queue>
#include <span>
#include <vector>

#include "oplt/classifier.hpp"
#include "oplt/sparse.hpp"
#include "oplt/tree.hpp"

namespace oplt {

struct ScoredLabel {
    LabelId label;
    double score;
    bool operator==(const ScoredLabel&) const = default;
};

/// Top-k prediction, scores non-increasing.
struct Prediction {
    std::vector<ScoredLabel> items;
};

namespace detail {

struct QueueItem {
    double score;
    NodeId node;
};

// max-queue by score; equal scores pop in lower-NodeId order
struct QueueLess {
    bool operator()(const QueueItem& a, const QueueItem& b) const {
        if (a.score != b.score) return a.score < b.score;
        return a.node > b.node;
    }
};

using SearchQueue = std::priority_queue<QueueItem, std::vector<QueueItem>, QueueLess>;

} // namespace detail

/// Exact top-k marginals by uniform-cost search over path products. Every
/// factor lies in [0, 1], so a node's accumulated score bounds all of its
/// descendants and the first k leaves popped are the true top k.
inline Prediction predict_topk(const LabelTree& tree, std::span<const NodeClassifier> classifiers,
                               const SparseVector& x, std::size_t k, const LearnerConfig& cfg) {
    if (k < 1) throw std::invalid_argument("k must be >= 1");
    Prediction out;
    if (tree.num_labels() == 0) return out;
    detail::SearchQueue queue;
    queue.push({classifiers[tree.root()].predict(x, cfg), tree.root()});
    while (!queue.empty() && out.items.size() < k) {
        const auto [score, v] = queue.top();
        queue.pop();
        const TreeNode& n = tree.node(v);
        if (n.label) {
            out.items.push_back({*n.label, score});
        } else {
            for (NodeId c : n.children)
                queue.push({score * classifiers[c].predict(x, cfg), c});
        }
    }
    return out;
}

/// Test oracle: every label's marginal as the root-down product of node
/// outputs along its path. Returned in ascending label order.
inline std::vector<ScoredLabel> predict_marginals_bruteforce(const LabelTree& tree,
                                                             std::span<const NodeClassifier> classifiers,
                                                             const SparseVector& x,
                                                             const LearnerConfig& cfg) {
    std::vector<ScoredLabel> out;
    // root-down accumulation keeps the multiplication order identical to the search
    std::vector<std::pair<NodeId, double>> stack;
    if (tree.size() > 0) stack.push_back({tree.root(), classifiers[tree.root()].predict(x, cfg)});
    while (!stack.empty()) {
        const auto [v, score] = stack.back();
        stack.pop_back();
        const TreeNode& n = tree.node(v);
        if (n.label) out.push_back({*n.label, score});
        for (NodeId c : n.children) stack.push_back({c, score * classifiers[c].predict(x, cfg)});
    }
    std::sort(out.begin(), out.end(),
              [](const ScoredLabel& a, const ScoredLabel& b) { return a.label < b.label; });
    return out;
}

/// Argmax label; exact ties broken toward the lower label id. Runs the same
/// uniform-cost search but drains every leaf tied at the top score.
inline LabelId predict_class(const LabelTree& tree, std::span<const NodeClassifier> classifiers,
                             const SparseVector& x, const LearnerConfig& cfg) {
    if (tree.num_labels() == 0) throw std::logic_error("predict_class on a tree without labels");
    detail::SearchQueue queue;
    queue.push({classifiers[tree.root()].predict(x, cfg), tree.root()});
    double best_score = -1.0;
    LabelId best = 0;
    while (!queue.empty()) {
        const auto [score, v] = queue.top();
        if (best_score >= 0.0 && score < best_score) break; // no tie left to drain
        queue.pop();
        const TreeNode& n = tree.node(v);
        if (n.label) {
            if (best_score < 0.0 || *n.label < best) {
                best_score = score;
                best = *n.label;
            }
        } else {
            for (NodeId c : n.children)
                queue.push({score * classifiers[c].predict(x, cfg), c});
        }
    }
    return best;
}

} // namespace oplt
