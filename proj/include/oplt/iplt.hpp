#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "oplt/classifier.hpp"
#include "oplt/sparse.hpp"
#include "oplt/tree.hpp"

namespace oplt {

/// Test/instrumentation hook: one call per classifier update, in issue order.
/// `aux` marks auxiliary-classifier updates (never produced by iplt_train).
using UpdateHook =
    std::function<void(std::size_t example_index, NodeId node, int target, bool aux)>;

struct IpltResult {
    std::vector<NodeClassifier> classifiers; // dense, indexed by NodeId
    std::uint64_t updates = 0;
};

/// Incremental PLT training over a fixed tree: per example, positive nodes are
/// updated with target 1 and negative nodes with target 0, in discovery order.
/// Passes replay the identical example order.
inline IpltResult iplt_train(const LabelTree& tree, const LearnerConfig& cfg,
                             std::span<const Example> data, int passes = 1,
                             const UpdateHook& hook = nullptr) {
    cfg.validate();
    if (passes < 1) throw std::invalid_argument("passes must be >= 1");
    for (const Example& ex : data)
        for (LabelId j : ex.labels)
            if (!tree.has_label(j))
                throw std::logic_error("training label " + std::to_string(j) + " has no leaf in the tree");

    IpltResult res;
    res.classifiers.assign(tree.size(), NodeClassifier{});
    LabelTree::Assignment asg;
    LabelTree::AssignScratch scratch;
    std::size_t index = 0;
    for (int pass = 0; pass < passes; ++pass) {
        for (const Example& ex : data) {
            tree.assign_to_nodes(ex.labels, asg, scratch);
            for (NodeId v : asg.positive) {
                res.classifiers[v].update(ex.features, 1, cfg);
                ++res.updates;
                if (hook) hook(index, v, 1, false);
            }
            for (NodeId v : asg.negative) {
                res.classifiers[v].update(ex.features, 0, cfg);
                ++res.updates;
                if (hook) hook(index, v, 0, false);
            }
            ++index;
        }
    }
    return res;
}

} // namespace oplt
