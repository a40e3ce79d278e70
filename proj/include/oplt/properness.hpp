#pragma once

#include <cstdint>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "oplt/iplt.hpp"
#include "oplt/oplt.hpp"

namespace oplt {

/// Result of replaying the incremental reference against an online run.
struct PropernessReport {
    bool pass = true;
    std::size_t prefixes_checked = 0;
    std::uint64_t online_updates = 0;    // at the final prefix
    std::uint64_t reference_updates = 0; // IPLT on (T_t, S_t) at the final prefix
    double max_update_ratio = 0.0;       // max over checked prefixes
    std::size_t max_descent_visits = 0;
    std::size_t max_tree_depth_at_descent = 0;
    bool descent_within_depth = true;
    std::string failure; // first mismatch: prefix, node, feature, values
};

/// Train an online model over the stream and, at each requested prefix t
/// (every prefix when `prefixes` is empty), retrain the incremental reference
/// from scratch on the tree emitted at t; regular classifier states must match
/// exactly. The reference is maintained incrementally between structural
/// changes, which is what makes the per-prefix comparison affordable.
inline PropernessReport check_properness(std::span<const Example> stream,
                                         const LearnerConfig& learner, const PolicyConfig& policy,
                                         std::span<const std::size_t> prefixes = {}) {
    PropernessReport rep;
    OpltModel online = OpltModel::init(learner, policy);

    std::vector<NodeClassifier> reference; // shadow IPLT state on the current tree
    reference.emplace_back();
    std::uint64_t reference_updates = 0;

    OpltHooks hooks;
    hooks.on_descent = [&](std::size_t, std::size_t visits, std::size_t depth) {
        rep.max_descent_visits = std::max(rep.max_descent_visits, visits);
        rep.max_tree_depth_at_descent = std::max(rep.max_tree_depth_at_descent, depth);
        if (visits > depth) rep.descent_within_depth = false;
    };

    LabelTree::Assignment asg;
    LabelTree::AssignScratch scratch;
    const auto apply_reference_updates = [&](const Example& ex) {
        online.tree().assign_to_nodes(ex.labels, asg, scratch);
        for (NodeId v : asg.positive) {
            reference[v].update(ex.features, 1, learner);
            ++reference_updates;
        }
        for (NodeId v : asg.negative) {
            reference[v].update(ex.features, 0, learner);
            ++reference_updates;
        }
    };

    std::size_t next_prefix = 0;
    for (std::size_t t = 0; t < stream.size(); ++t) {
        const std::size_t n_nodes_before = online.tree().size();
        online.train_example(stream[t], &hooks);

        if (online.tree().size() != n_nodes_before) {
            // structure changed: rebuild the reference on the emitted tree
            // over the whole prefix. Labeling the root without adding nodes
            // leaves past assignments unchanged, so it needs no rebuild.
            reference.assign(online.tree().size(), NodeClassifier{});
            reference_updates = 0;
            for (std::size_t i = 0; i <= t; ++i) apply_reference_updates(stream[i]);
        } else {
            apply_reference_updates(stream[t]);
        }

        const bool check_here = prefixes.empty()
                                    ? true
                                    : (next_prefix < prefixes.size() && prefixes[next_prefix] == t + 1);
        if (!check_here) continue;
        if (!prefixes.empty()) ++next_prefix;
        ++rep.prefixes_checked;

        for (NodeId v = 0; v < online.tree().size() && rep.pass; ++v) {
            if (!states_equivalent(online.regular()[v], reference[v])) {
                rep.pass = false;
                std::ostringstream msg;
                msg << "prefix " << (t + 1) << ", node " << v << ": online state differs from reference";
                const auto eo = online.regular()[v].weights().sorted_entries();
                const auto er = reference[v].weights().sorted_entries();
                const double sign = online.regular()[v].inverted() ? -1.0 : 1.0;
                for (std::size_t i = 0; i < std::max(eo.size(), er.size()); ++i) {
                    if (i >= eo.size() || i >= er.size() ||
                        eo[i].first != er[i].first ||
                        sign * eo[i].second.weight != er[i].second.weight ||
                        eo[i].second.grad_sq != er[i].second.grad_sq) {
                        msg << "; first differing feature index " << i;
                        if (i < eo.size())
                            msg << ", online (id " << eo[i].first << ", w " << sign * eo[i].second.weight
                                << ", g2 " << eo[i].second.grad_sq << ")";
                        if (i < er.size())
                            msg << ", reference (id " << er[i].first << ", w " << er[i].second.weight
                                << ", g2 " << er[i].second.grad_sq << ")";
                        break;
                    }
                }
                if (eo.size() == er.size() &&
                    online.regular()[v].update_count() != reference[v].update_count())
                    msg << "; update counts " << online.regular()[v].update_count() << " vs "
                        << reference[v].update_count();
                rep.failure = msg.str();
            }
        }
        if (!rep.pass) break;

        if (reference_updates > 0)
            rep.max_update_ratio = std::max(
                rep.max_update_ratio, static_cast<double>(online.update_count()) /
                                          static_cast<double>(reference_updates));
        if (online.update_count() > 2 * reference_updates) {
            rep.pass = false;
            rep.failure = "prefix " + std::to_string(t + 1) + ": online updates " +
                          std::to_string(online.update_count()) + " exceed twice the reference's " +
                          std::to_string(reference_updates);
        }
    }
    rep.online_updates = online.update_count();
    rep.reference_updates = reference_updates;
    return rep;
}

} // namespace oplt
