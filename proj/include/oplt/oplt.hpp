#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <limits>
#include <map>
#include <optional>
#include <random>
#include <span>
#include <stdexcept>
#include <vector>

#include "oplt/classifier.hpp"
#include "oplt/iplt.hpp"
#include "oplt/sparse.hpp"
#include "oplt/tree.hpp"
#include "oplt/tree_build.hpp"

namespace oplt {

enum class PolicyKind : std::uint8_t { kRandom = 0, kBestGreedy = 1 };
enum class AuxRetention : std::uint8_t { kAll = 0, kPrune = 1 };

struct PolicyConfig {
    PolicyKind kind = PolicyKind::kBestGreedy;
    double alpha = 0.75;               // balance/fit trade-off of the best-greedy score
    std::uint32_t arity = 2;           // max internal-node arity (b)
    std::uint32_t preleaf_arity = 100; // max pre-leaf arity (b_max)
    std::uint64_t rng_seed = 1;
    AuxRetention aux = AuxRetention::kAll;

    void validate() const {
        if (!(alpha >= 0.0 && alpha <= 1.0)) throw std::invalid_argument("alpha must be in [0,1]");
        if (arity < 2) throw std::invalid_argument("arity must be >= 2");
        if (preleaf_arity < arity) throw std::invalid_argument("preleaf_arity must be >= arity");
    }
    bool operator==(const PolicyConfig&) const = default;
};

struct OpltHooks {
    UpdateHook on_update; // every regular and auxiliary update, in issue order
    // one call per actual policy descent (cache misses only)
    std::function<void(std::size_t example_index, std::size_t visits, std::size_t tree_depth)> on_descent;
};

/// Fully-online PLT: the label tree and its node classifiers grow together
/// from a stream. Every node carries a regular classifier; auxiliary
/// classifiers accumulate the positive updates of their node and seed the
/// classifiers of nodes added later. After any train_example call the
/// (tree, regular classifiers) pair is a consistent, queryable model.
class OpltModel {
  public:
    static OpltModel init(const LearnerConfig& learner, const PolicyConfig& policy,
                          bool normalize_features = true) {
        learner.validate();
        policy.validate();
        OpltModel m;
        m.learner_ = learner;
        m.policy_ = policy;
        m.normalize_features_ = normalize_features;
        m.tree_ = LabelTree::single_root();
        m.regular_.emplace_back();
        m.aux_.emplace_back(NodeClassifier{});
        m.rng_.seed(policy.rng_seed);
        return m;
    }

    /// Online continuation over already-seen labels: hierarchical 2-means tree
    /// from the prefix, then regular and auxiliary classifiers trained on it.
    static OpltModel warm_start(std::span<const Example> data, double fraction,
                                const LearnerConfig& learner, const PolicyConfig& policy,
                                bool normalize_features = true, const OpltHooks* hooks = nullptr) {
        if (!(fraction > 0.0 && fraction < 1.0))
            throw std::invalid_argument("warm-start fraction must be in (0,1)");
        const std::size_t n = prefix_count(fraction, data.size());
        const auto prefix = data.subspan(0, n);
        OpltModel m = init(learner, policy, normalize_features);
        const auto reps = label_representations(prefix);
        if (!reps.empty()) {
            m.tree_ = build_kmeans_tree(reps, policy.preleaf_arity, policy.rng_seed);
            m.regular_.assign(m.tree_.size(), NodeClassifier{});
            m.aux_.assign(m.tree_.size(), NodeClassifier{});
        }
        for (const Example& ex : prefix) m.train_example(ex, hooks);
        return m;
    }

    static std::size_t prefix_count(double fraction, std::size_t total) {
        return static_cast<std::size_t>(std::ceil(fraction * static_cast<double>(total)));
    }

    /// Fresh classifiers over a tree built offline. Without auxiliary
    /// classifiers the tree cannot be extended (incremental-only training);
    /// with them the model can continue fully online.
    static OpltModel with_fixed_tree(LabelTree tree, const LearnerConfig& learner,
                                     const PolicyConfig& policy, bool normalize_features = true,
                                     bool with_aux = true) {
        learner.validate();
        policy.validate();
        if (const auto bad = tree.validate(); !bad.empty())
            throw std::invalid_argument("invalid tree: " + bad.front());
        OpltModel m;
        m.learner_ = learner;
        m.policy_ = policy;
        m.normalize_features_ = normalize_features;
        m.tree_ = std::move(tree);
        m.regular_.assign(m.tree_.size(), NodeClassifier{});
        if (with_aux)
            m.aux_.assign(m.tree_.size(), NodeClassifier{});
        else
            m.aux_.assign(m.tree_.size(), std::nullopt);
        m.rng_.seed(policy.rng_seed);
        return m;
    }

    void train_stream(std::span<const Example> stream, int passes = 1,
                      const OpltHooks* hooks = nullptr) {
        if (passes < 1) throw std::invalid_argument("passes must be >= 1");
        for (int pass = 0; pass < passes; ++pass)
            for (const Example& ex : stream) train_example(ex, hooks);
    }

    void train_example(const Example& ex, const OpltHooks* hooks = nullptr) {
        bool has_new = false;
        for (LabelId j : ex.labels)
            if (!tree_.has_label(j)) { has_new = true; break; }
        if (has_new) update_tree(ex, hooks);
        update_classifiers(ex, hooks);
        for (LabelId j : ex.labels) ++label_counts_[j];
        ++stream_pos_;
    }

    /// Add every unseen label of the example, in ascending label order. The
    /// very first label is assigned to the root itself.
    void update_tree(const Example& ex, const OpltHooks* hooks = nullptr) {
        for (LabelId j : ex.labels) {
            if (tree_.has_label(j)) continue;
            if (tree_.num_labels() == 0) {
                tree_.set_label(tree_.root(), j);
                continue;
            }
            const auto [v, insert] = policy_select(ex, j, hooks);
            if (insert) insert_node(v);
            add_leaf(j, v);
            if (policy_.aux == AuxRetention::kPrune) {
                maybe_prune_aux(v);
                maybe_prune_aux(tree_.node(v).parent);
            }
        }
    }

    /// Insert a new node between v and its subtree (or take over v's label):
    /// both classifiers of the new node start as copies of v's auxiliary one.
    NodeId insert_node(NodeId v) {
        if (v >= aux_.size() || !aux_[v])
            throw std::logic_error("insert_node: node " + std::to_string(v) +
                                   " has no auxiliary classifier");
        const NodeId nv = tree_.split_node(v);
        regular_.push_back(aux_[v]->copy());
        aux_.push_back(aux_[v]->copy());
        return nv;
    }

    /// New leaf for label j under v. Its regular classifier is the inverse of
    /// v's auxiliary classifier: it behaves as if it had received a negative
    /// update each time v was updated positively.
    NodeId add_leaf(LabelId j, NodeId v) {
        if (tree_.has_label(j))
            throw std::logic_error("add_leaf: label " + std::to_string(j) + " already present");
        if (v >= aux_.size() || !aux_[v])
            throw std::logic_error("add_leaf: node " + std::to_string(v) +
                                   " has no auxiliary classifier");
        const NodeId leaf = tree_.add_node(v, j);
        regular_.push_back(NodeClassifier::inverse_of(*aux_[v]));
        aux_.emplace_back(NodeClassifier{});
        return leaf;
    }

    /// Positive nodes: positive update to the regular classifier and, where
    /// retained, to the auxiliary one. Negative nodes: negative regular update.
    void update_classifiers(const Example& ex, const OpltHooks* hooks = nullptr) {
        for (LabelId j : ex.labels)
            if (!tree_.has_label(j))
                throw std::logic_error("update_classifiers: label not in tree");
        tree_.assign_to_nodes(ex.labels, asg_, scratch_);
        for (NodeId v : asg_.positive) {
            regular_[v].update(ex.features, 1, learner_);
            ++update_count_;
            if (hooks && hooks->on_update) hooks->on_update(stream_pos_, v, 1, false);
            if (aux_[v]) {
                aux_[v]->update(ex.features, 1, learner_);
                ++update_count_;
                if (hooks && hooks->on_update) hooks->on_update(stream_pos_, v, 1, true);
            }
        }
        for (NodeId v : asg_.negative) {
            regular_[v].update(ex.features, 0, learner_);
            ++update_count_;
            if (hooks && hooks->on_update) hooks->on_update(stream_pos_, v, 0, false);
        }
    }

    /// Node selection shared by both policies: descend from the root while the
    /// current node has an internal child and full arity b; pick children
    /// uniformly (Random) or by the balance/fit score (Best-greedy). The
    /// descent runs once per example; later calls for the same example reuse
    /// the saved node. A node whose children include exactly one leaf redirects
    /// to that leaf. Insertion is requested when the node is a full pre-leaf
    /// or a leaf.
    std::pair<NodeId, bool> policy_select(const Example& ex, LabelId /*j*/,
                                          const OpltHooks* hooks = nullptr) {
        if (tree_.num_labels() == 0) throw std::logic_error("policy_select on an unlabeled tree");
        NodeId v;
        std::size_t visits = 0;
        if (!cache_valid_ || cache_pos_ != stream_pos_) {
            v = tree_.root();
            visits = 1;
            while (has_internal_child(v) && tree_.node(v).children.size() == policy_.arity) {
                v = pick_child(v, ex);
                ++visits;
            }
        } else {
            v = cache_node_;
        }
        NodeId only_leaf = kNoNode;
        std::size_t leaf_children = 0;
        for (NodeId c : tree_.node(v).children) {
            if (tree_.is_label_leaf(c)) {
                ++leaf_children;
                only_leaf = c;
            }
        }
        if (leaf_children == 1) {
            v = only_leaf;
            if (visits) ++visits;
        }
        cache_valid_ = true;
        cache_pos_ = stream_pos_;
        cache_node_ = v;
        if (visits && hooks && hooks->on_descent) hooks->on_descent(stream_pos_, visits, tree_.depth());
        const bool insert =
            tree_.node(v).children.size() == policy_.preleaf_arity || tree_.is_label_leaf(v);
        return {v, insert};
    }

    const LabelTree& tree() const { return tree_; }
    const std::vector<NodeClassifier>& regular() const { return regular_; }
    const std::vector<std::optional<NodeClassifier>>& aux() const { return aux_; }
    const LearnerConfig& learner() const { return learner_; }
    const PolicyConfig& policy() const { return policy_; }
    bool normalize_features() const { return normalize_features_; }
    std::uint64_t update_count() const { return update_count_; }
    std::uint64_t examples_seen() const { return stream_pos_; }
    const std::map<LabelId, std::uint64_t>& label_counts() const { return label_counts_; }

    void strip_aux() {
        for (auto& a : aux_) a.reset();
    }

  private:
    OpltModel() = default;

    bool has_internal_child(NodeId v) const {
        for (NodeId c : tree_.node(v).children)
            if (!tree_.is_label_leaf(c)) return true;
        return false;
    }

    NodeId pick_child(NodeId v, const Example& ex) {
        const auto& children = tree_.node(v).children;
        if (policy_.kind == PolicyKind::kRandom) {
            std::uniform_int_distribution<std::size_t> d(0, children.size() - 1);
            return children[d(rng_)];
        }
        // best-greedy: (1-a)*eta(x, c) + a * (log|L_v| - log|Ch(v)|) / |L_c|
        const double balance =
            std::log(static_cast<double>(tree_.node(v).subtree_leaves)) -
            std::log(static_cast<double>(children.size()));
        NodeId best = children.front();
        double best_score = -std::numeric_limits<double>::infinity();
        for (NodeId c : children) {
            const double score =
                (1.0 - policy_.alpha) * regular_[c].predict(ex.features, learner_) +
                policy_.alpha * balance / static_cast<double>(tree_.node(c).subtree_leaves);
            if (score > best_score) { // ties keep the lowest node id
                best_score = score;
                best = c;
            }
        }
        return best;
    }

    // Drop the auxiliary classifier of a node no policy can select again:
    // an internal node with an internal child and arity at least b is passed
    // through by every future descent.
    void maybe_prune_aux(NodeId v) {
        if (v == kNoNode || !aux_[v]) return;
        const TreeNode& n = tree_.node(v);
        if (n.label || n.children.empty()) return;
        if (n.children.size() < policy_.arity) return;
        if (has_internal_child(v)) aux_[v].reset();
    }

    friend void save_model(const OpltModel&, std::ostream&);
    friend OpltModel load_model(std::istream&);
    friend bool models_identical(const OpltModel&, const OpltModel&);

    LabelTree tree_;
    std::vector<NodeClassifier> regular_;
    std::vector<std::optional<NodeClassifier>> aux_;
    LearnerConfig learner_;
    PolicyConfig policy_;
    bool normalize_features_ = true;
    std::mt19937_64 rng_;
    std::uint64_t stream_pos_ = 0;
    bool cache_valid_ = false;
    std::uint64_t cache_pos_ = 0;
    NodeId cache_node_ = kNoNode;
    std::uint64_t update_count_ = 0;
    std::map<LabelId, std::uint64_t> label_counts_;

    LabelTree::Assignment asg_;
    LabelTree::AssignScratch scratch_;
};

} // namespace oplt
