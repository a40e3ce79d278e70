#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <span>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "oplt/sparse.hpp"

namespace oplt {

using NodeId = std::uint32_t;
inline constexpr NodeId kNoNode = 0xFFFFFFFFu;

struct TreeNode {
    NodeId parent = kNoNode;
    std::vector<NodeId> children; // insertion order; ids are ascending by construction
    std::optional<LabelId> label;
    std::uint32_t subtree_leaves = 0; // labeled nodes in this subtree
};

/// Rooted leaf-labeled tree. Node ids are dense, assigned in creation order,
/// and never reused; the algorithms only ever add nodes.
class LabelTree {
  public:
    /// Tree with a single unlabeled root.
    static LabelTree single_root() {
        LabelTree t;
        t.nodes_.emplace_back();
        t.root_ = 0;
        return t;
    }

    /// Rebuild from per-node (parent, label) records, e.g. when loading a
    /// model. Children lists are ascending by node id, which is exactly the
    /// insertion order every mutation here produces.
    static LabelTree from_parents(std::span<const std::pair<NodeId, std::optional<LabelId>>> records,
                                  NodeId root) {
        LabelTree t;
        t.nodes_.resize(records.size());
        t.root_ = root;
        for (NodeId v = 0; v < records.size(); ++v) {
            const auto& [parent, label] = records[v];
            t.nodes_[v].parent = parent;
            if (parent != kNoNode) {
                if (parent >= records.size()) throw std::invalid_argument("parent out of range");
                t.nodes_[parent].children.push_back(v);
            }
            if (label) t.attach_label(v, *label);
        }
        // leaf counts only after every parent link exists (parents may have higher ids)
        for (NodeId v = 0; v < records.size(); ++v)
            if (t.nodes_[v].label)
                for (NodeId a = v; a != kNoNode; a = t.nodes_[a].parent) ++t.nodes_[a].subtree_leaves;
        return t;
    }

    NodeId root() const { return root_; }
    std::size_t size() const { return nodes_.size(); }
    std::size_t num_labels() const { return label_to_leaf_.size(); }

    const TreeNode& node(NodeId v) const { return nodes_.at(v); }
    TreeNode& node(NodeId v) { return nodes_.at(v); } // validate() exists to catch misuse

    bool has_label(LabelId j) const { return label_to_leaf_.count(j) != 0; }

    NodeId leaf_of(LabelId j) const {
        auto it = label_to_leaf_.find(j);
        if (it == label_to_leaf_.end())
            throw std::logic_error("label " + std::to_string(j) + " has no leaf");
        return it->second;
    }

    const std::unordered_map<LabelId, NodeId>& label_to_leaf() const { return label_to_leaf_; }

    bool is_label_leaf(NodeId v) const { return nodes_[v].label.has_value(); }

    bool is_preleaf(NodeId v) const {
        const TreeNode& n = nodes_[v];
        if (n.children.empty()) return false;
        for (NodeId c : n.children)
            if (!nodes_[c].label) return false;
        return true;
    }

    /// Append a node under `parent` (kNoNode only for the very first node).
    NodeId add_node(NodeId parent, std::optional<LabelId> label = std::nullopt) {
        const NodeId id = static_cast<NodeId>(nodes_.size());
        nodes_.emplace_back();
        TreeNode& n = nodes_.back();
        n.parent = parent;
        if (parent != kNoNode) nodes_[parent].children.push_back(id);
        if (label) {
            attach_label(id, *label);
            n.subtree_leaves = 1;
            for (NodeId a = parent; a != kNoNode; a = nodes_[a].parent) ++nodes_[a].subtree_leaves;
        }
        return id;
    }

    /// Assign a label to a currently unlabeled leaf (the root bootstrap case).
    void set_label(NodeId v, LabelId j) {
        if (nodes_[v].label) throw std::logic_error("node already labeled");
        if (!nodes_[v].children.empty()) throw std::logic_error("label on an internal node");
        attach_label(v, j);
        for (NodeId a = v; a != kNoNode; a = nodes_[a].parent) ++nodes_[a].subtree_leaves;
    }

    /// Structural half of node insertion: a new node takes over v's label (leaf
    /// case) or all of v's children, and becomes v's only child.
    NodeId split_node(NodeId v) {
        const NodeId id = static_cast<NodeId>(nodes_.size());
        nodes_.emplace_back();
        TreeNode& nv = nodes_[v];
        TreeNode& nn = nodes_.back();
        if (nv.label) {
            nn.label = nv.label;
            label_to_leaf_[*nn.label] = id;
            nv.label.reset();
        } else {
            nn.children = std::move(nv.children);
            for (NodeId c : nn.children) nodes_[c].parent = id;
        }
        nn.subtree_leaves = nv.subtree_leaves;
        nn.parent = v;
        nv.children.assign(1, id);
        return id;
    }

    /// [v, parent(v), ..., root]; its length is the node's level.
    std::vector<NodeId> path_to_root(NodeId v) const {
        std::vector<NodeId> path;
        for (NodeId a = v; a != kNoNode; a = nodes_[a].parent) path.push_back(a);
        return path;
    }

    /// Positive and negative node sets for one label set, in discovery order.
    /// P holds every node on a leaf-to-root path of a relevant label; N holds
    /// the non-positive children of positive nodes, plus the root when the
    /// label set is empty.
    struct Assignment {
        std::vector<NodeId> positive;
        std::vector<NodeId> negative;
    };

    struct AssignScratch {
        std::vector<std::uint8_t> in_p, in_n;
        std::vector<NodeId> n_raw;
    };

    void assign_to_nodes(std::span<const LabelId> labels, Assignment& out, AssignScratch& scratch) const {
        out.positive.clear();
        out.negative.clear();
        scratch.in_p.assign(nodes_.size(), 0);
        scratch.in_n.assign(nodes_.size(), 0);
        scratch.n_raw.clear();
        scratch.n_raw.push_back(root_);
        scratch.in_n[root_] = 1;
        for (LabelId j : labels) {
            NodeId v = leaf_of(j);
            while (v != kNoNode && !scratch.in_p[v]) {
                scratch.in_p[v] = 1;
                out.positive.push_back(v);
                scratch.in_n[v] = 0;
                for (NodeId c : nodes_[v].children) {
                    if (!scratch.in_p[c] && !scratch.in_n[c]) {
                        scratch.in_n[c] = 1;
                        scratch.n_raw.push_back(c);
                    }
                }
                v = nodes_[v].parent;
            }
        }
        for (NodeId v : scratch.n_raw)
            if (scratch.in_n[v]) out.negative.push_back(v);
    }

    Assignment assign_to_nodes(std::span<const LabelId> labels) const {
        Assignment a;
        AssignScratch s;
        assign_to_nodes(labels, a, s);
        return a;
    }

    /// Max number of nodes on any root-to-node path.
    std::size_t depth() const {
        std::size_t d = 0;
        std::vector<std::pair<NodeId, std::size_t>> stack{{root_, 1}};
        while (!stack.empty()) {
            const auto [v, lv] = stack.back();
            stack.pop_back();
            d = std::max(d, lv);
            for (NodeId c : nodes_[v].children) stack.emplace_back(c, lv + 1);
        }
        return d;
    }

    /// Structural invariant check; returns human-readable violations.
    std::vector<std::string> validate() const {
        std::vector<std::string> bad;
        std::size_t roots = 0;
        for (NodeId v = 0; v < nodes_.size(); ++v) {
            const TreeNode& n = nodes_[v];
            if (n.parent == kNoNode) {
                ++roots;
                if (v != root_) bad.push_back("node " + std::to_string(v) + " is an unregistered root");
            } else {
                if (n.parent >= nodes_.size())
                    bad.push_back("node " + std::to_string(v) + " has out-of-range parent");
                else {
                    const auto& pc = nodes_[n.parent].children;
                    if (std::find(pc.begin(), pc.end(), v) == pc.end())
                        bad.push_back("node " + std::to_string(v) + " missing from parent's child list");
                }
            }
            if (n.label && !n.children.empty())
                bad.push_back("labeled node " + std::to_string(v) + " has children");
            if (n.label) {
                auto it = label_to_leaf_.find(*n.label);
                if (it == label_to_leaf_.end() || it->second != v)
                    bad.push_back("label map does not point at node " + std::to_string(v));
            }
            for (NodeId c : n.children) {
                if (c >= nodes_.size() || nodes_[c].parent != v)
                    bad.push_back("child link of node " + std::to_string(v) + " not mirrored");
            }
        }
        if (roots != 1) bad.push_back("tree has " + std::to_string(roots) + " roots");
        // reachability from the root
        std::vector<std::uint8_t> seen(nodes_.size(), 0);
        std::vector<NodeId> stack{root_};
        std::size_t reached = 0;
        while (!stack.empty()) {
            NodeId v = stack.back();
            stack.pop_back();
            if (v >= nodes_.size() || seen[v]) continue;
            seen[v] = 1;
            ++reached;
            for (NodeId c : nodes_[v].children) stack.push_back(c);
        }
        if (reached != nodes_.size()) bad.push_back("unreachable nodes present");
        for (const auto& [lab, leaf] : label_to_leaf_)
            if (leaf >= nodes_.size() || !nodes_[leaf].label || *nodes_[leaf].label != lab)
                bad.push_back("stale label map entry for label " + std::to_string(lab));
        return bad;
    }

    /// Text dump, one node per line: "id parent label" (-1 where absent).
    void dump(std::ostream& os) const {
        for (NodeId v = 0; v < nodes_.size(); ++v) {
            const TreeNode& n = nodes_[v];
            os << v << ' ' << (n.parent == kNoNode ? -1 : static_cast<std::int64_t>(n.parent)) << ' '
               << (n.label ? static_cast<std::int64_t>(*n.label) : -1) << '\n';
        }
    }

  private:
    void attach_label(NodeId v, LabelId j) {
        if (!label_to_leaf_.emplace(j, v).second)
            throw std::logic_error("label " + std::to_string(j) + " already in tree");
        nodes_[v].label = j;
    }

    std::vector<TreeNode> nodes_;
    NodeId root_ = kNoNode;
    std::unordered_map<LabelId, NodeId> label_to_leaf_;
};

} // namespace oplt
