#include <catch2/catch_amalgamated.hpp>

#include <sstream>

#include "test_util.hpp"

using namespace oplt;
using testutil::T4;

namespace {
std::set<NodeId> as_set(const std::vector<NodeId>& v) { return {v.begin(), v.end()}; }
} // namespace

TEST_CASE("empty label set marks only the root negative") {
    const T4 f;
    const auto asg = f.tree.assign_to_nodes(std::vector<LabelId>{});
    CHECK(asg.positive.empty());
    CHECK(asg.negative == std::vector<NodeId>{f.root});
}

TEST_CASE("single label walks to the root and fringes its siblings") {
    const T4 f;
    const auto asg = f.tree.assign_to_nodes(std::vector<LabelId>{1});
    CHECK(as_set(asg.positive) == std::set<NodeId>{f.root, f.a, f.l1});
    CHECK(as_set(asg.negative) == std::set<NodeId>{f.l2, f.b});
    // discovery order: leaf-to-root, then sibling fringe in child order
    CHECK(asg.positive == std::vector<NodeId>{f.l1, f.a, f.root});
    CHECK(asg.negative == std::vector<NodeId>{f.l2, f.b});
}

TEST_CASE("two labels across both subtrees") {
    const T4 f;
    const auto asg = f.tree.assign_to_nodes(std::vector<LabelId>{1, 3});
    CHECK(as_set(asg.positive) == std::set<NodeId>{f.root, f.a, f.l1, f.b, f.l3});
    CHECK(as_set(asg.negative) == std::set<NodeId>{f.l2, f.l4});
}

TEST_CASE("unknown label is a logic error") {
    const T4 f;
    CHECK_THROWS_AS(f.tree.assign_to_nodes(std::vector<LabelId>{9}), std::logic_error);
}

TEST_CASE("paths to the root") {
    const T4 f;
    CHECK(f.tree.path_to_root(f.root) == std::vector<NodeId>{f.root});
    CHECK(f.tree.path_to_root(f.l1) == std::vector<NodeId>{f.l1, f.a, f.root});
    CHECK(f.tree.depth() == 3);
}

TEST_CASE("path reversal walks back down through child links") {
    std::mt19937_64 rng(13);
    for (int trial = 0; trial < 20; ++trial) {
        const LabelTree t = testutil::random_tree(rng, 1 + static_cast<std::uint32_t>(rng() % 40));
        for (NodeId v = 0; v < t.size(); ++v) {
            const auto path = t.path_to_root(v);
            REQUIRE(path.back() == t.root());
            for (std::size_t i = path.size() - 1; i > 0; --i) {
                const auto& ch = t.node(path[i]).children;
                CHECK(std::find(ch.begin(), ch.end(), path[i - 1]) != ch.end());
            }
        }
    }
}

TEST_CASE("assignment matches the indicator-definition oracle on random trees") {
    std::mt19937_64 rng(101);
    for (int trial = 0; trial < 300; ++trial) {
        const std::uint32_t m = 1 + static_cast<std::uint32_t>(rng() % 64);
        const LabelTree t = testutil::random_tree(rng, m);
        const auto labels = testutil::random_label_subset(rng, m, 6);
        const auto got = t.assign_to_nodes(labels);
        const auto want = testutil::oracle_assign(t, labels);
        CHECK(as_set(got.positive) == want.positive);
        CHECK(as_set(got.negative) == want.negative);

        // each node appears at most once across P and N
        std::set<NodeId> all;
        for (NodeId v : got.positive) CHECK(all.insert(v).second);
        for (NodeId v : got.negative) CHECK(all.insert(v).second);

        // size bounds: |P| <= sum of path lengths, |N| <= sum of degrees over P
        std::size_t path_sum = 0, deg_sum = 0;
        for (LabelId j : labels) path_sum += t.path_to_root(t.leaf_of(j)).size();
        for (NodeId v : got.positive) deg_sum += t.node(v).children.size();
        CHECK(got.positive.size() <= path_sum);
        CHECK(got.negative.size() <= deg_sum + (labels.empty() ? 1 : 0));
    }
}

TEST_CASE("assignment order is deterministic") {
    std::mt19937_64 rng(55);
    const LabelTree t = testutil::random_tree(rng, 30);
    const std::vector<LabelId> labels{2, 11, 29};
    const auto a = t.assign_to_nodes(labels);
    const auto b = t.assign_to_nodes(labels);
    CHECK(a.positive == b.positive);
    CHECK(a.negative == b.negative);
}

TEST_CASE("validate accepts healthy trees and reports injected faults") {
    CHECK(LabelTree::single_root().validate().empty());
    const T4 f;
    CHECK(f.tree.validate().empty());

    LabelTree broken = f.tree;
    broken.node(f.l1).parent = f.b; // parent/child mismatch
    CHECK(!broken.validate().empty());

    LabelTree cyclic = f.tree;
    cyclic.node(f.a).children.push_back(f.root);
    CHECK(!cyclic.validate().empty());
}

TEST_CASE("tree text dump lists id, parent, label") {
    const T4 f;
    std::ostringstream os;
    f.tree.dump(os);
    CHECK(os.str() ==
          "0 -1 -1\n1 0 -1\n2 0 -1\n3 1 1\n4 1 2\n5 2 3\n6 2 4\n");
}

TEST_CASE("split_node reassigns labels and reparents children") {
    T4 f;
    // leaf case: the label moves down
    const NodeId nv = f.tree.split_node(f.l1);
    CHECK(f.tree.node(f.l1).label.has_value() == false);
    CHECK(f.tree.node(f.l1).children == std::vector<NodeId>{nv});
    CHECK(f.tree.node(nv).label == 1);
    CHECK(f.tree.leaf_of(1) == nv);
    CHECK(f.tree.node(nv).subtree_leaves == 1);

    // internal case: children move down
    const NodeId na = f.tree.split_node(f.a);
    CHECK(f.tree.node(f.a).children == std::vector<NodeId>{na});
    CHECK(f.tree.node(na).children == std::vector<NodeId>{f.l1, f.l2});
    CHECK(f.tree.node(f.l1).parent == na);
    CHECK(f.tree.node(na).subtree_leaves == 2);
    CHECK(f.tree.validate().empty());
}

TEST_CASE("subtree leaf counts stay consistent") {
    T4 f;
    CHECK(f.tree.node(f.root).subtree_leaves == 4);
    CHECK(f.tree.node(f.a).subtree_leaves == 2);
    f.tree.add_node(f.b, 9);
    CHECK(f.tree.node(f.b).subtree_leaves == 3);
    CHECK(f.tree.node(f.root).subtree_leaves == 5);
}
