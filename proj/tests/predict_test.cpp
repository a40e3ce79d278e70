#include <catch2/catch_amalgamated.hpp>

#include "test_util.hpp"

using namespace oplt;
using testutil::T4;

namespace {
const LearnerConfig kNoBias{1.0, 0.01, false};

// T4 with node outputs eta(x, root)=0.9, a=0.8, b=0.5, l1=0.7, l2=0.4, l3=0.9, l4=0.2
// for x = {0:1}; the marginals are products along the paths.
struct T4Scored {
    T4 f;
    std::vector<NodeClassifier> classifiers;
    SparseVector x = SparseVector::from_entries({{0, 1.0f}});

    T4Scored() {
        classifiers.resize(f.tree.size());
        classifiers[f.root] = testutil::classifier_with_output(0.9);
        classifiers[f.a] = testutil::classifier_with_output(0.8);
        classifiers[f.b] = testutil::classifier_with_output(0.5);
        classifiers[f.l1] = testutil::classifier_with_output(0.7);
        classifiers[f.l2] = testutil::classifier_with_output(0.4);
        classifiers[f.l3] = testutil::classifier_with_output(0.9);
        classifiers[f.l4] = testutil::classifier_with_output(0.2);
    }
};
} // namespace

TEST_CASE("top-2 on the scored fixture") {
    const T4Scored s;
    const auto pred = predict_topk(s.f.tree, s.classifiers, s.x, 2, kNoBias);
    REQUIRE(pred.items.size() == 2);
    CHECK(pred.items[0].label == 1);
    CHECK_THAT(pred.items[0].score, Catch::Matchers::WithinAbs(0.504, 1e-9));
    CHECK(pred.items[1].label == 3);
    CHECK_THAT(pred.items[1].score, Catch::Matchers::WithinAbs(0.405, 1e-9));
}

TEST_CASE("brute-force marginals on the scored fixture") {
    const T4Scored s;
    const auto marginals = predict_marginals_bruteforce(s.f.tree, s.classifiers, s.x, kNoBias);
    REQUIRE(marginals.size() == 4);
    const double want[] = {0.504, 0.288, 0.405, 0.090};
    for (std::size_t i = 0; i < 4; ++i) {
        CHECK(marginals[i].label == i + 1);
        CHECK_THAT(marginals[i].score, Catch::Matchers::WithinAbs(want[i], 1e-9));
    }
}

TEST_CASE("argmax prediction on the scored fixture") {
    const T4Scored s;
    CHECK(predict_class(s.f.tree, s.classifiers, s.x, kNoBias) == 1);
}

TEST_CASE("single-label tree returns its label with the path product") {
    LabelTree t = LabelTree::single_root();
    t.add_node(t.root(), 7);
    std::vector<NodeClassifier> cls(2);
    cls[0] = testutil::classifier_with_output(0.9);
    cls[1] = testutil::classifier_with_output(0.8);
    const SparseVector x = SparseVector::from_entries({{0, 1.0f}});
    const auto pred = predict_topk(t, cls, x, 1, kNoBias);
    REQUIRE(pred.items.size() == 1);
    CHECK(pred.items[0].label == 7);
    CHECK_THAT(pred.items[0].score, Catch::Matchers::WithinAbs(0.72, 1e-9));
    CHECK(predict_class(t, cls, x, kNoBias) == 7);
}

TEST_CASE("k of at least m returns every label sorted by score") {
    const T4Scored s;
    const auto pred = predict_topk(s.f.tree, s.classifiers, s.x, 10, kNoBias);
    REQUIRE(pred.items.size() == 4);
    for (std::size_t i = 1; i < pred.items.size(); ++i)
        CHECK(pred.items[i - 1].score >= pred.items[i].score);
    CHECK(pred.items[3].label == 4);
}

TEST_CASE("empty tree and missing labels") {
    auto m = OpltModel::init(LearnerConfig{}, PolicyConfig{});
    const SparseVector x = SparseVector::from_entries({{0, 1.0f}});
    CHECK(predict_topk(m.tree(), m.regular(), x, 3, m.learner()).items.empty());
    CHECK_THROWS_AS(predict_class(m.tree(), m.regular(), x, m.learner()), std::logic_error);
    CHECK_THROWS_AS(predict_topk(m.tree(), m.regular(), x, 0, m.learner()), std::invalid_argument);
}

TEST_CASE("fresh model scores one half per path level and ties to the lowest label") {
    const T4 f;
    std::vector<NodeClassifier> cls(f.tree.size());
    const SparseVector x = SparseVector::from_entries({{3, 2.0f}});
    const auto marginals = predict_marginals_bruteforce(f.tree, cls, x, kNoBias);
    for (const auto& m : marginals) CHECK(m.score == 0.125); // 0.5^3, exactly
    CHECK(predict_class(f.tree, cls, x, kNoBias) == 1);

    const auto pred = predict_topk(f.tree, cls, x, 4, kNoBias);
    REQUIRE(pred.items.size() == 4);
    CHECK(pred.items[0].label == 1); // queue ties pop lowest node id first
}

TEST_CASE("search equals brute force on random models, ties included") {
    std::mt19937_64 rng(1234);
    const LearnerConfig cfg{1.0, 0.01, true};
    for (int trial = 0; trial < 200; ++trial) {
        const std::uint32_t m = 1 + static_cast<std::uint32_t>(rng() % 60);
        const LabelTree t = testutil::random_tree(rng, m);
        std::vector<NodeClassifier> cls;
        cls.reserve(t.size());
        for (NodeId v = 0; v < t.size(); ++v)
            cls.push_back(testutil::random_classifier(rng, cfg, 25, 1 + static_cast<int>(rng() % 10)));
        const SparseVector x = testutil::random_vector(rng, 25);

        auto oracle = predict_marginals_bruteforce(t, cls, x, cfg);
        std::sort(oracle.begin(), oracle.end(), [&](const ScoredLabel& a, const ScoredLabel& b) {
            if (a.score != b.score) return a.score > b.score;
            return t.leaf_of(a.label) < t.leaf_of(b.label);
        });
        for (const std::size_t k : {std::size_t{1}, std::size_t{3}, static_cast<std::size_t>(m)}) {
            const auto pred = predict_topk(t, cls, x, k, cfg);
            REQUIRE(pred.items.size() == std::min<std::size_t>(k, m));
            for (std::size_t i = 0; i < pred.items.size(); ++i) {
                CHECK(pred.items[i].label == oracle[i].label);
                CHECK(pred.items[i].score == oracle[i].score); // same products, same order
            }
        }
    }
}

TEST_CASE("scores never increase along a path") {
    std::mt19937_64 rng(77);
    const LearnerConfig cfg{1.0, 0.01, true};
    const LabelTree t = testutil::random_tree(rng, 40);
    std::vector<NodeClassifier> cls;
    for (NodeId v = 0; v < t.size(); ++v)
        cls.push_back(testutil::random_classifier(rng, cfg, 20, 5));
    for (int i = 0; i < 20; ++i) {
        const SparseVector x = testutil::random_vector(rng, 20);
        // recompute accumulated scores for every node root-down
        std::vector<double> score(t.size(), 0.0);
        score[t.root()] = cls[t.root()].predict(x, cfg);
        std::vector<NodeId> stack{t.root()};
        while (!stack.empty()) {
            const NodeId v = stack.back();
            stack.pop_back();
            for (NodeId c : t.node(v).children) {
                score[c] = score[v] * cls[c].predict(x, cfg);
                CHECK(score[c] <= score[v]);
                stack.push_back(c);
            }
        }
    }
}

TEST_CASE("estimation error is bounded by the weighted per-node errors") {
    // with known per-node conditionals and perturbed estimates, the marginal
    // estimation error obeys the path-sum bound with parent weights
    std::mt19937_64 rng(31337);
    std::uniform_real_distribution<double> eta_dist(0.05, 0.95);
    std::uniform_real_distribution<double> delta(-0.04, 0.04);
    for (int trial = 0; trial < 50; ++trial) {
        const std::uint32_t m = 2 + static_cast<std::uint32_t>(rng() % 30);
        const LabelTree t = testutil::random_tree(rng, m);
        std::vector<double> eta(t.size()), est(t.size());
        for (NodeId v = 0; v < t.size(); ++v) {
            eta[v] = eta_dist(rng);
            est[v] = std::clamp(eta[v] + delta(rng), 1e-6, 1.0 - 1e-6);
        }
        for (std::uint32_t j = 0; j < m; ++j) {
            const auto path = t.path_to_root(t.leaf_of(j)); // leaf..root
            double true_marginal = 1.0, est_marginal = 1.0;
            for (auto it = path.rbegin(); it != path.rend(); ++it) {
                true_marginal *= eta[*it];
                est_marginal *= est[*it];
            }
            double bound = 0.0;
            double parent_marginal = 1.0; // eta of the root's parent is one
            for (auto it = path.rbegin(); it != path.rend(); ++it) {
                bound += parent_marginal * std::abs(eta[*it] - est[*it]);
                parent_marginal *= eta[*it];
            }
            CHECK(std::abs(true_marginal - est_marginal) <= bound + 1e-12);
        }
    }
}
