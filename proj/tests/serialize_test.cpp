#include <catch2/catch_amalgamated.hpp>

#include <sstream>

#include "test_util.hpp"

using namespace oplt;

namespace {
const LearnerConfig kCfg{1.0, 0.01, true};

PolicyConfig seeded_policy(std::uint64_t seed, PolicyKind kind = PolicyKind::kBestGreedy) {
    PolicyConfig pc;
    pc.kind = kind;
    pc.arity = 2;
    pc.preleaf_arity = 4;
    pc.rng_seed = seed;
    return pc;
}

OpltModel trained_model(std::uint64_t seed, std::size_t n = 80, PolicyKind kind = PolicyKind::kBestGreedy) {
    SynthConfig sc;
    sc.num_examples = n;
    sc.num_labels = 15;
    sc.seed = seed;
    const auto stream = make_synthetic_stream(sc);
    auto m = OpltModel::init(kCfg, seeded_policy(seed, kind));
    m.train_stream(stream, 1);
    return m;
}
} // namespace

TEST_CASE("fresh model round-trips to identical bytes") {
    const auto m = OpltModel::init(kCfg, seeded_policy(3));
    const std::string bytes = serialize_model(m);
    std::istringstream in(bytes, std::ios::binary);
    const OpltModel back = load_model(in);
    CHECK(serialize_model(back) == bytes);
    CHECK(models_identical(m, back));
}

TEST_CASE("trained models round-trip bitwise across policies") {
    for (const PolicyKind kind : {PolicyKind::kRandom, PolicyKind::kBestGreedy}) {
        for (std::uint64_t seed = 1; seed <= 5; ++seed) {
            const auto m = trained_model(seed, 60, kind);
            std::istringstream in(serialize_model(m), std::ios::binary);
            const OpltModel back = load_model(in);
            CHECK(models_identical(m, back));
            CHECK(back.tree().validate().empty());
            CHECK(back.examples_seen() == m.examples_seen());
            CHECK(back.update_count() == m.update_count());
        }
    }
}

TEST_CASE("loaded model predicts identically") {
    const auto m = trained_model(11);
    std::istringstream in(serialize_model(m), std::ios::binary);
    const OpltModel back = load_model(in);
    std::mt19937_64 rng(12);
    for (int i = 0; i < 50; ++i) {
        const SparseVector x = testutil::random_vector(rng, 50);
        const auto a = predict_topk(m.tree(), m.regular(), x, 5, m.learner());
        const auto b = predict_topk(back.tree(), back.regular(), x, 5, back.learner());
        REQUIRE(a.items.size() == b.items.size());
        for (std::size_t k = 0; k < a.items.size(); ++k) {
            CHECK(a.items[k].label == b.items[k].label);
            CHECK(a.items[k].score == b.items[k].score);
        }
    }
}

TEST_CASE("training continues identically after a mid-stream save and load") {
    SynthConfig sc;
    sc.num_examples = 120;
    sc.num_labels = 18;
    sc.seed = 31;
    const auto stream = make_synthetic_stream(sc);
    const std::span<const Example> all(stream);

    for (const PolicyKind kind : {PolicyKind::kRandom, PolicyKind::kBestGreedy}) {
        auto original = OpltModel::init(kCfg, seeded_policy(7, kind));
        original.train_stream(all.subspan(0, 60), 1);

        std::istringstream in(serialize_model(original), std::ios::binary);
        OpltModel resumed = load_model(in);

        original.train_stream(all.subspan(60), 1);
        resumed.train_stream(all.subspan(60), 1);
        CHECK(models_identical(original, resumed));
    }
}

TEST_CASE("corrupted inputs are rejected cleanly") {
    const auto m = trained_model(41);
    std::string bytes = serialize_model(m);

    std::string bad_magic = bytes;
    bad_magic[0] = 'X';
    std::istringstream in1(bad_magic, std::ios::binary);
    CHECK_THROWS_WITH(load_model(in1), Catch::Matchers::ContainsSubstring("magic"));

    std::string bad_version = bytes;
    bad_version[8] = 99;
    std::istringstream in2(bad_version, std::ios::binary);
    CHECK_THROWS_WITH(load_model(in2), Catch::Matchers::ContainsSubstring("version"));

    std::istringstream in3(bytes.substr(0, bytes.size() / 2), std::ios::binary);
    CHECK_THROWS_AS(load_model(in3), std::runtime_error);
}

TEST_CASE("stripped models predict but cannot grow the tree") {
    auto m = trained_model(51);
    m.strip_aux();
    std::istringstream in(serialize_model(m), std::ios::binary);
    OpltModel back = load_model(in);
    for (const auto& a : back.aux()) CHECK(!a.has_value());

    std::mt19937_64 rng(52);
    const SparseVector x = testutil::random_vector(rng, 50);
    CHECK(predict_topk(back.tree(), back.regular(), x, 3, back.learner()).items.size() == 3);

    Example ex;
    ex.labels = {9999};
    ex.features = x;
    CHECK_THROWS_AS(back.train_example(ex), std::logic_error);
}

TEST_CASE("inverse flags survive the round trip") {
    const auto m = trained_model(61);
    bool any_inverted = false;
    for (const auto& c : m.regular()) any_inverted |= c.inverted();
    CHECK(any_inverted); // leaves added online carry inverse wrappers

    std::istringstream in(serialize_model(m), std::ios::binary);
    const OpltModel back = load_model(in);
    for (NodeId v = 0; v < m.tree().size(); ++v) {
        CHECK(back.regular()[v].inverted() == m.regular()[v].inverted());
        CHECK(states_identical(back.regular()[v], m.regular()[v]));
    }
}
