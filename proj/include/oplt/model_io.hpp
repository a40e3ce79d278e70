#pragma once

#include <cstdint>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>

#include "oplt/oplt.hpp"

namespace oplt {

// Length-prefixed little-endian binary model format. Weight-store entries are
// written in ascending key order, so identical states serialize to identical
// bytes.
inline constexpr char kModelMagic[8] = {'O', 'P', 'L', 'T', 'M', 'D', 'L', '\0'};
inline constexpr std::uint32_t kModelVersion = 1;

namespace detail {

template <typename T>
void write_raw(std::ostream& os, const T& v) {
    os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T read_raw(std::istream& is) {
    T v{};
    is.read(reinterpret_cast<char*>(&v), sizeof(T));
    if (!is) throw std::runtime_error("model file truncated");
    return v;
}

inline void write_string(std::ostream& os, const std::string& s) {
    write_raw(os, static_cast<std::uint64_t>(s.size()));
    os.write(s.data(), static_cast<std::streamsize>(s.size()));
}

inline std::string read_string(std::istream& is) {
    const auto n = read_raw<std::uint64_t>(is);
    std::string s(n, '\0');
    is.read(s.data(), static_cast<std::streamsize>(n));
    if (!is) throw std::runtime_error("model file truncated");
    return s;
}

inline void write_classifier(std::ostream& os, const NodeClassifier& c) {
    write_raw<std::uint8_t>(os, c.inverted() ? 1 : 0);
    write_raw<std::uint64_t>(os, c.update_count());
    const auto entries = c.weights().sorted_entries();
    write_raw<std::uint64_t>(os, entries.size());
    for (const auto& [key, e] : entries) {
        write_raw<std::uint32_t>(os, key);
        write_raw<double>(os, e.weight);
        write_raw<double>(os, e.grad_sq);
    }
}

inline NodeClassifier read_classifier(std::istream& is, const LearnerConfig& cfg) {
    const bool inverted = read_raw<std::uint8_t>(is) != 0;
    const auto update_count = read_raw<std::uint64_t>(is);
    const auto n = read_raw<std::uint64_t>(is);
    NodeClassifier c;
    for (std::uint64_t i = 0; i < n; ++i) {
        const auto key = read_raw<std::uint32_t>(is);
        WeightStore::Entry& e = c.weights().upsert(key);
        e.weight = read_raw<double>(is);
        e.grad_sq = read_raw<double>(is);
    }
    NodeClassifier out = inverted ? NodeClassifier::inverse_of(c) : std::move(c);
    out.restore_update_count(update_count);
    (void)cfg;
    return out;
}

} // namespace detail

inline void save_model(const OpltModel& m, std::ostream& os) {
    using namespace detail;
    os.write(kModelMagic, sizeof(kModelMagic));
    write_raw(os, kModelVersion);

    write_raw(os, m.learner_.learning_rate);
    write_raw(os, m.learner_.adagrad_eps);
    write_raw<std::uint8_t>(os, m.learner_.use_bias ? 1 : 0);
    write_raw<std::uint8_t>(os, m.normalize_features_ ? 1 : 0);

    write_raw<std::uint8_t>(os, static_cast<std::uint8_t>(m.policy_.kind));
    write_raw(os, m.policy_.alpha);
    write_raw(os, m.policy_.arity);
    write_raw(os, m.policy_.preleaf_arity);
    write_raw(os, m.policy_.rng_seed);
    write_raw<std::uint8_t>(os, static_cast<std::uint8_t>(m.policy_.aux));

    write_raw(os, m.stream_pos_);
    write_raw(os, m.update_count_);
    write_raw<std::uint8_t>(os, m.cache_valid_ ? 1 : 0);
    write_raw(os, m.cache_pos_);
    write_raw(os, m.cache_node_);
    std::ostringstream rng_state;
    rng_state << m.rng_;
    write_string(os, rng_state.str());

    write_raw<std::uint64_t>(os, m.label_counts_.size());
    for (const auto& [label, count] : m.label_counts_) {
        write_raw(os, label);
        write_raw(os, count);
    }

    const LabelTree& t = m.tree_;
    write_raw<std::uint32_t>(os, static_cast<std::uint32_t>(t.size()));
    write_raw<std::uint32_t>(os, t.root());
    for (NodeId v = 0; v < t.size(); ++v) {
        const TreeNode& n = t.node(v);
        write_raw<std::uint32_t>(os, n.parent);
        write_raw<std::int64_t>(os, n.label ? static_cast<std::int64_t>(*n.label) : -1);
    }

    for (NodeId v = 0; v < t.size(); ++v) write_classifier(os, m.regular_[v]);
    for (NodeId v = 0; v < t.size(); ++v) {
        write_raw<std::uint8_t>(os, m.aux_[v] ? 1 : 0);
        if (m.aux_[v]) write_classifier(os, *m.aux_[v]);
    }
    if (!os) throw std::runtime_error("failed to write model");
}

inline OpltModel load_model(std::istream& is) {
    using namespace detail;
    char magic[sizeof(kModelMagic)];
    is.read(magic, sizeof(magic));
    if (!is || std::memcmp(magic, kModelMagic, sizeof(magic)) != 0)
        throw std::runtime_error("not a model file (bad magic)");
    const auto version = read_raw<std::uint32_t>(is);
    if (version != kModelVersion)
        throw std::runtime_error("unsupported model version " + std::to_string(version));

    OpltModel m;
    m.learner_.learning_rate = read_raw<double>(is);
    m.learner_.adagrad_eps = read_raw<double>(is);
    m.learner_.use_bias = read_raw<std::uint8_t>(is) != 0;
    m.normalize_features_ = read_raw<std::uint8_t>(is) != 0;

    m.policy_.kind = static_cast<PolicyKind>(read_raw<std::uint8_t>(is));
    m.policy_.alpha = read_raw<double>(is);
    m.policy_.arity = read_raw<std::uint32_t>(is);
    m.policy_.preleaf_arity = read_raw<std::uint32_t>(is);
    m.policy_.rng_seed = read_raw<std::uint64_t>(is);
    m.policy_.aux = static_cast<AuxRetention>(read_raw<std::uint8_t>(is));

    m.stream_pos_ = read_raw<std::uint64_t>(is);
    m.update_count_ = read_raw<std::uint64_t>(is);
    m.cache_valid_ = read_raw<std::uint8_t>(is) != 0;
    m.cache_pos_ = read_raw<std::uint64_t>(is);
    m.cache_node_ = read_raw<std::uint32_t>(is);
    std::istringstream rng_state(read_string(is));
    rng_state >> m.rng_;
    if (!rng_state) throw std::runtime_error("corrupt rng state in model");

    const auto n_counts = read_raw<std::uint64_t>(is);
    for (std::uint64_t i = 0; i < n_counts; ++i) {
        const auto label = read_raw<LabelId>(is);
        m.label_counts_[label] = read_raw<std::uint64_t>(is);
    }

    const auto n_nodes = read_raw<std::uint32_t>(is);
    const auto root = read_raw<std::uint32_t>(is);
    std::vector<std::pair<NodeId, std::optional<LabelId>>> records(n_nodes);
    for (auto& [parent, label] : records) {
        parent = read_raw<std::uint32_t>(is);
        const auto lab = read_raw<std::int64_t>(is);
        if (lab >= 0) label = static_cast<LabelId>(lab);
    }
    m.tree_ = LabelTree::from_parents(records, root);
    if (const auto bad = m.tree_.validate(); !bad.empty())
        throw std::runtime_error("corrupt model tree: " + bad.front());

    m.regular_.reserve(n_nodes);
    for (std::uint32_t v = 0; v < n_nodes; ++v) m.regular_.push_back(read_classifier(is, m.learner_));
    m.aux_.reserve(n_nodes);
    for (std::uint32_t v = 0; v < n_nodes; ++v) {
        if (read_raw<std::uint8_t>(is) != 0)
            m.aux_.emplace_back(read_classifier(is, m.learner_));
        else
            m.aux_.emplace_back(std::nullopt);
    }
    return m;
}

inline void save_model_file(const OpltModel& m, const std::string& path) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("cannot open model file for writing: " + path);
    save_model(m, os);
}

inline OpltModel load_model_file(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("cannot open model file: " + path);
    return load_model(is);
}

inline std::string serialize_model(const OpltModel& m) {
    std::ostringstream os(std::ios::binary);
    save_model(m, os);
    return os.str();
}

/// Byte-level equality; the format is canonical, so this is state equality.
inline bool models_identical(const OpltModel& a, const OpltModel& b) {
    return serialize_model(a) == serialize_model(b);
}

} // namespace oplt
