#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>

#include "oplt/sparse.hpp"
#include "oplt/weight_store.hpp"

namespace oplt {

struct LearnerConfig {
    double learning_rate = 1.0;
    double adagrad_eps = 0.01;
    bool use_bias = true;

    void validate() const {
        if (learning_rate <= 0.0) throw std::invalid_argument("learning_rate must be > 0");
        if (adagrad_eps <= 0.0) throw std::invalid_argument("adagrad_eps must be > 0");
    }
    bool operator==(const LearnerConfig&) const = default;
};

inline double sigmoid(double z) {
    if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
    const double e = std::exp(z);
    return e / (1.0 + e);
}

// sigmoid(score) - target, written so that (score, target) -> (-score, 1-target)
// yields the exact floating-point negation. This keeps a classifier trained
// through an inverse wrapper an exact mirror of one trained directly.
inline double logistic_error(double score, int target) {
    return target == 1 ? -sigmoid(-score) : sigmoid(score);
}

/// Online logistic model with per-coordinate AdaGrad steps over a sparse
/// weight store. An inverted classifier wraps its own private base state:
/// it predicts 1 - base prediction and flips update targets.
class NodeClassifier {
  public:
    NodeClassifier() = default;

    bool inverted() const { return inverted_; }
    std::uint64_t update_count() const { return update_count_; }
    void restore_update_count(std::uint64_t n) { update_count_ = n; } // deserialization only
    const WeightStore& weights() const { return weights_; }
    WeightStore& weights() { return weights_; }

    // Raw score of the underlying direct state.
    double base_score(const SparseVector& x, const LearnerConfig& cfg) const {
        double s = 0.0;
        for (const auto& e : x.entries())
            if (const WeightStore::Entry* w = weights_.find(e.id)) s += w->weight * static_cast<double>(e.value);
        if (cfg.use_bias)
            if (const WeightStore::Entry* w = weights_.find(kBiasFeature)) s += w->weight;
        return s;
    }

    double predict(const SparseVector& x, const LearnerConfig& cfg) const {
        const double p = sigmoid(base_score(x, cfg));
        return inverted_ ? 1.0 - p : p;
    }

    void update(const SparseVector& x, int target, const LearnerConfig& cfg) {
        const int t = inverted_ ? 1 - target : target;
        const double err = logistic_error(base_score(x, cfg), t);
        for (const auto& e : x.entries()) apply_coordinate(e.id, static_cast<double>(e.value), err, cfg);
        if (cfg.use_bias) apply_coordinate(kBiasFeature, 1.0, err, cfg);
        ++update_count_;
    }

    /// Deep, independent duplicate. Only direct classifiers are ever copied.
    NodeClassifier copy() const {
        if (inverted_) throw std::logic_error("copy of an inverse classifier");
        return *this;
    }

    /// Inverse wrapper over a deep copy of a direct classifier. The donor's
    /// later updates do not reach the wrapper.
    static NodeClassifier inverse_of(const NodeClassifier& base) {
        if (base.inverted_) throw std::logic_error("inverse of an inverse classifier");
        NodeClassifier c = base;
        c.inverted_ = true;
        return c;
    }

  private:
    void apply_coordinate(FeatureId id, double xi, double err, const LearnerConfig& cfg) {
        WeightStore::Entry& w = weights_.upsert(id);
        const double g = err * xi;
        w.grad_sq += g * g;
        w.weight -= cfg.learning_rate * g / std::sqrt(w.grad_sq + cfg.adagrad_eps);
    }

    WeightStore weights_;
    bool inverted_ = false;
    std::uint64_t update_count_ = 0;
};

/// Exact (no-tolerance) equality of learner states modulo representation:
/// an inverse wrapper stores the mirrored weights, so weights are compared
/// after flipping the sign on the inverted side. Negation is exact, which
/// makes this a zero-tolerance comparison.
inline bool states_equivalent(const NodeClassifier& a, const NodeClassifier& b) {
    if (a.update_count() != b.update_count()) return false;
    const auto ea = a.weights().sorted_entries();
    const auto eb = b.weights().sorted_entries();
    if (ea.size() != eb.size()) return false;
    const double sa = a.inverted() ? -1.0 : 1.0;
    const double sb = b.inverted() ? -1.0 : 1.0;
    for (std::size_t i = 0; i < ea.size(); ++i) {
        if (ea[i].first != eb[i].first) return false;
        if (sa * ea[i].second.weight != sb * eb[i].second.weight) return false;
        if (ea[i].second.grad_sq != eb[i].second.grad_sq) return false;
    }
    return true;
}

/// Representation-exact equality (flags, counts, raw stored bits).
inline bool states_identical(const NodeClassifier& a, const NodeClassifier& b) {
    if (a.inverted() != b.inverted() || a.update_count() != b.update_count()) return false;
    const auto ea = a.weights().sorted_entries();
    const auto eb = b.weights().sorted_entries();
    return ea == eb;
}

} // namespace oplt
