#pragma once

#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "oplt/oplt.hpp"
#include "oplt/predict.hpp"
#include "oplt/sparse.hpp"

namespace oplt {

/// Inverse propensities q_j = 1 + C (N_j + B)^(-A) with C = (ln N - 1)(B + 1)^A.
struct PropensityModel {
    double a = 0.55;
    double b = 1.5;
    double c = 0.0;
    std::uint64_t train_size = 0;
    std::map<LabelId, std::uint64_t> counts;

    static PropensityModel from_counts(double a, double b, std::uint64_t train_size,
                                       std::map<LabelId, std::uint64_t> counts) {
        PropensityModel p;
        p.a = a;
        p.b = b;
        p.train_size = train_size;
        p.counts = std::move(counts);
        p.c = (std::log(static_cast<double>(train_size)) - 1.0) * std::pow(b + 1.0, a);
        return p;
    }

    double inverse_propensity(LabelId j) const {
        const auto it = counts.find(j);
        const double nj = it == counts.end() ? 0.0 : static_cast<double>(it->second);
        return 1.0 + c * std::pow(nj + b, -a);
    }
};

/// |top-k intersect truth| / k; the denominator is k even when fewer labels exist.
inline double precision_at_k(const Prediction& predicted, std::span<const LabelId> truth,
                             std::size_t k) {
    if (k == 0) throw std::invalid_argument("k must be >= 1");
    std::size_t hits = 0;
    const std::size_t n = std::min(k, predicted.items.size());
    for (std::size_t i = 0; i < n; ++i)
        if (std::find(truth.begin(), truth.end(), predicted.items[i].label) != truth.end()) ++hits;
    return static_cast<double>(hits) / static_cast<double>(k);
}

/// (1/k) * sum over predicted top-k of q_j [j in truth].
inline double psp_at_k(const Prediction& predicted, std::span<const LabelId> truth, std::size_t k,
                       const PropensityModel& p) {
    if (k == 0) throw std::invalid_argument("k must be >= 1");
    double s = 0.0;
    const std::size_t n = std::min(k, predicted.items.size());
    for (std::size_t i = 0; i < n; ++i) {
        const LabelId j = predicted.items[i].label;
        if (std::find(truth.begin(), truth.end(), j) != truth.end()) s += p.inverse_propensity(j);
    }
    return s / static_cast<double>(k);
}

/// log2(acc_algo) - log2(acc_const), in bits; undefined when either is zero.
inline std::optional<double> entropy_reduction(double acc_algo, double acc_const) {
    if (acc_algo <= 0.0 || acc_const <= 0.0) return std::nullopt;
    return std::log2(acc_algo) - std::log2(acc_const);
}

struct ProgressivePoint {
    std::uint64_t t = 0;
    double accuracy = 0.0;
    std::optional<double> bits; // vs the running most-frequent-label predictor
};

/// Online progressive validation over a multi-class stream: each example is
/// predicted before the model trains on it. Accuracy at t is exact integer
/// counting, hits/t. The baseline is the most frequent label so far (ties to
/// the lower id; it makes no prediction before the first example).
inline std::vector<ProgressivePoint> progressive_validate(OpltModel& model,
                                                          std::span<const Example> stream,
                                                          std::span<const std::uint64_t> checkpoints,
                                                          const OpltHooks* hooks = nullptr) {
    std::vector<ProgressivePoint> out;
    std::uint64_t hits = 0, const_hits = 0, t = 0;
    std::map<LabelId, std::uint64_t> freq;
    LabelId mode_label = 0;
    std::uint64_t mode_count = 0;
    std::size_t next_cp = 0;
    for (const Example& ex : stream) {
        if (ex.labels.size() != 1)
            throw std::invalid_argument("progressive validation needs exactly one label per example");
        const LabelId truth = ex.labels.front();
        if (model.tree().num_labels() > 0 &&
            predict_class(model.tree(), model.regular(), ex.features, model.learner()) == truth)
            ++hits;
        if (mode_count > 0 && mode_label == truth) ++const_hits;
        model.train_example(ex, hooks);
        const std::uint64_t f = ++freq[truth];
        if (f > mode_count || (f == mode_count && truth < mode_label)) {
            mode_count = f;
            mode_label = truth;
        }
        ++t;
        while (next_cp < checkpoints.size() && checkpoints[next_cp] < t) ++next_cp;
        if ((next_cp < checkpoints.size() && checkpoints[next_cp] == t) || t == stream.size()) {
            const double acc = static_cast<double>(hits) / static_cast<double>(t);
            const double acc_c = static_cast<double>(const_hits) / static_cast<double>(t);
            out.push_back({t, acc, entropy_reduction(acc, acc_c)});
        }
    }
    return out;
}

} // namespace oplt
