#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "oplt/sparse.hpp"

namespace oplt {

/// Seeded synthetic stream spec. Labels are drawn from a skewed distribution
/// so that rare labels keep appearing late in the stream; each label also
/// contributes a characteristic feature so the data is learnable.
struct SynthConfig {
    std::size_t num_examples = 100;
    std::uint32_t num_labels = 20;
    std::uint32_t num_features = 50;
    std::uint32_t min_labels = 1;
    std::uint32_t max_labels = 4;
    std::uint32_t min_features = 3;
    std::uint32_t max_features = 10;
    std::uint64_t seed = 1;
    bool normalize = false;
};

inline std::vector<Example> make_synthetic_stream(const SynthConfig& cfg) {
    std::mt19937_64 rng(cfg.seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::uniform_real_distribution<float> value(0.1f, 1.0f);
    std::uniform_int_distribution<std::uint32_t> n_labels(cfg.min_labels,
                                                          std::min(cfg.max_labels, cfg.num_labels));
    std::uniform_int_distribution<std::uint32_t> n_features(cfg.min_features, cfg.max_features);
    std::uniform_int_distribution<FeatureId> feature(0, cfg.num_features - 1);

    std::vector<Example> out;
    out.reserve(cfg.num_examples);
    for (std::size_t i = 0; i < cfg.num_examples; ++i) {
        Example ex;
        const std::uint32_t k = n_labels(rng);
        while (ex.labels.size() < k) {
            // squared-uniform skew: low ids common, high ids rare
            const double u = unit(rng);
            const auto j = std::min(static_cast<LabelId>(u * u * cfg.num_labels), cfg.num_labels - 1);
            if (std::find(ex.labels.begin(), ex.labels.end(), j) == ex.labels.end())
                ex.labels.push_back(j);
        }
        canonicalize_labels(ex.labels);

        std::vector<SparseVector::Entry> entries;
        for (LabelId j : ex.labels) entries.push_back({j % cfg.num_features, 1.0f});
        const std::uint32_t f = n_features(rng);
        while (entries.size() < ex.labels.size() + f) {
            const FeatureId id = feature(rng);
            bool dup = false;
            for (const auto& e : entries) dup |= e.id == id;
            if (!dup) entries.push_back({id, value(rng)});
        }
        ex.features = SparseVector::from_entries(std::move(entries));
        if (cfg.normalize) ex.features = ex.features.normalized();
        out.push_back(std::move(ex));
    }
    return out;
}

} // namespace oplt
