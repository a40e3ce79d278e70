#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

namespace oplt {

using LabelId = std::uint32_t;
using FeatureId = std::uint32_t;

// Reserved key used by classifiers for the bias coordinate; never a valid feature id.
inline constexpr FeatureId kBiasFeature = 0xFFFFFFFFu;

/// Sparse feature vector in canonical form: entries strictly ascending by
/// feature id, no entry with value exactly 0. Unlisted ids are implicit zeros.
class SparseVector {
  public:
    struct Entry {
        FeatureId id;
        float value;
        bool operator==(const Entry&) const = default;
    };

    SparseVector() = default;

    // Sorts, drops exact zeros, rejects duplicate ids.
    static SparseVector from_entries(std::vector<Entry> entries) {
        std::sort(entries.begin(), entries.end(),
                  [](const Entry& a, const Entry& b) { return a.id < b.id; });
        for (std::size_t i = 1; i < entries.size(); ++i)
            if (entries[i].id == entries[i - 1].id)
                throw std::invalid_argument("duplicate feature id " + std::to_string(entries[i].id));
        std::erase_if(entries, [](const Entry& e) { return e.value == 0.0f; });
        SparseVector v;
        v.entries_ = std::move(entries);
        return v;
    }

    const std::vector<Entry>& entries() const { return entries_; }
    std::size_t size() const { return entries_.size(); }
    bool empty() const { return entries_.empty(); }
    bool operator==(const SparseVector&) const = default;

    double l2_norm() const {
        double s = 0.0;
        for (const Entry& e : entries_) s += static_cast<double>(e.value) * e.value;
        return std::sqrt(s);
    }

    /// Unit-L2-normalized copy; the zero vector is returned unchanged.
    SparseVector normalized() const {
        const double n = l2_norm();
        if (n == 0.0) return *this;
        SparseVector out = *this;
        for (Entry& e : out.entries_) e.value = static_cast<float>(e.value / n);
        return out;
    }

  private:
    std::vector<Entry> entries_;
};

/// One observation: features plus a (possibly empty) set of relevant labels.
struct Example {
    SparseVector features;
    std::vector<LabelId> labels; // sorted, unique

    bool operator==(const Example&) const = default;
};

inline void canonicalize_labels(std::vector<LabelId>& labels) {
    std::sort(labels.begin(), labels.end());
    labels.erase(std::unique(labels.begin(), labels.end()), labels.end());
}

} // namespace oplt
