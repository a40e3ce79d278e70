#pragma once

#include <algorithm>
#include <cstdint>
#include <utility>
#include <vector>

#include "oplt/sparse.hpp"

namespace oplt {

/// Growable open-addressing map feature_id -> (weight, squared-gradient sum)
/// with displacement-minimizing (Robin Hood) probing. Power-of-two capacity,
/// max load factor 0.9, growth x2. Absent keys read as (0, 0).
class WeightStore {
  public:
    struct Entry {
        double weight = 0.0;
        double grad_sq = 0.0;
        bool operator==(const Entry&) const = default;
    };

    WeightStore() = default;

    const Entry* find(FeatureId key) const {
        const std::size_t i = find_slot(key);
        return i == kNpos ? nullptr : &slots_[i].entry;
    }

    Entry* find(FeatureId key) {
        const std::size_t i = find_slot(key);
        return i == kNpos ? nullptr : &slots_[i].entry;
    }

    /// Find or insert a zero-initialized entry.
    Entry& upsert(FeatureId key) {
        if (slots_.empty() || (size_ + 1) * 10 > slots_.size() * 9) grow();
        std::size_t i = find_slot(key);
        if (i == kNpos) {
            i = insert_new(key);
            ++size_;
        }
        return slots_[i].entry;
    }

    double weight(FeatureId key) const {
        const Entry* e = find(key);
        return e ? e->weight : 0.0;
    }

    std::size_t size() const { return size_; }
    std::size_t capacity() const { return slots_.size(); }

    template <typename F>
    void for_each(F&& f) const { // unspecified order
        for (const Slot& s : slots_)
            if (s.dist != 0) f(s.key, s.entry);
    }

    /// Entries in ascending key order; the reserved bias key sorts last.
    std::vector<std::pair<FeatureId, Entry>> sorted_entries() const {
        std::vector<std::pair<FeatureId, Entry>> out;
        out.reserve(size_);
        for_each([&](FeatureId k, const Entry& e) { out.emplace_back(k, e); });
        std::sort(out.begin(), out.end(),
                  [](const auto& a, const auto& b) { return a.first < b.first; });
        return out;
    }

  private:
    static constexpr std::size_t kNpos = static_cast<std::size_t>(-1);

    struct Slot {
        FeatureId key = 0;
        std::uint8_t dist = 0; // 0 = empty, else probe distance + 1
        Entry entry;
    };

    static std::uint32_t hash32(std::uint32_t x) {
        x ^= x >> 16;
        x *= 0x7feb352dU;
        x ^= x >> 15;
        x *= 0x846ca68bU;
        x ^= x >> 16;
        return x;
    }

    std::size_t home_of(FeatureId key) const { return hash32(key) & mask_; }

    std::size_t find_slot(FeatureId key) const {
        if (slots_.empty()) return kNpos;
        std::size_t pos = home_of(key);
        std::uint8_t dist = 1;
        while (true) {
            const Slot& s = slots_[pos];
            if (s.dist == 0 || s.dist < dist) return kNpos; // an occupant closer to home ends the run
            if (s.key == key) return pos;
            pos = (pos + 1) & mask_;
            ++dist;
        }
    }

    // Robin Hood insertion of a key known to be absent; returns the key's slot.
    std::size_t insert_new(FeatureId key) {
        FeatureId carried_key = key;
        Entry carried{};
        std::uint8_t dist = 1;
        std::size_t pos = home_of(carried_key);
        std::size_t home = kNpos;
        bool carrying_original = true;
        while (true) {
            Slot& s = slots_[pos];
            if (s.dist == 0) {
                s.key = carried_key;
                s.dist = dist;
                s.entry = carried;
                return carrying_original ? pos : home;
            }
            if (s.dist < dist) { // take from the rich
                std::swap(s.key, carried_key);
                std::swap(s.entry, carried);
                std::swap(s.dist, dist);
                if (carrying_original) {
                    home = pos;
                    carrying_original = false;
                }
            }
            pos = (pos + 1) & mask_;
            if (++dist == 0xFF) {
                // probe length saturated the dist byte: rebuild larger, then retry
                rehash(slots_.size() * 2, carried_key, &carried);
                return find_slot(key);
            }
        }
    }

    void grow() { rehash(slots_.empty() ? 16 : slots_.size() * 2, 0, nullptr); }

    void rehash(std::size_t new_capacity, FeatureId extra_key, const Entry* extra) {
        std::vector<std::pair<FeatureId, Entry>> all;
        all.reserve(size_ + 1);
        for (const Slot& s : slots_)
            if (s.dist != 0) all.emplace_back(s.key, s.entry);
        if (extra) all.emplace_back(extra_key, *extra);
        slots_.assign(new_capacity, Slot{});
        mask_ = slots_.size() - 1;
        for (const auto& [k, e] : all) slots_[insert_new(k)].entry = e;
    }

    std::vector<Slot> slots_;
    std::size_t size_ = 0;
    std::size_t mask_ = 0;
};

} // namespace oplt
