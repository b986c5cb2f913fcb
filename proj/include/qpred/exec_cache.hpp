#pragma once

#include <cstdint>
#include <optional>
#include <set>
#include <shared_mutex>
#include <string>
#include <unordered_map>

#include "qpred/features.hpp"

namespace qpred {

// Running statistics for one cached query: Welford count/mean/M2 plus the most
// recent observation, and the recency sequence used for eviction.
struct CacheEntry {
    std::uint64_t count = 0;
    double mean = 0.0;
    double m2 = 0.0;
    double last_time = 0.0;
    std::uint64_t last_update_seq = 0;

    double variance() const { return count > 0 ? m2 / static_cast<double>(count) : 0.0; }
};

// Blend of the running mean and the most recent observation.
inline double cache_blend(const CacheEntry& e, double alpha) {
    return e.mean * alpha + e.last_time * (1.0 - alpha);
}

// Exact-match exec-time cache. Lookups take a shared lock and return a copied
// snapshot; record() takes an exclusive lock and is expected to be called from
// a single ordered writer (the dispatcher).
class ExecCache {
public:
    explicit ExecCache(std::size_t capacity = 2000, double alpha = 0.8);

    // moves transfer contents only; the mutex is per-object
    ExecCache(ExecCache&& o) noexcept
        : capacity_(o.capacity_), alpha_(o.alpha_), entries_(std::move(o.entries_)), recency_(std::move(o.recency_)) {}
    ExecCache& operator=(ExecCache&& o) noexcept {
        capacity_ = o.capacity_;
        alpha_ = o.alpha_;
        entries_ = std::move(o.entries_);
        recency_ = std::move(o.recency_);
        return *this;
    }

    std::optional<CacheEntry> lookup(CacheKey key) const;
    bool contains(CacheKey key) const;

    // Welford update; inserts on first sight and evicts the entry with the
    // smallest last_update_seq (ties: smaller key) when over capacity.
    // seq must be strictly increasing across calls.
    void record(CacheKey key, double observed_s, std::uint64_t seq);

    double predict(const CacheEntry& entry) const { return cache_blend(entry, alpha_); }

    std::size_t size() const;
    std::size_t capacity() const { return capacity_; }
    double alpha() const { return alpha_; }

    std::string snapshot_json() const;
    static ExecCache restore_json(const std::string& text);

private:
    std::size_t capacity_;
    double alpha_;
    mutable std::shared_mutex mutex_;
    std::unordered_map<CacheKey, CacheEntry> entries_;
    std::set<std::pair<std::uint64_t, std::uint64_t>> recency_;  // (seq, key.hash)
};

}  // namespace qpred
