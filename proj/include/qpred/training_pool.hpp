#pragma once

#include <array>
#include <cstdint>
#include <deque>
#include <vector>

#include "qpred/exec_cache.hpp"
#include "qpred/features.hpp"

namespace qpred {

struct PoolEntry {
    QueryFeatures features;
    double observed_s = 0.0;
    std::uint64_t seq = 0;
};

// Training examples bucketed by observed exec-time so long-running queries
// keep representation despite the short-query skew. Buckets: [0,10s), [10,60s),
// [60s,inf). Entries within a bucket are seq-ordered; overflow evicts the
// oldest entry of that bucket only.
class TrainingPool {
public:
    struct Caps {
        std::size_t short_cap = 6000;
        std::size_t medium_cap = 3000;
        std::size_t long_cap = 1000;
    };

    explicit TrainingPool(Caps caps = {});

    static int bucket_for(double observed_s);  // 0 short, 1 medium, 2 long

    // Rejects queries currently present in the exec-time cache (repeats are
    // the cache's job); returns whether the entry was accepted.
    bool add(const QueryFeatures& features, double observed_s, const ExecCache& cache,
             std::uint64_t seq);

    std::size_t size() const;
    const std::deque<PoolEntry>& bucket(int i) const { return buckets_[static_cast<std::size_t>(i)]; }
    std::size_t cap(int i) const { return caps_[static_cast<std::size_t>(i)]; }

    // All entries, seq-merged across buckets; the training matrix view.
    std::vector<const PoolEntry*> entries() const;

private:
    std::array<std::deque<PoolEntry>, 3> buckets_;
    std::array<std::size_t, 3> caps_;
};

}  // namespace qpred
