#include "qpred/training_pool.hpp"

#include <algorithm>
#include <cmath>

#include "qpred/errors.hpp"

namespace qpred {

TrainingPool::TrainingPool(Caps caps) : caps_{caps.short_cap, caps.medium_cap, caps.long_cap} {
    for (auto c : caps_)
        if (c == 0) throw ValidationError("pool bucket capacity must be positive");
}

int TrainingPool::bucket_for(double observed_s) {
    if (observed_s < 10.0) return 0;
    if (observed_s < 60.0) return 1;
    return 2;
}

bool TrainingPool::add(const QueryFeatures& features, double observed_s, const ExecCache& cache,
                       std::uint64_t seq) {
    if (!(std::isfinite(observed_s) && observed_s >= 0.0))
        throw ValidationError("observed exec-time must be finite and >= 0");
    if (cache.contains(hash_features(features))) return false;
    auto& bucket = buckets_[static_cast<std::size_t>(bucket_for(observed_s))];
    if (bucket.size() >= caps_[static_cast<std::size_t>(bucket_for(observed_s))]) bucket.pop_front();
    bucket.push_back(PoolEntry{features, observed_s, seq});
    return true;
}

std::size_t TrainingPool::size() const {
    return buckets_[0].size() + buckets_[1].size() + buckets_[2].size();
}

std::vector<const PoolEntry*> TrainingPool::entries() const {
    std::vector<const PoolEntry*> out;
    out.reserve(size());
    for (const auto& b : buckets_)
        for (const auto& e : b) out.push_back(&e);
    std::sort(out.begin(), out.end(),
              [](const PoolEntry* a, const PoolEntry* b) { return a->seq < b->seq; });
    return out;
}

}  // namespace qpred
