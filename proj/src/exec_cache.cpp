#include "qpred/exec_cache.hpp"

#include <cmath>

#include <json.hpp>

#include "qpred/errors.hpp"

namespace qpred {

ExecCache::ExecCache(std::size_t capacity, double alpha) : capacity_(capacity), alpha_(alpha) {
    if (capacity_ == 0) throw ValidationError("cache capacity must be positive");
    if (!(alpha_ >= 0.0 && alpha_ <= 1.0)) throw ValidationError("cache alpha must be in [0, 1]");
    entries_.reserve(capacity_);
}

std::optional<CacheEntry> ExecCache::lookup(CacheKey key) const {
    std::shared_lock lock(mutex_);
    auto it = entries_.find(key);
    if (it == entries_.end()) return std::nullopt;
    return it->second;
}

bool ExecCache::contains(CacheKey key) const {
    std::shared_lock lock(mutex_);
    return entries_.find(key) != entries_.end();
}

void ExecCache::record(CacheKey key, double observed_s, std::uint64_t seq) {
    if (!(std::isfinite(observed_s) && observed_s >= 0.0))
        throw ValidationError("observed exec-time must be finite and >= 0");
    std::unique_lock lock(mutex_);
    auto it = entries_.find(key);
    if (it != entries_.end()) {
        CacheEntry& e = it->second;
        recency_.erase({e.last_update_seq, key.hash});
        e.count += 1;
        const double delta = observed_s - e.mean;
        e.mean += delta / static_cast<double>(e.count);
        e.m2 += delta * (observed_s - e.mean);
        e.last_time = observed_s;
        e.last_update_seq = seq;
        recency_.insert({seq, key.hash});
        return;
    }
    if (entries_.size() >= capacity_) {
        auto victim = recency_.begin();  // smallest (seq, key)
        entries_.erase(CacheKey{victim->second});
        recency_.erase(victim);
    }
    CacheEntry e;
    e.count = 1;
    e.mean = observed_s;
    e.m2 = 0.0;
    e.last_time = observed_s;
    e.last_update_seq = seq;
    entries_.emplace(key, e);
    recency_.insert({seq, key.hash});
}

std::size_t ExecCache::size() const {
    std::shared_lock lock(mutex_);
    return entries_.size();
}

std::string ExecCache::snapshot_json() const {
    std::shared_lock lock(mutex_);
    nlohmann::json entries = nlohmann::json::array();
    // recency order makes snapshots deterministic
    for (const auto& [seq, hash] : recency_) {
        const CacheEntry& e = entries_.at(CacheKey{hash});
        entries.push_back({{"key", hash},
                           {"count", e.count},
                           {"mean", e.mean},
                           {"m2", e.m2},
                           {"last", e.last_time},
                           {"seq", seq}});
    }
    nlohmann::json j{{"version", 1}, {"capacity", capacity_}, {"alpha", alpha_}, {"entries", entries}};
    return j.dump();
}

ExecCache ExecCache::restore_json(const std::string& text) {
    nlohmann::json j = nlohmann::json::parse(text, nullptr, false);
    if (j.is_discarded()) throw SchemaError("cache snapshot: invalid JSON");
    if (!j.contains("version") || j["version"].get<int>() != 1)
        throw SchemaError("cache snapshot: unsupported version");
    ExecCache cache(j.at("capacity").get<std::size_t>(), j.at("alpha").get<double>());
    for (const auto& e : j.at("entries")) {
        CacheEntry entry;
        entry.count = e.at("count").get<std::uint64_t>();
        entry.mean = e.at("mean").get<double>();
        entry.m2 = e.at("m2").get<double>();
        entry.last_time = e.at("last").get<double>();
        entry.last_update_seq = e.at("seq").get<std::uint64_t>();
        CacheKey key{e.at("key").get<std::uint64_t>()};
        cache.entries_[key] = entry;
        cache.recency_.insert({entry.last_update_seq, key.hash});
    }
    if (cache.entries_.size() > cache.capacity_)
        throw SchemaError("cache snapshot: more entries than capacity");
    return cache;
}

}  // namespace qpred
