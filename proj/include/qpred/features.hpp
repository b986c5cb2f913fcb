#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <functional>

#include "qpred/plan.hpp"

namespace qpred {

// Flattened plan representation: per operator category the summed estimated
// cost and cardinality, a query-type one-hot block, and the node count.
//   slot 2*c   : summed est_cost of category c
//   slot 2*c+1 : summed est_cardinality of category c
//   slots 28-31: query type one-hot (select, insert, update, delete)
//   slot 32    : total node count
inline constexpr int kLocalFeatureDim = 2 * kOpCategoryCount + kQueryTypeCount + 1;
static_assert(kLocalFeatureDim == 33);

inline constexpr int cost_slot(OpCategory c) { return 2 * static_cast<int>(c); }
inline constexpr int cardinality_slot(OpCategory c) { return 2 * static_cast<int>(c) + 1; }
inline constexpr int query_type_slot(QueryType t) {
    return 2 * kOpCategoryCount + static_cast<int>(t);
}
inline constexpr int kNodeCountSlot = kLocalFeatureDim - 1;

struct QueryFeatures {
    Eigen::VectorXd values;  // length kLocalFeatureDim
    QueryType query_type = QueryType::kSelect;

    bool operator==(const QueryFeatures& o) const {
        return query_type == o.query_type && values == o.values;
    }
};

QueryFeatures featurize_local(const PlanNode& tree, QueryType query_type);

struct CacheKey {
    std::uint64_t hash = 0;
    auto operator<=>(const CacheKey&) const = default;
};

// Fixed-seed FNV-1a over the canonical little-endian encoding of the feature
// vector plus the query-type byte. Stable across runs and platforms.
CacheKey hash_features(const QueryFeatures& f);

}  // namespace qpred

template <>
struct std::hash<qpred::CacheKey> {
    std::size_t operator()(const qpred::CacheKey& k) const noexcept { return k.hash; }
};
