#include "qpred/features.hpp"

#include <bit>

namespace qpred {
namespace {

void accumulate(const PlanNode& node, Eigen::VectorXd& v) {
    const OpCategory cat = op_category(node.op);
    v[cost_slot(cat)] += node.est_cost;
    v[cardinality_slot(cat)] += node.est_cardinality;
    v[kNodeCountSlot] += 1.0;
    for (const auto& c : node.children) accumulate(c, v);
}

constexpr std::uint64_t kFnvOffset = 14695981039346656037ULL;
constexpr std::uint64_t kFnvPrime = 1099511628211ULL;

void fnv_feed(std::uint64_t& h, std::uint64_t bits) {
    for (int i = 0; i < 8; ++i) {
        h ^= (bits >> (8 * i)) & 0xffULL;  // little-endian byte order
        h *= kFnvPrime;
    }
}

}  // namespace

QueryFeatures featurize_local(const PlanNode& tree, QueryType query_type) {
    QueryFeatures f;
    f.values = Eigen::VectorXd::Zero(kLocalFeatureDim);
    f.query_type = query_type;
    accumulate(tree, f.values);
    f.values[query_type_slot(query_type)] = 1.0;
    return f;
}

CacheKey hash_features(const QueryFeatures& f) {
    std::uint64_t h = kFnvOffset;
    for (int i = 0; i < f.values.size(); ++i) {
        double v = f.values[i];
        if (v == 0.0) v = 0.0;  // collapse -0.0 onto +0.0
        fnv_feed(h, std::bit_cast<std::uint64_t>(v));
    }
    h ^= static_cast<std::uint64_t>(f.query_type);
    h *= kFnvPrime;
    return CacheKey{h};
}

}  // namespace qpred
