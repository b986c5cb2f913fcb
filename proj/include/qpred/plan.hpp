#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "qpred/errors.hpp"

namespace qpred {

// Catalog of physical operator kinds. Exactly kNamedOpCount named kinds; any
// unrecognized operator string folds into kOther (the last slot).
enum class OpType : std::uint8_t {
    // sequential scans
    kSeqScan,
    kS3SeqScan,
    kSpectrumScan,
    kSampleScan,
    kPartitionedSeqScan,
    // index scans
    kIndexScan,
    kIndexOnlyScan,
    kBitmapHeapScan,
    kBitmapIndexScan,
    kTidScan,
    kRangeIndexScan,
    // hash builds
    kHash,
    kHashBuild,
    kBloomFilterBuild,
    kHashDedup,
    // hash joins
    kHashJoin,
    kHashJoinDistNone,
    kHashJoinDistInner,
    kHashJoinDistOuter,
    kHashJoinDistBoth,
    kHashJoinBcastInner,
    kHashLeftJoin,
    kHashRightJoin,
    kHashFullJoin,
    kHashSemiJoin,
    kHashAntiJoin,
    // merge joins
    kMergeJoin,
    kMergeLeftJoin,
    kMergeRightJoin,
    kMergeFullJoin,
    kMergeSemiJoin,
    kMergeAntiJoin,
    // nested loops
    kNestedLoop,
    kNestedLoopLeft,
    kNestedLoopSemi,
    kNestedLoopAnti,
    kCrossJoin,
    // aggregates
    kAggregate,
    kHashAggregate,
    kGroupAggregate,
    kPartialAggregate,
    kFinalAggregate,
    kDistinctAggregate,
    kGroupingSetsAggregate,
    // sorts
    kSort,
    kTopNSort,
    kExternalSort,
    kPartitionSort,
    kMergeSort,
    // materialization
    kMaterialize,
    kSpool,
    kCteMaterialize,
    kTempMaterialize,
    // data movement
    kNetworkSend,
    kNetworkReceive,
    kBroadcast,
    kDistribute,
    kRedistribute,
    kGather,
    kGatherMerge,
    kExchange,
    // window functions
    kWindow,
    kWindowAggregate,
    kRunningSum,
    // limits
    kLimit,
    kTop,
    kOffset,
    // subqueries
    kSubqueryScan,
    kSubplan,
    kInitPlan,
    kCteScan,
    kFunctionScan,
    kValuesScan,
    // everything else
    kAppend,
    kMergeAppend,
    kUnique,
    kUnionAll,
    kSetUnion,
    kSetIntersect,
    kSetExcept,
    kFilter,
    kProject,
    kResult,
    kInsert,
    kUpdate,
    kDelete,
    kCopy,
    kUnload,
    kVacuum,
    kAnalyze,
    // catch-all
    kOther,
};

inline constexpr int kNamedOpCount = 90;
inline constexpr int kOpCount = kNamedOpCount + 1;  // + kOther

// Operator categories used by the flattened (local) featurization.
enum class OpCategory : std::uint8_t {
    kSeqScan,
    kIndexScan,
    kHash,
    kHashJoin,
    kMergeJoin,
    kNestedLoop,
    kAggregate,
    kSort,
    kMaterialize,
    kNetwork,
    kWindow,
    kLimit,
    kSubquery,
    kOther,
};

inline constexpr int kOpCategoryCount = 14;

std::string_view op_name(OpType op);
OpType op_from_name(std::string_view name);  // unknown names -> kOther
OpCategory op_category(OpType op);
bool op_is_base_table(OpType op);  // true for operators reading a base table

enum class TableFormat : std::uint8_t { kParquet, kOpenCsv, kText, kLocal, kNull };
inline constexpr int kTableFormatCount = 4;  // kNull is the absent encoding, not a slot

std::string_view table_format_name(TableFormat f);
std::optional<TableFormat> table_format_from_name(std::string_view name);

enum class QueryType : std::uint8_t { kSelect, kInsert, kUpdate, kDelete };
inline constexpr int kQueryTypeCount = 4;

std::string_view query_type_name(QueryType t);
std::optional<QueryType> query_type_from_name(std::string_view name);

// One operator of a physical plan. table_format/table_rows carry values only
// for base-table operators; everywhere else they hold the Null encoding.
struct PlanNode {
    OpType op = OpType::kOther;
    double est_cost = 0.0;
    double est_cardinality = 0.0;
    std::uint32_t tuple_width = 0;
    TableFormat table_format = TableFormat::kNull;
    std::optional<double> table_rows;
    std::vector<PlanNode> children;

    bool has_table_fields() const { return table_format != TableFormat::kNull || table_rows.has_value(); }
};

using PlanTree = PlanNode;

// Throws ValidationError with a field path such as "plan.children[1].est_cost".
void validate_plan(const PlanNode& root, const std::string& path_prefix = "plan");

std::size_t plan_node_count(const PlanNode& root);
std::size_t plan_depth(const PlanNode& root);  // single node -> 1
double plan_total_cost(const PlanNode& root);
double plan_total_cardinality(const PlanNode& root);

}  // namespace qpred
