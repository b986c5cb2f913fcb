#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "qpred/plan.hpp"

namespace qpred {

// Per-node raw features of the graph representation. Kept compact; the dense
// one-hot row is materialized on demand (dense_row) so a workload with many
// shared templates stays small in memory.
struct GraphNode {
    OpType op = OpType::kOther;
    double est_cost = 0.0;
    double est_cardinality = 0.0;
    double tuple_width = 0.0;
    TableFormat table_format = TableFormat::kNull;
    double table_rows = 0.0;  // 0 when table_null
    bool table_null = true;   // true when the operator has no base-table fields

    bool operator==(const GraphNode&) const = default;
};

// Dense row layout:
//   [0, 91)   operator one-hot (90 named kinds + other)
//   [91]      est_cost
//   [92]      est_cardinality
//   [93]      tuple_width
//   [94, 98)  table format one-hot (parquet, opencsv, text, local); all zero when null
//   [98]      table_rows (0 when null)
//   [99]      null flag: 1 when the table fields carry the Null encoding
inline constexpr int kGraphFeatureDim = kOpCount + 3 + kTableFormatCount + 2;
static_assert(kGraphFeatureDim == 100);

struct PlanGraph {
    std::vector<GraphNode> nodes;                 // preorder: root first
    std::vector<std::pair<int, int>> edges;       // child -> parent
    int root_index = 0;

    Eigen::VectorXd dense_row(int i) const;
    Eigen::MatrixXd dense() const;                       // nodes x kGraphFeatureDim
    std::vector<std::vector<int>> children_of() const;   // adjacency derived from edges

    bool operator==(const PlanGraph&) const = default;
};

PlanGraph featurize_global(const PlanNode& tree);

std::string plan_graph_serialize(const PlanGraph& g);
PlanGraph plan_graph_deserialize(const std::string& text);

enum class InstanceType : std::uint8_t {
    kDc2Large,
    kDc2_8xlarge,
    kRa3XlPlus,
    kRa3_4xlarge,
    kRa3_16xlarge,
    kServerless,
};
inline constexpr int kInstanceTypeCount = 6;

std::string_view instance_type_name(InstanceType t);
std::optional<InstanceType> instance_type_from_name(std::string_view name);

struct PlanSummary {
    double node_count = 0.0;
    double depth = 0.0;
    double total_cost = 0.0;
    double total_cardinality = 0.0;
};

PlanSummary summarize_plan(const PlanNode& tree);

// Deployment facts that affect exec-time beyond the plan itself.
struct SystemContext {
    InstanceType instance_type = InstanceType::kRa3_4xlarge;
    int node_count = 2;
    double memory_gb = 64.0;
    int concurrent_queries = 0;
    PlanSummary plan_summary;

    Eigen::VectorXd vector() const;  // instance one-hot + numeric block
};

// instance one-hot (6) + node_count + memory_gb + concurrent + 4 summary slots
inline constexpr int kContextDim = kInstanceTypeCount + 3 + 4;
static_assert(kContextDim == 13);

// Index of the first numeric slot in SystemContext::vector(); everything from
// here on is subject to model-side standardization.
inline constexpr int kContextNumericOffset = kInstanceTypeCount;

void validate_context(const SystemContext& ctx, const std::string& path_prefix = "system");

}  // namespace qpred
