#include "qpred/plan.hpp"

#include <array>
#include <cmath>
#include <unordered_map>

namespace qpred {
namespace {

struct OpInfo {
    std::string_view name;
    OpCategory category;
    bool base_table;
};

constexpr std::array<OpInfo, kOpCount> kOpTable{{
    {"seq_scan", OpCategory::kSeqScan, true},
    {"s3_seq_scan", OpCategory::kSeqScan, true},
    {"spectrum_scan", OpCategory::kSeqScan, true},
    {"sample_scan", OpCategory::kSeqScan, true},
    {"partitioned_seq_scan", OpCategory::kSeqScan, true},
    {"index_scan", OpCategory::kIndexScan, true},
    {"index_only_scan", OpCategory::kIndexScan, true},
    {"bitmap_heap_scan", OpCategory::kIndexScan, true},
    {"bitmap_index_scan", OpCategory::kIndexScan, true},
    {"tid_scan", OpCategory::kIndexScan, true},
    {"range_index_scan", OpCategory::kIndexScan, true},
    {"hash", OpCategory::kHash, false},
    {"hash_build", OpCategory::kHash, false},
    {"bloom_filter_build", OpCategory::kHash, false},
    {"hash_dedup", OpCategory::kHash, false},
    {"hash_join", OpCategory::kHashJoin, false},
    {"hash_join_dist_none", OpCategory::kHashJoin, false},
    {"hash_join_dist_inner", OpCategory::kHashJoin, false},
    {"hash_join_dist_outer", OpCategory::kHashJoin, false},
    {"hash_join_dist_both", OpCategory::kHashJoin, false},
    {"hash_join_bcast_inner", OpCategory::kHashJoin, false},
    {"hash_left_join", OpCategory::kHashJoin, false},
    {"hash_right_join", OpCategory::kHashJoin, false},
    {"hash_full_join", OpCategory::kHashJoin, false},
    {"hash_semi_join", OpCategory::kHashJoin, false},
    {"hash_anti_join", OpCategory::kHashJoin, false},
    {"merge_join", OpCategory::kMergeJoin, false},
    {"merge_left_join", OpCategory::kMergeJoin, false},
    {"merge_right_join", OpCategory::kMergeJoin, false},
    {"merge_full_join", OpCategory::kMergeJoin, false},
    {"merge_semi_join", OpCategory::kMergeJoin, false},
    {"merge_anti_join", OpCategory::kMergeJoin, false},
    {"nested_loop", OpCategory::kNestedLoop, false},
    {"nested_loop_left", OpCategory::kNestedLoop, false},
    {"nested_loop_semi", OpCategory::kNestedLoop, false},
    {"nested_loop_anti", OpCategory::kNestedLoop, false},
    {"cross_join", OpCategory::kNestedLoop, false},
    {"aggregate", OpCategory::kAggregate, false},
    {"hash_aggregate", OpCategory::kAggregate, false},
    {"group_aggregate", OpCategory::kAggregate, false},
    {"partial_aggregate", OpCategory::kAggregate, false},
    {"final_aggregate", OpCategory::kAggregate, false},
    {"distinct_aggregate", OpCategory::kAggregate, false},
    {"grouping_sets_aggregate", OpCategory::kAggregate, false},
    {"sort", OpCategory::kSort, false},
    {"top_n_sort", OpCategory::kSort, false},
    {"external_sort", OpCategory::kSort, false},
    {"partition_sort", OpCategory::kSort, false},
    {"merge_sort", OpCategory::kSort, false},
    {"materialize", OpCategory::kMaterialize, false},
    {"spool", OpCategory::kMaterialize, false},
    {"cte_materialize", OpCategory::kMaterialize, false},
    {"temp_materialize", OpCategory::kMaterialize, false},
    {"network_send", OpCategory::kNetwork, false},
    {"network_receive", OpCategory::kNetwork, false},
    {"broadcast", OpCategory::kNetwork, false},
    {"distribute", OpCategory::kNetwork, false},
    {"redistribute", OpCategory::kNetwork, false},
    {"gather", OpCategory::kNetwork, false},
    {"gather_merge", OpCategory::kNetwork, false},
    {"exchange", OpCategory::kNetwork, false},
    {"window", OpCategory::kWindow, false},
    {"window_aggregate", OpCategory::kWindow, false},
    {"running_sum", OpCategory::kWindow, false},
    {"limit", OpCategory::kLimit, false},
    {"top", OpCategory::kLimit, false},
    {"offset", OpCategory::kLimit, false},
    {"subquery_scan", OpCategory::kSubquery, false},
    {"subplan", OpCategory::kSubquery, false},
    {"init_plan", OpCategory::kSubquery, false},
    {"cte_scan", OpCategory::kSubquery, false},
    {"function_scan", OpCategory::kSubquery, false},
    {"values_scan", OpCategory::kSubquery, false},
    {"append", OpCategory::kOther, false},
    {"merge_append", OpCategory::kOther, false},
    {"unique", OpCategory::kOther, false},
    {"union_all", OpCategory::kOther, false},
    {"set_union", OpCategory::kOther, false},
    {"set_intersect", OpCategory::kOther, false},
    {"set_except", OpCategory::kOther, false},
    {"filter", OpCategory::kOther, false},
    {"project", OpCategory::kOther, false},
    {"result", OpCategory::kOther, false},
    {"insert", OpCategory::kOther, false},
    {"update", OpCategory::kOther, false},
    {"delete", OpCategory::kOther, false},
    {"copy", OpCategory::kOther, false},
    {"unload", OpCategory::kOther, false},
    {"vacuum", OpCategory::kOther, false},
    {"analyze", OpCategory::kOther, false},
    {"other", OpCategory::kOther, false},
}};

static_assert(kOpTable.size() == kOpCount);

const std::unordered_map<std::string_view, OpType>& name_index() {
    static const auto* index = [] {
        auto* m = new std::unordered_map<std::string_view, OpType>();
        for (int i = 0; i < kOpCount; ++i) m->emplace(kOpTable[i].name, static_cast<OpType>(i));
        return m;
    }();
    return *index;
}

bool finite_nonneg(double v) { return std::isfinite(v) && v >= 0.0; }

void validate_node(const PlanNode& node, const std::string& path) {
    if (!finite_nonneg(node.est_cost))
        throw ValidationError(path + ".est_cost: must be finite and >= 0");
    if (!finite_nonneg(node.est_cardinality))
        throw ValidationError(path + ".est_cardinality: must be finite and >= 0");
    const bool base = op_is_base_table(node.op);
    const bool has_format = node.table_format != TableFormat::kNull;
    if (base) {
        if (!has_format)
            throw ValidationError(path + ".table_format: required for base-table operator '" +
                                  std::string(op_name(node.op)) + "'");
        if (!node.table_rows.has_value())
            throw ValidationError(path + ".table_rows: required for base-table operator '" +
                                  std::string(op_name(node.op)) + "'");
        if (!finite_nonneg(*node.table_rows))
            throw ValidationError(path + ".table_rows: must be finite and >= 0");
    } else if (node.has_table_fields()) {
        throw ValidationError(path + ".table_format: operator '" + std::string(op_name(node.op)) +
                              "' does not access a base table; table fields must be null");
    }
    for (std::size_t i = 0; i < node.children.size(); ++i) {
        validate_node(node.children[i], path + ".children[" + std::to_string(i) + "]");
    }
}

}  // namespace

std::string_view op_name(OpType op) { return kOpTable[static_cast<int>(op)].name; }

OpType op_from_name(std::string_view name) {
    auto it = name_index().find(name);
    return it == name_index().end() ? OpType::kOther : it->second;
}

OpCategory op_category(OpType op) { return kOpTable[static_cast<int>(op)].category; }

bool op_is_base_table(OpType op) { return kOpTable[static_cast<int>(op)].base_table; }

std::string_view table_format_name(TableFormat f) {
    switch (f) {
        case TableFormat::kParquet: return "parquet";
        case TableFormat::kOpenCsv: return "opencsv";
        case TableFormat::kText: return "text";
        case TableFormat::kLocal: return "local";
        case TableFormat::kNull: return "null";
    }
    return "null";
}

std::optional<TableFormat> table_format_from_name(std::string_view name) {
    if (name == "parquet") return TableFormat::kParquet;
    if (name == "opencsv") return TableFormat::kOpenCsv;
    if (name == "text") return TableFormat::kText;
    if (name == "local") return TableFormat::kLocal;
    if (name == "null") return TableFormat::kNull;
    return std::nullopt;
}

std::string_view query_type_name(QueryType t) {
    switch (t) {
        case QueryType::kSelect: return "select";
        case QueryType::kInsert: return "insert";
        case QueryType::kUpdate: return "update";
        case QueryType::kDelete: return "delete";
    }
    return "select";
}

std::optional<QueryType> query_type_from_name(std::string_view name) {
    if (name == "select") return QueryType::kSelect;
    if (name == "insert") return QueryType::kInsert;
    if (name == "update") return QueryType::kUpdate;
    if (name == "delete") return QueryType::kDelete;
    return std::nullopt;
}

void validate_plan(const PlanNode& root, const std::string& path_prefix) {
    validate_node(root, path_prefix);
}

std::size_t plan_node_count(const PlanNode& root) {
    std::size_t n = 1;
    for (const auto& c : root.children) n += plan_node_count(c);
    return n;
}

std::size_t plan_depth(const PlanNode& root) {
    std::size_t deepest = 0;
    for (const auto& c : root.children) deepest = std::max(deepest, plan_depth(c));
    return deepest + 1;
}

double plan_total_cost(const PlanNode& root) {
    double total = root.est_cost;
    for (const auto& c : root.children) total += plan_total_cost(c);
    return total;
}

double plan_total_cardinality(const PlanNode& root) {
    double total = root.est_cardinality;
    for (const auto& c : root.children) total += plan_total_cardinality(c);
    return total;
}

}  // namespace qpred
