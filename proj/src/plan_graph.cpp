#include "qpred/plan_graph.hpp"

#include <cmath>

#include <json.hpp>

#include "qpred/errors.hpp"

namespace qpred {
namespace {

void collect(const PlanNode& node, int parent, PlanGraph& g) {
    const int index = static_cast<int>(g.nodes.size());
    GraphNode gn;
    gn.op = node.op;
    gn.est_cost = node.est_cost;
    gn.est_cardinality = node.est_cardinality;
    gn.tuple_width = static_cast<double>(node.tuple_width);
    if (op_is_base_table(node.op)) {
        gn.table_format = node.table_format;
        gn.table_rows = node.table_rows.value_or(0.0);
        gn.table_null = false;
    }
    g.nodes.push_back(gn);
    if (parent >= 0) g.edges.emplace_back(index, parent);
    for (const auto& c : node.children) collect(c, index, g);
}

}  // namespace

Eigen::VectorXd PlanGraph::dense_row(int i) const {
    const GraphNode& n = nodes.at(static_cast<std::size_t>(i));
    Eigen::VectorXd row = Eigen::VectorXd::Zero(kGraphFeatureDim);
    row[static_cast<int>(n.op)] = 1.0;
    row[kOpCount + 0] = n.est_cost;
    row[kOpCount + 1] = n.est_cardinality;
    row[kOpCount + 2] = n.tuple_width;
    if (!n.table_null && n.table_format != TableFormat::kNull) {
        row[kOpCount + 3 + static_cast<int>(n.table_format)] = 1.0;
    }
    row[kOpCount + 3 + kTableFormatCount] = n.table_null ? 0.0 : n.table_rows;
    row[kOpCount + 4 + kTableFormatCount] = n.table_null ? 1.0 : 0.0;
    return row;
}

Eigen::MatrixXd PlanGraph::dense() const {
    Eigen::MatrixXd m(static_cast<Eigen::Index>(nodes.size()), kGraphFeatureDim);
    for (int i = 0; i < static_cast<int>(nodes.size()); ++i) m.row(i) = dense_row(i);
    return m;
}

std::vector<std::vector<int>> PlanGraph::children_of() const {
    std::vector<std::vector<int>> ch(nodes.size());
    for (const auto& [child, parent] : edges) ch[static_cast<std::size_t>(parent)].push_back(child);
    return ch;
}

PlanGraph featurize_global(const PlanNode& tree) {
    PlanGraph g;
    g.nodes.reserve(plan_node_count(tree));
    collect(tree, -1, g);
    g.root_index = 0;
    return g;
}

std::string plan_graph_serialize(const PlanGraph& g) {
    nlohmann::json nodes = nlohmann::json::array();
    for (const auto& n : g.nodes) {
        nodes.push_back({{"op", op_name(n.op)},
                         {"cost", n.est_cost},
                         {"card", n.est_cardinality},
                         {"width", n.tuple_width},
                         {"format", table_format_name(n.table_format)},
                         {"rows", n.table_rows},
                         {"table_null", n.table_null}});
    }
    nlohmann::json edges = nlohmann::json::array();
    for (const auto& [c, p] : g.edges) edges.push_back({c, p});
    nlohmann::json j{{"version", 1}, {"nodes", nodes}, {"edges", edges}, {"root_index", g.root_index}};
    return j.dump();
}

PlanGraph plan_graph_deserialize(const std::string& text) {
    nlohmann::json j = nlohmann::json::parse(text, nullptr, false);
    if (j.is_discarded()) throw SchemaError("plan graph: invalid JSON");
    if (!j.contains("version") || j["version"].get<int>() != 1)
        throw SchemaError("plan graph: unsupported version");
    PlanGraph g;
    for (const auto& n : j.at("nodes")) {
        GraphNode gn;
        gn.op = op_from_name(n.at("op").get<std::string>());
        gn.est_cost = n.at("cost").get<double>();
        gn.est_cardinality = n.at("card").get<double>();
        gn.tuple_width = n.at("width").get<double>();
        auto fmt = table_format_from_name(n.at("format").get<std::string>());
        if (!fmt) throw SchemaError("plan graph: unknown table format");
        gn.table_format = *fmt;
        gn.table_rows = n.at("rows").get<double>();
        gn.table_null = n.at("table_null").get<bool>();
        g.nodes.push_back(gn);
    }
    for (const auto& e : j.at("edges")) g.edges.emplace_back(e.at(0).get<int>(), e.at(1).get<int>());
    g.root_index = j.at("root_index").get<int>();
    return g;
}

std::string_view instance_type_name(InstanceType t) {
    switch (t) {
        case InstanceType::kDc2Large: return "dc2.large";
        case InstanceType::kDc2_8xlarge: return "dc2.8xlarge";
        case InstanceType::kRa3XlPlus: return "ra3.xlplus";
        case InstanceType::kRa3_4xlarge: return "ra3.4xlarge";
        case InstanceType::kRa3_16xlarge: return "ra3.16xlarge";
        case InstanceType::kServerless: return "serverless";
    }
    return "ra3.4xlarge";
}

std::optional<InstanceType> instance_type_from_name(std::string_view name) {
    for (int i = 0; i < kInstanceTypeCount; ++i) {
        auto t = static_cast<InstanceType>(i);
        if (instance_type_name(t) == name) return t;
    }
    return std::nullopt;
}

PlanSummary summarize_plan(const PlanNode& tree) {
    PlanSummary s;
    s.node_count = static_cast<double>(plan_node_count(tree));
    s.depth = static_cast<double>(plan_depth(tree));
    s.total_cost = plan_total_cost(tree);
    s.total_cardinality = plan_total_cardinality(tree);
    return s;
}

Eigen::VectorXd SystemContext::vector() const {
    Eigen::VectorXd v = Eigen::VectorXd::Zero(kContextDim);
    v[static_cast<int>(instance_type)] = 1.0;
    int i = kContextNumericOffset;
    v[i++] = static_cast<double>(node_count);
    v[i++] = memory_gb;
    v[i++] = static_cast<double>(concurrent_queries);
    v[i++] = plan_summary.node_count;
    v[i++] = plan_summary.depth;
    v[i++] = plan_summary.total_cost;
    v[i++] = plan_summary.total_cardinality;
    return v;
}

void validate_context(const SystemContext& ctx, const std::string& path_prefix) {
    if (ctx.node_count < 1) throw ValidationError(path_prefix + ".node_count: must be >= 1");
    if (!(std::isfinite(ctx.memory_gb) && ctx.memory_gb > 0.0))
        throw ValidationError(path_prefix + ".memory_gb: must be finite and > 0");
    if (ctx.concurrent_queries < 0)
        throw ValidationError(path_prefix + ".concurrent: must be >= 0");
}

}  // namespace qpred
