#include "qpred/plan_log.hpp"

#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include <json.hpp>

#include "qpred/errors.hpp"

namespace qpred {
namespace {

using nlohmann::json;

// Parse-time failure tied to a field path; converted to a ParseIssue per line.
struct FieldError {
    std::string path;
    std::string message;
};

const json& require(const json& obj, const char* key, const std::string& path) {
    if (!obj.is_object()) throw FieldError{path, "expected an object"};
    auto it = obj.find(key);
    if (it == obj.end()) throw FieldError{path + "." + key, "missing field"};
    return *it;
}

double require_number(const json& obj, const char* key, const std::string& path) {
    const json& v = require(obj, key, path);
    if (!v.is_number()) throw FieldError{path + "." + key, "expected a number"};
    return v.get<double>();
}

double require_nonneg(const json& obj, const char* key, const std::string& path,
                      const char* display_name = nullptr) {
    double d = require_number(obj, key, path);
    if (!(std::isfinite(d) && d >= 0.0)) {
        std::string what = display_name ? std::string(display_name) : std::string(key);
        throw FieldError{path + "." + key, what + " must be finite and >= 0"};
    }
    return d;
}

std::string require_string(const json& obj, const char* key, const std::string& path) {
    const json& v = require(obj, key, path);
    if (!v.is_string()) throw FieldError{path + "." + key, "expected a string"};
    return v.get<std::string>();
}

PlanNode parse_plan_node(const json& j, const std::string& path) {
    PlanNode node;
    node.op = op_from_name(require_string(j, "op", path));
    node.est_cost = require_nonneg(j, "cost", path, "est_cost");
    node.est_cardinality = require_nonneg(j, "card", path, "est_cardinality");
    double width = require_nonneg(j, "width", path, "tuple_width");
    node.tuple_width = static_cast<std::uint32_t>(width);
    const bool base = op_is_base_table(node.op);
    if (j.contains("format")) {
        auto fmt = table_format_from_name(j["format"].get<std::string>());
        if (!fmt) throw FieldError{path + ".format", "unknown table format"};
        node.table_format = *fmt;
    }
    if (j.contains("rows")) {
        if (!j["rows"].is_number()) throw FieldError{path + ".rows", "expected a number"};
        double rows = j["rows"].get<double>();
        if (!(std::isfinite(rows) && rows >= 0.0)) throw FieldError{path + ".rows", "must be finite and >= 0"};
        node.table_rows = rows;
    }
    if (base) {
        if (node.table_format == TableFormat::kNull)
            throw FieldError{path + ".format", "required for base-table operator"};
        if (!node.table_rows) throw FieldError{path + ".rows", "required for base-table operator"};
    } else if (node.has_table_fields()) {
        throw FieldError{path + ".format", "table fields present on a non-base-table operator"};
    }
    if (j.contains("children")) {
        const json& ch = j["children"];
        if (!ch.is_array()) throw FieldError{path + ".children", "expected an array"};
        for (std::size_t i = 0; i < ch.size(); ++i) {
            node.children.push_back(parse_plan_node(ch[i], path + ".children[" + std::to_string(i) + "]"));
        }
    }
    return node;
}

PlanRecord parse_record(const json& j) {
    PlanRecord r;
    const json& qid = require(j, "query_id", "");
    if (!qid.is_number_integer()) throw FieldError{"query_id", "expected an integer"};
    r.query_id = qid.get<std::int64_t>();
    r.arrival_ms = require_nonneg(j, "arrival_ms", "");
    auto qt = query_type_from_name(require_string(j, "query_type", ""));
    if (!qt) throw FieldError{"query_type", "unknown query type"};
    r.query_type = *qt;

    const json& sys = require(j, "system", "");
    auto inst = instance_type_from_name(require_string(sys, "instance_type", "system"));
    if (!inst) throw FieldError{"system.instance_type", "unknown instance type"};
    r.system.instance_type = *inst;
    r.system.node_count = static_cast<int>(require_number(sys, "node_count", "system"));
    r.system.memory_gb = require_number(sys, "memory_gb", "system");
    r.system.concurrent_queries = static_cast<int>(require_number(sys, "concurrent", "system"));

    r.plan = parse_plan_node(require(j, "plan", ""), "plan");
    r.system.plan_summary = summarize_plan(r.plan);
    try {
        validate_context(r.system);
    } catch (const ValidationError& e) {
        throw FieldError{"system", e.what()};
    }

    if (j.contains("observed_ms")) {
        if (!j["observed_ms"].is_number()) throw FieldError{"observed_ms", "expected a number"};
        double obs = j["observed_ms"].get<double>();
        if (!(std::isfinite(obs) && obs >= 0.0)) throw FieldError{"observed_ms", "must be finite and >= 0"};
        r.observed_ms = obs;
    }
    return r;
}

json plan_node_to_json(const PlanNode& n) {
    json j{{"op", op_name(n.op)}, {"cost", n.est_cost}, {"card", n.est_cardinality}, {"width", n.tuple_width}};
    if (op_is_base_table(n.op)) {
        j["format"] = table_format_name(n.table_format);
        j["rows"] = n.table_rows.value_or(0.0);
    }
    if (!n.children.empty()) {
        json ch = json::array();
        for (const auto& c : n.children) ch.push_back(plan_node_to_json(c));
        j["children"] = std::move(ch);
    }
    return j;
}

}  // namespace

ParseResult parse_plan_log(std::istream& in) {
    ParseResult result;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        json j = json::parse(line, nullptr, false);
        if (j.is_discarded()) {
            result.issues.push_back({line_no, "", "invalid JSON"});
            continue;
        }
        try {
            result.records.push_back(parse_record(j));
        } catch (const FieldError& e) {
            result.issues.push_back({line_no, e.path, e.message});
        }
    }
    return result;
}

ParseResult parse_plan_log_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open plan log: " + path);
    return parse_plan_log(in);
}

std::string plan_record_to_json_line(const PlanRecord& r) {
    json j{{"query_id", r.query_id},
           {"arrival_ms", r.arrival_ms},
           {"query_type", query_type_name(r.query_type)},
           {"system",
            {{"instance_type", instance_type_name(r.system.instance_type)},
             {"node_count", r.system.node_count},
             {"memory_gb", r.system.memory_gb},
             {"concurrent", r.system.concurrent_queries}}},
           {"plan", plan_node_to_json(r.plan)}};
    if (r.observed_ms) j["observed_ms"] = *r.observed_ms;
    return j.dump();
}

void write_plan_log(std::ostream& out, const std::vector<PlanRecord>& records) {
    for (const auto& r : records) out << plan_record_to_json_line(r) << '\n';
}

}  // namespace qpred
