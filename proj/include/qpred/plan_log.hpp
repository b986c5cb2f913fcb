#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "qpred/plan.hpp"
#include "qpred/plan_graph.hpp"

namespace qpred {

// One line of a plan-log file (UTF-8 JSON lines).
struct PlanRecord {
    std::int64_t query_id = 0;
    double arrival_ms = 0.0;
    QueryType query_type = QueryType::kSelect;
    SystemContext system;
    PlanNode plan;
    std::optional<double> observed_ms;
};

struct ParseIssue {
    std::size_t line = 0;  // 1-based
    std::string path;      // field path, e.g. "plan.children[1].est_cost"
    std::string message;
};

struct ParseResult {
    std::vector<PlanRecord> records;
    std::vector<ParseIssue> issues;
};

// Malformed lines become issues, not crashes; valid lines still parse.
ParseResult parse_plan_log(std::istream& in);
ParseResult parse_plan_log_file(const std::string& path);

std::string plan_record_to_json_line(const PlanRecord& r);
void write_plan_log(std::ostream& out, const std::vector<PlanRecord>& records);

}  // namespace qpred
