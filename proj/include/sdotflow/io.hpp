#pragma once

#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "sdotflow/distributed.hpp"
#include "sdotflow/dual_ascent.hpp"
#include "sdotflow/oracle.hpp"
#include "sdotflow/scenario.hpp"

namespace sdotflow {

using Json = nlohmann::ordered_json;

// Scenario files. Unknown keys are rejected with ConfigError. `base_dir`
// resolves a relative "graph_file".
Json scenario_to_json(const Scenario& scenario);
Scenario scenario_from_json(const Json& doc, const std::filesystem::path& base_dir = {});
Scenario read_scenario(const std::filesystem::path& path);
// When the cost references a graph_file, the graph is written next to the
// scenario under that name.
void write_scenario(const Scenario& scenario, const std::filesystem::path& path);

// Consumer graph: {"edges": [{"u": 3, "v": {"endpoint": 4}, "weight": 1.5}]}.
Json consumer_graph_to_json(const ConsumerGraph& graph);
ConsumerGraph consumer_graph_from_json(const Json& doc);
ConsumerGraph read_consumer_graph(const std::filesystem::path& path);
void write_consumer_graph(const ConsumerGraph& graph, const std::filesystem::path& path);

// CSV exports. Doubles use 17 significant digits.
void write_partition_csv(std::ostream& out, const Partition& partition, const DemandMeasure& measure);
void write_flows_csv(std::ostream& out, const Network& network, const FlowState& flows);
// dual_value is left blank on iterations where it was not evaluated.
void write_trace_csv(std::ostream& out, const std::vector<TraceRecord>& trace);

Json report_to_json(const SolveReport& report, const std::string& mode,
                    const std::optional<Certificate>& certificate = std::nullopt);
// Restores the fields written by report_to_json (trace, psi, flows,
// partition, objective values).
SolveReport report_from_json(const Json& doc);
SolveReport read_report(const std::filesystem::path& path);

Json round_log_to_json(const RoundLog& log);
void write_round_logs(std::ostream& out, const std::vector<RoundLog>& logs);

Json gap_report_to_json(const GapReport& gap, const OracleResult& oracle);

// Whole-file helpers; IoError on failure.
Json read_json_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, const std::string& text);

std::string format_double(double v);

}  // namespace sdotflow
