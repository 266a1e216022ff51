#include <doctest.h>

#include <filesystem>
#include <sstream>

#include "fixtures.hpp"
#include "sdotflow/errors.hpp"
#include "sdotflow/io.hpp"
#include "sdotflow/problem.hpp"

using namespace sdotflow;

namespace {

std::filesystem::path scratch(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / "sdotflow_io_tests";
  std::filesystem::create_directories(dir);
  return dir / name;
}

}  // namespace

TEST_CASE("scenario JSON round trip preserves everything") {
  SyntheticParams p;
  p.grid_n = 6;
  const Scenario s = generate_synthetic(p);
  const Json doc = scenario_to_json(s);
  const Scenario back = scenario_from_json(doc);
  CHECK(scenario_to_json(back).dump() == doc.dump());
  CHECK(back.measure.size() == 36);
  CHECK(back.measure.mass(7) == s.measure.mass(7));
  CHECK(std::get<QuadraticArcCost>(back.network.arc(2).cost).coefficient ==
        std::get<QuadraticArcCost>(s.network.arc(2).cost).coefficient);
}

TEST_CASE("table costs keep forbidden entries as null") {
  Scenario s = fixtures::two_node();
  s.measure = DemandMeasure({Point{0, {0.0}}, Point{1, {0.0}}}, {0.5, 0.5});
  s.network = Network({Node{0, 0.5, true, {}}, Node{1, 0.5, true, {}}}, {});
  CostTable t(2, 2);
  t.set(0, 0, 1.5);
  t.forbid(0, 1);
  t.set(1, 0, 2.0);
  t.set(1, 1, 3.0);
  s.assignment_cost = TableCost{t};
  const Json doc = scenario_to_json(s);
  CHECK(doc["assignment_cost"]["values"][0][1].is_null());
  const Scenario back = scenario_from_json(doc);
  CHECK(std::get<TableCost>(back.assignment_cost).table == t);
}

TEST_CASE("unknown keys and bad kinds are rejected") {
  Json doc = scenario_to_json(fixtures::two_node());
  Json extra = doc;
  extra["colour"] = "blue";
  CHECK_THROWS_AS(scenario_from_json(extra), ConfigError);
  Json bad_point = doc;
  bad_point["points"][0]["weight"] = 1;
  CHECK_THROWS_AS(scenario_from_json(bad_point), ConfigError);
  Json bad_arc = doc;
  bad_arc["arcs"][0]["cost"]["kind"] = "cubic";
  CHECK_THROWS_AS(scenario_from_json(bad_arc), ConfigError);
  Json bad_cost = doc;
  bad_cost["assignment_cost"] = Json{{"kind", "manhattan"}};
  CHECK_THROWS_AS(scenario_from_json(bad_cost), ConfigError);
  Json missing = doc;
  missing.erase("nodes");
  CHECK_THROWS_AS(scenario_from_json(missing), ConfigError);
}

TEST_CASE("imbalanced file loads but fails validation") {
  Json doc = scenario_to_json(fixtures::two_node());
  doc["nodes"][0]["supply"] = 0.5;
  const Scenario s = scenario_from_json(doc);
  const ValidationReport r = validate_scenario(s);
  REQUIRE(r.size() == 1);
  CHECK(r[0].code == "balance");
}

TEST_CASE("consumer graph JSON uses an endpoint marker") {
  ConsumerGraph g;
  g.edges = {{{GraphVertex::Kind::point, 0}, {GraphVertex::Kind::endpoint, 4}, 1.25},
             {{GraphVertex::Kind::point, 0}, {GraphVertex::Kind::point, 1}, 0.5}};
  const Json doc = consumer_graph_to_json(g);
  CHECK(doc["edges"][0]["v"]["endpoint"] == 4);
  const ConsumerGraph back = consumer_graph_from_json(doc);
  REQUIRE(back.edges.size() == 2);
  CHECK(back.edges[0].v == GraphVertex{GraphVertex::Kind::endpoint, 4});
  CHECK(back.edges[1].weight == 0.5);
  CHECK_THROWS_AS(consumer_graph_from_json(Json{{"edges", Json::array({Json{{"u", "x"}, {"v", 1}, {"weight", 1}}})}}),
                  ConfigError);
}

TEST_CASE("geodesic scenario with a separate graph file") {
  PowerNetworkParams p;
  p.n_consumers = 25;
  PowerNetwork net = generate_power_network(p);
  std::get<GeodesicResistanceCost>(net.scenario.assignment_cost).graph_file = "graph.json";
  const auto path = scratch("power.json");
  write_scenario(net.scenario, path);
  CHECK(std::filesystem::exists(path.parent_path() / "graph.json"));
  const Scenario back = read_scenario(path);
  const Problem a(net.scenario), b(back);
  CHECK(a.costs() == b.costs());
  CHECK_THROWS_AS(read_scenario(scratch("missing.json")), IoError);
}

TEST_CASE("CSV exports have the declared headers") {
  const Problem p(fixtures::two_node());
  const SolveReport r = solve(p);
  std::ostringstream part, flows, trace;
  write_partition_csv(part, r.partition, p.measure());
  write_flows_csv(flows, p.network(), r.flows);
  write_trace_csv(trace, {{0, 1.0, 0.5, 2.0}, {1, 0.5, 0.25, std::nullopt}});
  CHECK(part.str() == "point_id,endpoint_id,mass\n0,1,1\n");
  CHECK(flows.str() == "arc_tail,arc_head,flow\n0,1,1\n");
  CHECK(trace.str() == "k,gamma,max_abs_g,dual_value\n0,1,0.5,2\n1,0.5,0.25,\n");
}

TEST_CASE("report JSON round trip") {
  SyntheticParams sp;
  sp.grid_n = 8;
  const Problem p(generate_synthetic(sp));
  SolveOptions o;
  o.max_iterations = 30;
  const SolveReport r = solve(p, o);
  const Certificate c = certify(p, r.psi_final.psi, r.partition, r.flows);
  const Json doc = report_to_json(r, "centralized", c);
  CHECK(doc["certificate"]["max_residual"].get<double>() == c.max_residual);
  const SolveReport back = report_from_json(doc);
  CHECK(back.psi_final.psi == r.psi_final.psi);
  CHECK(back.flows.flows == r.flows.flows);
  CHECK(back.partition.assignment == r.partition.assignment);
  CHECK(back.dual_value == r.dual_value);
  CHECK(back.trace.size() == r.trace.size());
  CHECK(back.trace[1].dual_value.has_value() == r.trace[1].dual_value.has_value());
  CHECK(back.termination == r.termination);
  Json broken = doc;
  broken["termination"] = "sometimes";
  CHECK_THROWS_AS(report_from_json(broken), ConfigError);
}

TEST_CASE("round logs are one JSON object per line") {
  RoundLog a;
  a.round = 0;
  a.messages_delivered = 3;
  a.messages_by_kind = {{MessageKind::psi_share, 1}, {MessageKind::flow_share, 2}};
  a.psi = {1.0, 2.0};
  a.gradient = {0.5, -0.5};
  RoundLog b = a;
  b.round = 1;
  std::ostringstream out;
  write_round_logs(out, {a, b});
  std::istringstream in(out.str());
  std::string line;
  int lines = 0;
  while (std::getline(in, line)) {
    const Json j = Json::parse(line);
    CHECK(j["round"] == lines);
    CHECK(j["messages_by_kind"]["flow_share"] == 2);
    ++lines;
  }
  CHECK(lines == 2);
}

TEST_CASE("doubles print with round-trip precision") {
  CHECK(format_double(0.1) == "0.10000000000000001");
  CHECK(std::stod(format_double(1.0 / 3.0)) == 1.0 / 3.0);
}
