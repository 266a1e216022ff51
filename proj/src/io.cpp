#include "sdotflow/io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <initializer_list>
#include <sstream>

#include "sdotflow/errors.hpp"

namespace sdotflow {

namespace {

void check_keys(const Json& obj, std::initializer_list<const char*> allowed, const std::string& where) {
  if (!obj.is_object()) throw ConfigError(where + ": expected an object");
  for (const auto& item : obj.items()) {
    const bool known = std::any_of(allowed.begin(), allowed.end(),
                                   [&](const char* k) { return item.key() == k; });
    if (!known) throw ConfigError(where + ": unknown key \"" + item.key() + "\"");
  }
}

template <typename T>
T get(const Json& obj, const char* key, const std::string& where) {
  if (!obj.contains(key)) throw ConfigError(where + ": missing \"" + key + "\"");
  try {
    return obj.at(key).get<T>();
  } catch (const Json::exception& e) {
    throw ConfigError(where + ": bad \"" + key + "\": " + e.what());
  }
}

template <typename T>
T get_or(const Json& obj, const char* key, T fallback, const std::string& where) {
  return obj.contains(key) ? get<T>(obj, key, where) : fallback;
}

Json vertex_to_json(const GraphVertex& v) {
  if (v.kind == GraphVertex::Kind::point) return v.id;
  return Json{{"endpoint", v.id}};
}

GraphVertex vertex_from_json(const Json& j, const std::string& where) {
  if (j.is_number_integer()) return {GraphVertex::Kind::point, j.get<int>()};
  if (j.is_object()) {
    check_keys(j, {"endpoint"}, where);
    return {GraphVertex::Kind::endpoint, get<int>(j, "endpoint", where)};
  }
  throw ConfigError(where + ": vertex must be a point id or {\"endpoint\": id}");
}

Json optional_number(const std::optional<double>& v) {
  if (v && std::isfinite(*v)) return *v;
  return nullptr;
}

Termination termination_from(const std::string& name) {
  if (name == "epsilon_reached") return Termination::epsilon_reached;
  if (name == "max_iterations") return Termination::max_iterations;
  throw ConfigError("report: unknown termination \"" + name + "\"");
}

}  // namespace

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

Json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  try {
    return Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << text;
  if (!out) throw IoError("write failed for " + path.string());
}

Json consumer_graph_to_json(const ConsumerGraph& graph) {
  Json edges = Json::array();
  for (const GraphEdge& e : graph.edges) {
    edges.push_back(Json{{"u", vertex_to_json(e.u)}, {"v", vertex_to_json(e.v)}, {"weight", e.weight}});
  }
  return Json{{"edges", edges}};
}

ConsumerGraph consumer_graph_from_json(const Json& doc) {
  check_keys(doc, {"edges"}, "consumer graph");
  const Json& edges = doc.contains("edges") ? doc["edges"] : Json::array();
  if (!edges.is_array()) throw ConfigError("consumer graph: \"edges\" must be an array");
  ConsumerGraph graph;
  for (std::size_t k = 0; k < edges.size(); ++k) {
    const std::string where = "consumer graph edge " + std::to_string(k);
    const Json& e = edges[k];
    check_keys(e, {"u", "v", "weight"}, where);
    if (!e.contains("u") || !e.contains("v")) throw ConfigError(where + ": missing endpoint vertex");
    graph.edges.push_back(GraphEdge{vertex_from_json(e["u"], where), vertex_from_json(e["v"], where),
                                    get<double>(e, "weight", where)});
  }
  return graph;
}

ConsumerGraph read_consumer_graph(const std::filesystem::path& path) {
  return consumer_graph_from_json(read_json_file(path));
}

void write_consumer_graph(const ConsumerGraph& graph, const std::filesystem::path& path) {
  write_text_file(path, consumer_graph_to_json(graph).dump(1) + "\n");
}

Json scenario_to_json(const Scenario& s) {
  Json doc;
  doc["dimension"] = s.dimension;
  doc["balance_tolerance"] = s.balance_tolerance;

  Json points = Json::array();
  for (const Point& p : s.measure.points()) {
    points.push_back(Json{{"id", p.id}, {"coords", p.coords}, {"mass", s.measure.mass(p.id)}});
  }
  doc["points"] = points;

  Json nodes = Json::array();
  for (const Node& n : s.network.nodes()) {
    Json node{{"id", n.id}, {"supply", n.supply}, {"endpoint", n.is_endpoint}};
    if (n.position) node["position"] = *n.position;
    nodes.push_back(node);
  }
  doc["nodes"] = nodes;

  Json arcs = Json::array();
  for (const Arc& a : s.network.arcs()) {
    const auto* q = std::get_if<QuadraticArcCost>(&a.cost);
    if (!q) throw ConfigError("generic arc costs cannot be serialized");
    arcs.push_back(Json{{"tail", a.tail},
                        {"head", a.head},
                        {"lower", a.lower},
                        {"upper", a.upper},
                        {"cost", Json{{"kind", "quadratic"}, {"coeff", q->coefficient}}}});
  }
  doc["arcs"] = arcs;

  Json cost{{"kind", cost_kind_name(s.assignment_cost)}};
  if (const auto* g = std::get_if<GeodesicResistanceCost>(&s.assignment_cost)) {
    if (g->graph_file.empty()) {
      cost["graph"] = consumer_graph_to_json(g->graph);
    } else {
      cost["graph_file"] = g->graph_file;
    }
  } else if (const auto* t = std::get_if<TableCost>(&s.assignment_cost)) {
    Json rows = Json::array();
    for (std::size_t p = 0; p < t->table.points(); ++p) {
      Json row = Json::array();
      for (std::size_t e = 0; e < t->table.endpoints(); ++e) row.push_back(optional_number(t->table.at(p, e)));
      rows.push_back(row);
    }
    cost["values"] = rows;
  }
  doc["assignment_cost"] = cost;
  return doc;
}

Scenario scenario_from_json(const Json& doc, const std::filesystem::path& base_dir) {
  check_keys(doc, {"dimension", "balance_tolerance", "points", "nodes", "arcs", "assignment_cost"},
             "scenario");
  Scenario s;
  s.dimension = get_or<int>(doc, "dimension", 2, "scenario");
  s.balance_tolerance = get_or<double>(doc, "balance_tolerance", kDefaultBalanceTolerance, "scenario");

  std::vector<Point> points;
  std::vector<double> masses;
  const Json points_json = get<Json>(doc, "points", "scenario");
  if (!points_json.is_array()) throw ConfigError("scenario: \"points\" must be an array");
  for (std::size_t k = 0; k < points_json.size(); ++k) {
    const std::string where = "point " + std::to_string(k);
    const Json& p = points_json[k];
    check_keys(p, {"id", "coords", "mass"}, where);
    points.push_back(Point{get<int>(p, "id", where), get<std::vector<double>>(p, "coords", where)});
    masses.push_back(get<double>(p, "mass", where));
  }

  std::vector<Node> nodes;
  const Json nodes_json = get<Json>(doc, "nodes", "scenario");
  if (!nodes_json.is_array()) throw ConfigError("scenario: \"nodes\" must be an array");
  for (std::size_t k = 0; k < nodes_json.size(); ++k) {
    const std::string where = "node " + std::to_string(k);
    const Json& n = nodes_json[k];
    check_keys(n, {"id", "supply", "endpoint", "position"}, where);
    Node node;
    node.id = get<int>(n, "id", where);
    node.supply = get<double>(n, "supply", where);
    node.is_endpoint = get_or<bool>(n, "endpoint", false, where);
    if (n.contains("position")) node.position = get<std::vector<double>>(n, "position", where);
    nodes.push_back(std::move(node));
  }

  std::vector<Arc> arcs;
  const Json arcs_json = get_or<Json>(doc, "arcs", Json::array(), "scenario");
  if (!arcs_json.is_array()) throw ConfigError("scenario: \"arcs\" must be an array");
  for (std::size_t k = 0; k < arcs_json.size(); ++k) {
    const std::string where = "arc " + std::to_string(k);
    const Json& a = arcs_json[k];
    check_keys(a, {"tail", "head", "lower", "upper", "cost"}, where);
    Arc arc;
    arc.tail = get<int>(a, "tail", where);
    arc.head = get<int>(a, "head", where);
    arc.lower = get<double>(a, "lower", where);
    arc.upper = get<double>(a, "upper", where);
    const Json cost = get<Json>(a, "cost", where);
    check_keys(cost, {"kind", "coeff"}, where + " cost");
    const auto kind = get<std::string>(cost, "kind", where + " cost");
    if (kind != "quadratic") throw ConfigError(where + ": unsupported arc cost kind \"" + kind + "\"");
    arc.cost = QuadraticArcCost{get<double>(cost, "coeff", where + " cost")};
    arcs.push_back(std::move(arc));
  }

  s.measure = DemandMeasure(std::move(points), std::move(masses));
  s.network = Network(std::move(nodes), std::move(arcs));

  const Json cost = get_or<Json>(doc, "assignment_cost", Json{{"kind", "euclidean"}}, "scenario");
  check_keys(cost, {"kind", "graph", "graph_file", "values"}, "assignment_cost");
  const auto kind = get<std::string>(cost, "kind", "assignment_cost");
  if (kind == "euclidean") {
    s.assignment_cost = EuclideanCost{};
  } else if (kind == "squared_euclidean") {
    s.assignment_cost = SquaredEuclideanCost{};
  } else if (kind == "geodesic_resistance") {
    GeodesicResistanceCost g;
    if (cost.contains("graph") == cost.contains("graph_file")) {
      throw ConfigError("assignment_cost: give exactly one of \"graph\" and \"graph_file\"");
    }
    if (cost.contains("graph")) {
      g.graph = consumer_graph_from_json(cost["graph"]);
    } else {
      g.graph_file = get<std::string>(cost, "graph_file", "assignment_cost");
      g.graph = read_consumer_graph(base_dir / g.graph_file);
    }
    s.assignment_cost = std::move(g);
  } else if (kind == "table") {
    const Json rows = get<Json>(cost, "values", "assignment_cost");
    if (!rows.is_array()) throw ConfigError("assignment_cost: \"values\" must be an array of rows");
    const std::size_t width = rows.empty() ? 0 : rows[0].size();
    CostTable table(rows.size(), width);
    for (std::size_t p = 0; p < rows.size(); ++p) {
      if (!rows[p].is_array() || rows[p].size() != width) {
        throw ConfigError("assignment_cost: row " + std::to_string(p) + " has the wrong length");
      }
      for (std::size_t e = 0; e < width; ++e) {
        const Json& v = rows[p][e];
        if (v.is_null()) {
          table.forbid(p, e);
        } else if (v.is_number()) {
          table.set(p, e, v.get<double>());
        } else {
          throw ConfigError("assignment_cost: entries must be numbers or null");
        }
      }
    }
    s.assignment_cost = TableCost{std::move(table)};
  } else {
    throw ConfigError("assignment_cost: unknown kind \"" + kind + "\"");
  }
  return s;
}

Scenario read_scenario(const std::filesystem::path& path) {
  return scenario_from_json(read_json_file(path), path.parent_path());
}

void write_scenario(const Scenario& scenario, const std::filesystem::path& path) {
  if (const auto* g = std::get_if<GeodesicResistanceCost>(&scenario.assignment_cost)) {
    if (!g->graph_file.empty()) write_consumer_graph(g->graph, path.parent_path() / g->graph_file);
  }
  write_text_file(path, scenario_to_json(scenario).dump(1) + "\n");
}

void write_partition_csv(std::ostream& out, const Partition& partition, const DemandMeasure& measure) {
  out << "point_id,endpoint_id,mass\n";
  for (std::size_t p = 0; p < partition.assignment.size(); ++p) {
    out << p << ',' << partition.assignment[p] << ','
        << format_double(measure.mass(static_cast<PointId>(p))) << '\n';
  }
}

void write_flows_csv(std::ostream& out, const Network& network, const FlowState& flows) {
  out << "arc_tail,arc_head,flow\n";
  for (std::size_t a = 0; a < flows.flows.size(); ++a) {
    const Arc& arc = network.arc(static_cast<ArcId>(a));
    out << arc.tail << ',' << arc.head << ',' << format_double(flows.flows[a]) << '\n';
  }
}

void write_trace_csv(std::ostream& out, const std::vector<TraceRecord>& trace) {
  out << "k,gamma,max_abs_g,dual_value\n";
  for (const TraceRecord& r : trace) {
    out << r.k << ',' << format_double(r.gamma) << ',' << format_double(r.max_abs_g) << ',';
    if (r.dual_value) out << format_double(*r.dual_value);
    out << '\n';
  }
}

Json report_to_json(const SolveReport& report, const std::string& mode,
                    const std::optional<Certificate>& certificate) {
  Json doc;
  doc["mode"] = mode;
  doc["termination"] = termination_name(report.termination);
  doc["iterations"] = report.iterations;
  doc["dual_value"] = report.dual_value;
  doc["primal_value"] = report.primal_value;
  doc["gap"] = report.gap;
  doc["final_max_abs_g"] = report.final_max_abs_g;
  doc["assumes_unique_arc_minimizers"] = report.assumes_unique_arc_minimizers;
  doc["psi"] = report.psi_final.psi;
  doc["flows"] = report.flows.flows;
  doc["partition"] = Json{{"endpoints", report.partition.endpoints},
                          {"cell_masses", report.partition.cell_masses},
                          {"assignment", report.partition.assignment}};
  if (certificate) {
    auto max_of = [](const std::vector<double>& v, bool absolute) {
      double m = 0.0;
      for (double x : v) m = std::max(m, absolute ? std::fabs(x) : x);
      return m;
    };
    doc["certificate"] = Json{{"max_residual", certificate->max_residual},
                              {"max_arc_residual", max_of(certificate->arc_residuals, false)},
                              {"max_point_residual", max_of(certificate->point_residuals, false)},
                              {"max_balance_residual", max_of(certificate->flow_balance_residuals, true)}};
  }
  Json trace = Json::array();
  for (const TraceRecord& r : report.trace) {
    trace.push_back(Json{{"k", r.k},
                         {"gamma", r.gamma},
                         {"max_abs_g", r.max_abs_g},
                         {"dual_value", optional_number(r.dual_value)}});
  }
  doc["trace"] = trace;
  return doc;
}

SolveReport report_from_json(const Json& doc) {
  const std::string where = "report";
  if (!doc.is_object()) throw ConfigError("report: expected an object");
  SolveReport r;
  r.termination = termination_from(get<std::string>(doc, "termination", where));
  r.iterations = get<int>(doc, "iterations", where);
  r.dual_value = get<double>(doc, "dual_value", where);
  r.primal_value = get<double>(doc, "primal_value", where);
  r.gap = get<double>(doc, "gap", where);
  r.final_max_abs_g = get_or<double>(doc, "final_max_abs_g", 0.0, where);
  r.assumes_unique_arc_minimizers = get_or<bool>(doc, "assumes_unique_arc_minimizers", false, where);
  r.psi_final.psi = get<std::vector<double>>(doc, "psi", where);
  r.psi_final.iteration = r.iterations;
  r.flows.flows = get<std::vector<double>>(doc, "flows", where);
  if (doc.contains("partition")) {
    const Json& p = doc["partition"];
    r.partition.endpoints = get<std::vector<NodeId>>(p, "endpoints", where);
    r.partition.cell_masses = get<std::vector<double>>(p, "cell_masses", where);
    r.partition.assignment = get<std::vector<NodeId>>(p, "assignment", where);
  }
  for (const Json& t : get_or<Json>(doc, "trace", Json::array(), where)) {
    TraceRecord rec;
    rec.k = get<int>(t, "k", where);
    rec.gamma = get<double>(t, "gamma", where);
    rec.max_abs_g = get<double>(t, "max_abs_g", where);
    if (t.contains("dual_value") && !t["dual_value"].is_null()) rec.dual_value = t["dual_value"].get<double>();
    r.trace.push_back(rec);
  }
  return r;
}

SolveReport read_report(const std::filesystem::path& path) {
  return report_from_json(read_json_file(path));
}

Json round_log_to_json(const RoundLog& log) {
  Json counts = Json::object();
  for (const auto& [kind, n] : log.messages_by_kind) counts[message_kind_name(kind)] = n;
  return Json{{"round", log.round},
              {"messages_delivered", log.messages_delivered},
              {"messages_by_kind", counts},
              {"psi", log.psi},
              {"gradient", log.gradient},
              {"all_ready", log.all_ready}};
}

void write_round_logs(std::ostream& out, const std::vector<RoundLog>& logs) {
  for (const RoundLog& log : logs) out << round_log_to_json(log).dump() << '\n';
}

Json gap_report_to_json(const GapReport& gap, const OracleResult& oracle) {
  return Json{{"passed", gap.passed},
              {"best_cost", gap.best_cost},
              {"dual_value", gap.dual_value},
              {"primal_value", gap.primal_value},
              {"dual_gap", gap.dual_gap},
              {"primal_gap", gap.primal_gap},
              {"tolerance", gap.tolerance},
              {"enumerated", oracle.enumerated},
              {"feasible", oracle.feasible},
              {"exact", oracle.exact},
              {"best_assignment", oracle.best_assignment},
              {"best_flows", oracle.best_flows.flows}};
}

}  // namespace sdotflow
