#include "sdotflow/costs.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>
#include <string>

#include "sdotflow/errors.hpp"

namespace sdotflow {

CostTable::CostTable(std::size_t points, std::size_t endpoints)
    : points_(points), endpoints_(endpoints), values_(points * endpoints, 0.0) {}

void CostTable::set(std::size_t point, std::size_t endpoint, double value) {
  if (!std::isfinite(value)) {
    throw ConfigError("cost table entry (" + std::to_string(point) + ", " +
                      std::to_string(endpoint) + ") is not finite; use forbid()");
  }
  values_[point * endpoints_ + endpoint] = value;
  if (!forbidden_.empty()) forbidden_[point * endpoints_ + endpoint] = 0;
}

void CostTable::forbid(std::size_t point, std::size_t endpoint) {
  if (forbidden_.empty()) forbidden_.assign(values_.size(), 0);
  forbidden_[point * endpoints_ + endpoint] = 1;
  values_[point * endpoints_ + endpoint] = 0.0;
}

std::optional<double> CostTable::at(std::size_t point, std::size_t endpoint) const {
  if (forbidden(point, endpoint)) return std::nullopt;
  return value(point, endpoint);
}

const char* cost_kind_name(const AssignmentCostSpec& spec) {
  struct Visitor {
    const char* operator()(const EuclideanCost&) const { return "euclidean"; }
    const char* operator()(const SquaredEuclideanCost&) const { return "squared_euclidean"; }
    const char* operator()(const GeodesicResistanceCost&) const { return "geodesic_resistance"; }
    const char* operator()(const TableCost&) const { return "table"; }
  };
  return std::visit(Visitor{}, spec);
}

namespace {

double squared_distance(std::span<const double> a, std::span<const double> b) {
  double sum = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    const double d = a[k] - b[k];
    sum += d * d;
  }
  return sum;
}

const std::vector<double>& require_position(const Network& network, NodeId endpoint,
                                            std::size_t dimension) {
  const Node& node = network.node(endpoint);
  if (!node.position) {
    throw ConfigError("node " + std::to_string(endpoint) +
                      " has no position but the assignment cost is positional");
  }
  if (node.position->size() != dimension) {
    throw ConfigError("node " + std::to_string(endpoint) + " position has dimension " +
                      std::to_string(node.position->size()) + ", expected " +
                      std::to_string(dimension));
  }
  return *node.position;
}

int endpoint_column(std::span<const NodeId> endpoints, NodeId id) {
  const auto it = std::lower_bound(endpoints.begin(), endpoints.end(), id);
  if (it == endpoints.end() || *it != id) return -1;
  return static_cast<int>(it - endpoints.begin());
}

struct Adjacency {
  std::vector<std::vector<std::pair<int, double>>> out;
};

Adjacency build_adjacency(const ConsumerGraph& graph, std::size_t point_count,
                          std::span<const NodeId> endpoints) {
  Adjacency adj;
  adj.out.resize(point_count + endpoints.size());
  auto vertex_index = [&](const GraphVertex& v) -> int {
    if (v.kind == GraphVertex::Kind::point) {
      if (v.id < 0 || static_cast<std::size_t>(v.id) >= point_count) {
        throw ConfigError("consumer graph references unknown point " + std::to_string(v.id));
      }
      return v.id;
    }
    const int column = endpoint_column(endpoints, v.id);
    if (column < 0) {
      throw ConfigError("consumer graph references node " + std::to_string(v.id) +
                        " which is not an endpoint");
    }
    return static_cast<int>(point_count) + column;
  };
  for (const GraphEdge& edge : graph.edges) {
    if (!(edge.weight >= 0.0) || !std::isfinite(edge.weight)) {
      throw ConfigError("consumer graph edge weight " + std::to_string(edge.weight) +
                        " is negative or not finite");
    }
    const int u = vertex_index(edge.u);
    const int v = vertex_index(edge.v);
    adj.out[static_cast<std::size_t>(u)].emplace_back(v, edge.weight);
    adj.out[static_cast<std::size_t>(v)].emplace_back(u, edge.weight);
  }
  return adj;
}

// Single-source Dijkstra; returns distances (infinity when unreachable) and
// the predecessor from the source side, which is the next hop toward it.
void dijkstra(const Adjacency& adj, int source, std::vector<double>& dist, std::vector<int>& prev) {
  const std::size_t n = adj.out.size();
  dist.assign(n, std::numeric_limits<double>::infinity());
  prev.assign(n, -1);
  using Entry = std::pair<double, int>;
  std::priority_queue<Entry, std::vector<Entry>, std::greater<>> queue;
  dist[static_cast<std::size_t>(source)] = 0.0;
  queue.emplace(0.0, source);
  while (!queue.empty()) {
    const auto [d, u] = queue.top();
    queue.pop();
    if (d > dist[static_cast<std::size_t>(u)]) continue;
    for (const auto& [v, w] : adj.out[static_cast<std::size_t>(u)]) {
      const double candidate = d + w;
      if (candidate < dist[static_cast<std::size_t>(v)]) {
        dist[static_cast<std::size_t>(v)] = candidate;
        prev[static_cast<std::size_t>(v)] = u;
        queue.emplace(candidate, v);
      }
    }
  }
}

}  // namespace

std::vector<PointId> GeodesicTable::intermediate_points(PointId point, std::size_t endpoint) const {
  std::vector<PointId> path;
  const auto& hops = next_hop[endpoint];
  int v = hops[static_cast<std::size_t>(point)];
  while (v >= 0) {
    if (static_cast<std::size_t>(v) < point_count) path.push_back(v);
    v = hops[static_cast<std::size_t>(v)];
  }
  return path;
}

GeodesicTable precompute_geodesic_costs(const ConsumerGraph& graph, std::size_t point_count,
                                        std::span<const NodeId> endpoints) {
  const Adjacency adj = build_adjacency(graph, point_count, endpoints);
  GeodesicTable table;
  table.point_count = point_count;
  table.costs = CostTable(point_count, endpoints.size());
  table.next_hop.resize(endpoints.size());
  std::vector<std::vector<double>> distances(endpoints.size());

  const auto columns = static_cast<int>(endpoints.size());
#pragma omp parallel for schedule(dynamic)
  for (int e = 0; e < columns; ++e) {
    dijkstra(adj, static_cast<int>(point_count) + e, distances[static_cast<std::size_t>(e)],
             table.next_hop[static_cast<std::size_t>(e)]);
  }

  for (std::size_t e = 0; e < endpoints.size(); ++e) {
    for (std::size_t p = 0; p < point_count; ++p) {
      const double d = distances[e][p];
      if (std::isfinite(d)) {
        table.costs.set(p, e, d);
      } else {
        table.costs.forbid(p, e);
      }
    }
  }
  return table;
}

std::optional<double> assignment_cost(const AssignmentCostSpec& spec, const Network& network,
                                      std::size_t point_count, const Point& x, NodeId endpoint) {
  const int column = endpoint_column(network.endpoints(), endpoint);
  if (column < 0) throw ConfigError("node " + std::to_string(endpoint) + " is not an endpoint");

  if (std::holds_alternative<EuclideanCost>(spec) ||
      std::holds_alternative<SquaredEuclideanCost>(spec)) {
    const auto& pos = require_position(network, endpoint, x.coords.size());
    const double sq = squared_distance(x.coords, pos);
    return std::holds_alternative<EuclideanCost>(spec) ? std::sqrt(sq) : sq;
  }
  if (const auto* table = std::get_if<TableCost>(&spec)) {
    if (static_cast<std::size_t>(x.id) >= table->table.points()) {
      throw ConfigError("cost table has no row for point " + std::to_string(x.id));
    }
    return table->table.at(static_cast<std::size_t>(x.id), static_cast<std::size_t>(column));
  }
  const auto& geodesic = std::get<GeodesicResistanceCost>(spec);
  const Adjacency adj = build_adjacency(geodesic.graph, point_count, network.endpoints());
  std::vector<double> dist;
  std::vector<int> prev;
  dijkstra(adj, static_cast<int>(point_count) + column, dist, prev);
  const double d = dist[static_cast<std::size_t>(x.id)];
  if (!std::isfinite(d)) return std::nullopt;
  return d;
}

CostTable build_cost_table(const AssignmentCostSpec& spec, const DemandMeasure& measure,
                           const Network& network) {
  const auto endpoints = network.endpoints();
  if (const auto* table = std::get_if<TableCost>(&spec)) {
    if (table->table.points() != measure.size() || table->table.endpoints() != endpoints.size()) {
      throw ConfigError("cost table is " + std::to_string(table->table.points()) + "x" +
                        std::to_string(table->table.endpoints()) + ", expected " +
                        std::to_string(measure.size()) + "x" + std::to_string(endpoints.size()));
    }
    return table->table;
  }
  if (const auto* geodesic = std::get_if<GeodesicResistanceCost>(&spec)) {
    return precompute_geodesic_costs(geodesic->graph, measure.size(), endpoints).costs;
  }

  const bool squared = std::holds_alternative<SquaredEuclideanCost>(spec);
  std::vector<const std::vector<double>*> positions;
  for (NodeId id : endpoints) {
    const std::size_t dim = measure.size() > 0 ? measure.point(0).coords.size() : 0;
    positions.push_back(&require_position(network, id, dim));
  }
  CostTable table(measure.size(), endpoints.size());
  const auto n = static_cast<std::ptrdiff_t>(measure.size());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t p = 0; p < n; ++p) {
    const auto& x = measure.point(static_cast<PointId>(p)).coords;
    for (std::size_t e = 0; e < endpoints.size(); ++e) {
      const double sq = squared_distance(x, *positions[e]);
      table.set(static_cast<std::size_t>(p), e, squared ? sq : std::sqrt(sq));
    }
  }
  return table;
}

double arc_flow_minimizer(const Arc& arc, double dual_difference) {
  if (!std::isfinite(dual_difference)) {
    throw NumericError("arc (" + std::to_string(arc.tail) + "," + std::to_string(arc.head) +
                       "): dual difference is not finite");
  }
  if (const auto* q = std::get_if<QuadraticArcCost>(&arc.cost)) {
    return std::clamp(dual_difference / (2.0 * q->coefficient), arc.lower, arc.upper);
  }
  const auto& generic = std::get<GenericArcCost>(arc.cost);
  const double p = generic.minimizer(dual_difference, arc.lower, arc.upper);
  if (!std::isfinite(p) || p < arc.lower || p > arc.upper) {
    throw NumericError("arc (" + std::to_string(arc.tail) + "," + std::to_string(arc.head) +
                       "): generic minimizer returned " + std::to_string(p) +
                       " outside its bounds");
  }
  return p;
}

double arc_cost_value(const Arc& arc, double flow) {
  if (const auto* q = std::get_if<QuadraticArcCost>(&arc.cost)) {
    return q->coefficient * flow * flow;
  }
  return std::get<GenericArcCost>(arc.cost).value(flow);
}

double arc_dual_value(const Arc& arc, double dual_difference) {
  const double p = arc_flow_minimizer(arc, dual_difference);
  return arc_cost_value(arc, p) - dual_difference * p;
}

}  // namespace sdotflow
