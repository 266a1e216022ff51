#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "sdotflow/model.hpp"

namespace sdotflow {

/// Dense point x endpoint matrix of assignment costs c(x, i). Entries may be
/// marked forbidden (c = +inf); forbidden entries never enter arithmetic.
class CostTable {
 public:
  CostTable() = default;
  CostTable(std::size_t points, std::size_t endpoints);

  std::size_t points() const { return points_; }
  std::size_t endpoints() const { return endpoints_; }

  void set(std::size_t point, std::size_t endpoint, double value);
  void forbid(std::size_t point, std::size_t endpoint);

  bool forbidden(std::size_t point, std::size_t endpoint) const {
    return !forbidden_.empty() && forbidden_[point * endpoints_ + endpoint] != 0;
  }
  // Meaningless for forbidden entries.
  double value(std::size_t point, std::size_t endpoint) const {
    return values_[point * endpoints_ + endpoint];
  }
  std::optional<double> at(std::size_t point, std::size_t endpoint) const;
  bool has_forbidden() const { return !forbidden_.empty(); }

  std::span<const double> row(std::size_t point) const {
    return {values_.data() + point * endpoints_, endpoints_};
  }

  bool operator==(const CostTable&) const = default;

 private:
  std::size_t points_ = 0;
  std::size_t endpoints_ = 0;
  std::vector<double> values_;
  std::vector<std::uint8_t> forbidden_;
};

/// Vertex of a consumer graph: a demand point or an endpoint node.
struct GraphVertex {
  enum class Kind { point, endpoint };
  Kind kind = Kind::point;
  int id = 0;  // point id or endpoint node id

  bool operator==(const GraphVertex&) const = default;
};

struct GraphEdge {
  GraphVertex u;
  GraphVertex v;
  double weight = 0.0;
};

/// Weighted undirected graph over demand points and endpoints.
struct ConsumerGraph {
  std::vector<GraphEdge> edges;
};

struct EuclideanCost {};
struct SquaredEuclideanCost {};
struct GeodesicResistanceCost {
  ConsumerGraph graph;
  // Set when the graph was read from a separate file; the writer then
  // references that file instead of inlining the edges.
  std::string graph_file;
};
// Columns follow ascending endpoint id.
struct TableCost {
  CostTable table;
};

using AssignmentCostSpec =
    std::variant<EuclideanCost, SquaredEuclideanCost, GeodesicResistanceCost, TableCost>;

const char* cost_kind_name(const AssignmentCostSpec& spec);

/// c(x, i) for one pair; std::nullopt means forbidden. Positional kinds need
/// coordinates on both sides (ConfigError otherwise). The geodesic kind runs
/// one shortest-path search per call; solvers use build_cost_table instead.
std::optional<double> assignment_cost(const AssignmentCostSpec& spec, const Network& network,
                                      std::size_t point_count, const Point& x, NodeId endpoint);

/// Shortest-path trees rooted at each endpoint of a consumer graph.
/// Vertex numbering: demand points are 0..points-1, endpoint column e is
/// points + e.
struct GeodesicTable {
  CostTable costs;
  std::size_t point_count = 0;
  // next_hop[e][v]: neighbour of v on its stored shortest path toward
  // endpoint column e; -1 at the root or when unreachable.
  std::vector<std::vector<int>> next_hop;

  // Demand points strictly between `point` and endpoint column `e` on the
  // stored path (excludes `point` itself and endpoint vertices).
  std::vector<PointId> intermediate_points(PointId point, std::size_t endpoint) const;
};

/// One Dijkstra per endpoint (run in parallel). Negative weights and edges
/// that reference unknown vertices throw ConfigError; unreachable pairs are
/// marked forbidden.
GeodesicTable precompute_geodesic_costs(const ConsumerGraph& graph, std::size_t point_count,
                                        std::span<const NodeId> endpoints);

/// Full cost table for a scenario's measure and network.
CostTable build_cost_table(const AssignmentCostSpec& spec, const DemandMeasure& measure,
                           const Network& network);

/// Closed-form or caller-supplied argmin of c(p) - dual_difference * p over
/// [lower, upper]. For quadratic costs this is clamp(dual_difference / (2 d)).
double arc_flow_minimizer(const Arc& arc, double dual_difference);

double arc_cost_value(const Arc& arc, double flow);

/// min over [lower, upper] of c(p) - dual_difference * p.
double arc_dual_value(const Arc& arc, double dual_difference);

}  // namespace sdotflow
