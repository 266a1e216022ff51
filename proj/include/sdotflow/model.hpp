#pragma once

#include <functional>
#include <optional>
#include <span>
#include <variant>
#include <vector>

namespace sdotflow {

using PointId = int;
using NodeId = int;
using ArcId = int;

struct Point {
  PointId id = 0;
  std::vector<double> coords;
};

/// Discrete demand measure: a weighted point set. Immutable once built.
class DemandMeasure {
 public:
  DemandMeasure() = default;
  // Throws ConfigError when the two lists differ in length.
  DemandMeasure(std::vector<Point> points, std::vector<double> masses);

  std::span<const Point> points() const { return points_; }
  std::span<const double> masses() const { return masses_; }
  const Point& point(PointId id) const { return points_[static_cast<std::size_t>(id)]; }
  double mass(PointId id) const { return masses_[static_cast<std::size_t>(id)]; }
  double total_mass() const { return total_mass_; }
  std::size_t size() const { return points_.size(); }

 private:
  std::vector<Point> points_;
  std::vector<double> masses_;
  double total_mass_ = 0.0;
};

struct Node {
  NodeId id = 0;
  double supply = 0.0;
  bool is_endpoint = false;
  std::optional<std::vector<double>> position;
};

/// c(p) = coefficient * p^2, strictly convex for coefficient > 0.
struct QuadraticArcCost {
  double coefficient = 1.0;
};

/// Caller-supplied strictly convex arc cost. `minimizer(delta, lower, upper)`
/// must return argmin over [lower, upper] of value(p) - delta * p.
struct GenericArcCost {
  std::function<double(double)> value;
  std::function<double(double, double, double)> minimizer;
};

using ArcCost = std::variant<QuadraticArcCost, GenericArcCost>;

struct Arc {
  NodeId tail = 0;
  NodeId head = 0;
  double lower = 0.0;
  double upper = 0.0;
  ArcCost cost = QuadraticArcCost{};
};

/// Directed graph with per-node outgoing/incoming arc lists. Adjacency lists
/// hold arc ids in ascending order; arcs that reference unknown nodes are
/// left out of adjacency and reported by validate_scenario.
class Network {
 public:
  Network() = default;
  Network(std::vector<Node> nodes, std::vector<Arc> arcs);

  std::span<const Node> nodes() const { return nodes_; }
  std::span<const Arc> arcs() const { return arcs_; }
  const Node& node(NodeId id) const { return nodes_[static_cast<std::size_t>(id)]; }
  const Arc& arc(ArcId id) const { return arcs_[static_cast<std::size_t>(id)]; }
  std::size_t node_count() const { return nodes_.size(); }
  std::size_t arc_count() const { return arcs_.size(); }

  std::span<const ArcId> outgoing(NodeId id) const { return outgoing_[static_cast<std::size_t>(id)]; }
  std::span<const ArcId> incoming(NodeId id) const { return incoming_[static_cast<std::size_t>(id)]; }

  // Endpoint node ids in ascending order. Column e of every cost table
  // refers to endpoints()[e].
  std::span<const NodeId> endpoints() const { return endpoints_; }
  double total_supply() const;
  bool has_arc_between(NodeId a, NodeId b) const;

 private:
  std::vector<Node> nodes_;
  std::vector<Arc> arcs_;
  std::vector<std::vector<ArcId>> outgoing_;
  std::vector<std::vector<ArcId>> incoming_;
  std::vector<NodeId> endpoints_;
};

struct DualState {
  std::vector<double> psi;
  int iteration = 0;
};

struct FlowState {
  std::vector<double> flows;
};

/// Deterministic assignment of every demand point to one endpoint.
struct Partition {
  std::vector<NodeId> assignment;   // point id -> endpoint node id
  std::vector<NodeId> endpoints;    // ascending endpoint ids
  std::vector<double> cell_masses;  // aligned with `endpoints`

  double cell_mass(NodeId endpoint) const;
};

}  // namespace sdotflow
