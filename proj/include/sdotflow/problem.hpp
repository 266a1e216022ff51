#pragma once

#include <optional>
#include <span>
#include <vector>

#include "sdotflow/costs.hpp"
#include "sdotflow/scenario.hpp"

namespace sdotflow {

/// A validated scenario together with its precomputed assignment-cost table.
/// Construction throws ValidationError when validate_scenario reports
/// anything, and InfeasiblePointError when some point has only forbidden
/// costs.
class Problem {
 public:
  explicit Problem(Scenario scenario);

  const Scenario& scenario() const { return scenario_; }
  const Network& network() const { return scenario_.network; }
  const DemandMeasure& measure() const { return scenario_.measure; }
  const CostTable& costs() const { return costs_; }
  std::span<const NodeId> endpoints() const { return scenario_.network.endpoints(); }
  std::size_t node_count() const { return scenario_.network.node_count(); }

  // Column of `node` in the cost table, or -1 when it is not an endpoint.
  int endpoint_column(NodeId node) const { return column_of_[static_cast<std::size_t>(node)]; }

  // Shortest-path trees; only present for the geodesic assignment cost.
  const GeodesicTable* geodesic() const { return geodesic_ ? &*geodesic_ : nullptr; }

  // psi restricted to endpoints, in column order.
  std::vector<double> endpoint_psi(std::span<const double> psi) const;

 private:
  Scenario scenario_;
  CostTable costs_;
  std::optional<GeodesicTable> geodesic_;
  std::vector<int> column_of_;
};

}  // namespace sdotflow
