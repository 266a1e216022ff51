#pragma once

#include <cstdint>
#include <vector>

#include "sdotflow/dual_ascent.hpp"
#include "sdotflow/problem.hpp"

namespace sdotflow {

struct OracleResult {
  std::vector<NodeId> best_assignment;  // point id -> endpoint id
  FlowState best_flows;
  double best_cost = 0.0;
  std::uint64_t enumerated = 0;  // assignments examined
  std::uint64_t feasible = 0;    // assignments with a feasible flow
  bool exact = true;             // false when a cycle-space grid was searched
};

inline constexpr std::uint64_t kOracleAssignmentLimit = 1'000'000;
inline constexpr std::size_t kOracleArcLimit = 12;

/// Exhaustive solver for tiny instances: every map points -> endpoints, each
/// with its minimum-cost flow. On forests the flow is forced by conservation
/// (leaf elimination); with cycles the free cycle-space coordinates are
/// grid-searched at `flow_grid_resolution`. Throws InstanceTooLargeError past
/// the guards and InfeasibleInstanceError when nothing is feasible.
OracleResult brute_force(const Problem& problem, double flow_grid_resolution = 1e-3);

/// Minimum-cost flow for fixed endpoint demands (column order). Returns
/// false when no flow within bounds exists. Exposed for tests.
bool oracle_flow_subproblem(const Problem& problem, const std::vector<double>& endpoint_demand,
                            double flow_grid_resolution, FlowState& flows, double& cost);

struct GapReport {
  double best_cost = 0.0;
  double dual_value = 0.0;
  double primal_value = 0.0;
  double dual_gap = 0.0;    // |dual - best|
  double primal_gap = 0.0;  // |primal - best|
  double tolerance = 0.0;   // relative_tolerance * (1 + |best|)
  bool passed = false;
};

GapReport duality_gap_check(const SolveReport& report, const OracleResult& oracle,
                            double relative_tolerance = 1e-6);
GapReport duality_gap_check(double dual_value, double primal_value, const OracleResult& oracle,
                            double relative_tolerance = 1e-6);

}  // namespace sdotflow
