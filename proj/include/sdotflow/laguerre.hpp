#pragma once

#include <cstddef>
#include <random>
#include <span>
#include <vector>

#include "sdotflow/costs.hpp"
#include "sdotflow/model.hpp"
#include "sdotflow/problem.hpp"

namespace sdotflow {

struct CellMassReport {
  std::vector<NodeId> endpoints;   // ascending endpoint ids
  std::vector<double> masses;      // aligned with endpoints
  std::vector<NodeId> assignment;  // point id -> endpoint id; empty for estimates
  int tie_count = 0;
  // Sum over points of mass * min_i (c(x,i) - psi_i); exact passes only.
  double adjusted_cost_integral = 0.0;

  double mass(NodeId endpoint) const;
  double total() const;
};

struct Assignment {
  int column = -1;  // -1: every cost forbidden
  double min_adjusted_cost = 0.0;
  bool tied = false;
};

/// Laguerre-cell membership of one cost-table row: the lowest column whose
/// adjusted cost c - psi lies within tie_epsilon of the minimum.
Assignment assign_row(const CostTable& costs, std::size_t point,
                      std::span<const double> endpoint_psi, double tie_epsilon = 0.0);

/// Endpoint node id owning point `x` under the full dual vector `psi`.
/// Throws InfeasiblePointError when all costs are forbidden.
NodeId assign_point(const Problem& problem, PointId x, std::span<const double> psi,
                    double tie_epsilon = 0.0);

/// OpenMP kernel. Masses and the adjusted-cost integral are reduced over
/// fixed-size point blocks in block order, so the result does not depend on
/// the thread count.
CellMassReport compute_cells(const DemandMeasure& measure, const CostTable& costs,
                             std::span<const double> endpoint_psi,
                             std::span<const NodeId> endpoints, double tie_epsilon = 0.0);

/// Single-threaded reference: one pass in point order.
CellMassReport compute_cells_serial(const DemandMeasure& measure, const CostTable& costs,
                                    std::span<const double> endpoint_psi,
                                    std::span<const NodeId> endpoints, double tie_epsilon = 0.0);

CellMassReport compute_cells(const Problem& problem, std::span<const double> psi,
                             double tie_epsilon = 0.0);

/// Monte Carlo cell masses: n_samples points drawn i.i.d. proportionally to
/// their mass, each assigned by assign_row; counts are scaled by the total
/// mass. Throws ParameterError for n_samples == 0 or a massless measure.
CellMassReport estimate_cell_masses(const DemandMeasure& measure, const CostTable& costs,
                                    std::span<const double> endpoint_psi,
                                    std::span<const NodeId> endpoints, std::size_t n_samples,
                                    std::mt19937_64& rng, double tie_epsilon = 0.0);

}  // namespace sdotflow
