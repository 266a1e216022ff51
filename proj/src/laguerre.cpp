#include "sdotflow/laguerre.hpp"

#include <algorithm>
#include <string>

#include "sdotflow/errors.hpp"

namespace sdotflow {

namespace {

constexpr std::size_t kBlockSize = 4096;

[[noreturn]] void throw_infeasible(std::size_t point) {
  throw InfeasiblePointError(static_cast<int>(point),
                             "point " + std::to_string(point) +
                                 " has a forbidden cost to every endpoint");
}

void check_shapes(const DemandMeasure& measure, const CostTable& costs,
                  std::span<const double> endpoint_psi, std::span<const NodeId> endpoints) {
  if (costs.points() != measure.size() || costs.endpoints() != endpoints.size() ||
      endpoint_psi.size() != endpoints.size()) {
    throw ConfigError("cell computation: cost table, endpoint list and psi sizes disagree");
  }
}

CellMassReport empty_report(std::span<const NodeId> endpoints, std::size_t points) {
  CellMassReport report;
  report.endpoints.assign(endpoints.begin(), endpoints.end());
  report.masses.assign(endpoints.size(), 0.0);
  report.assignment.assign(points, -1);
  return report;
}

}  // namespace

double CellMassReport::mass(NodeId endpoint) const {
  for (std::size_t e = 0; e < endpoints.size(); ++e) {
    if (endpoints[e] == endpoint) return masses[e];
  }
  return 0.0;
}

double CellMassReport::total() const {
  double sum = 0.0;
  for (double m : masses) sum += m;
  return sum;
}

Assignment assign_row(const CostTable& costs, std::size_t point,
                      std::span<const double> endpoint_psi, double tie_epsilon) {
  Assignment result;
  const std::size_t columns = costs.endpoints();
  const auto row = costs.row(point);
  const bool check = costs.has_forbidden();

  double best = 0.0;
  bool found = false;
  for (std::size_t e = 0; e < columns; ++e) {
    if (check && costs.forbidden(point, e)) continue;
    const double adjusted = row[e] - endpoint_psi[e];
    if (!found || adjusted < best) {
      best = adjusted;
      found = true;
    }
  }
  if (!found) return result;

  int within = 0;
  for (std::size_t e = 0; e < columns; ++e) {
    if (check && costs.forbidden(point, e)) continue;
    if (row[e] - endpoint_psi[e] <= best + tie_epsilon) {
      if (result.column < 0) result.column = static_cast<int>(e);
      ++within;
    }
  }
  result.min_adjusted_cost = best;
  result.tied = within > 1;
  return result;
}

NodeId assign_point(const Problem& problem, PointId x, std::span<const double> psi,
                    double tie_epsilon) {
  const auto endpoint_psi = problem.endpoint_psi(psi);
  const Assignment a =
      assign_row(problem.costs(), static_cast<std::size_t>(x), endpoint_psi, tie_epsilon);
  if (a.column < 0) throw_infeasible(static_cast<std::size_t>(x));
  return problem.endpoints()[static_cast<std::size_t>(a.column)];
}

CellMassReport compute_cells(const DemandMeasure& measure, const CostTable& costs,
                             std::span<const double> endpoint_psi,
                             std::span<const NodeId> endpoints, double tie_epsilon) {
  check_shapes(measure, costs, endpoint_psi, endpoints);
  const std::size_t n = measure.size();
  const std::size_t columns = endpoints.size();
  CellMassReport report = empty_report(endpoints, n);

  const std::size_t blocks = (n + kBlockSize - 1) / kBlockSize;
  std::vector<double> block_masses(blocks * columns, 0.0);
  std::vector<double> block_integral(blocks, 0.0);
  std::vector<int> block_ties(blocks, 0);
  std::vector<std::ptrdiff_t> block_bad(blocks, -1);
  const auto masses = measure.masses();

#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t b = 0; b < static_cast<std::ptrdiff_t>(blocks); ++b) {
    const auto ub = static_cast<std::size_t>(b);
    const std::size_t begin = ub * kBlockSize;
    const std::size_t end = std::min(n, begin + kBlockSize);
    double* local = block_masses.data() + ub * columns;
    double integral = 0.0;
    int ties = 0;
    for (std::size_t p = begin; p < end; ++p) {
      const Assignment a = assign_row(costs, p, endpoint_psi, tie_epsilon);
      if (a.column < 0) {
        block_bad[ub] = static_cast<std::ptrdiff_t>(p);
        break;
      }
      report.assignment[p] = endpoints[static_cast<std::size_t>(a.column)];
      local[a.column] += masses[p];
      integral += masses[p] * a.min_adjusted_cost;
      ties += a.tied ? 1 : 0;
    }
    block_integral[ub] = integral;
    block_ties[ub] = ties;
  }

  for (std::size_t b = 0; b < blocks; ++b) {
    if (block_bad[b] >= 0) throw_infeasible(static_cast<std::size_t>(block_bad[b]));
    for (std::size_t e = 0; e < columns; ++e) report.masses[e] += block_masses[b * columns + e];
    report.adjusted_cost_integral += block_integral[b];
    report.tie_count += block_ties[b];
  }
  return report;
}

CellMassReport compute_cells_serial(const DemandMeasure& measure, const CostTable& costs,
                                    std::span<const double> endpoint_psi,
                                    std::span<const NodeId> endpoints, double tie_epsilon) {
  check_shapes(measure, costs, endpoint_psi, endpoints);
  const std::size_t n = measure.size();
  CellMassReport report = empty_report(endpoints, n);
  const auto masses = measure.masses();
  for (std::size_t p = 0; p < n; ++p) {
    const Assignment a = assign_row(costs, p, endpoint_psi, tie_epsilon);
    if (a.column < 0) throw_infeasible(p);
    report.assignment[p] = endpoints[static_cast<std::size_t>(a.column)];
    report.masses[static_cast<std::size_t>(a.column)] += masses[p];
    report.adjusted_cost_integral += masses[p] * a.min_adjusted_cost;
    report.tie_count += a.tied ? 1 : 0;
  }
  return report;
}

CellMassReport compute_cells(const Problem& problem, std::span<const double> psi,
                             double tie_epsilon) {
  const auto endpoint_psi = problem.endpoint_psi(psi);
  return compute_cells(problem.measure(), problem.costs(), endpoint_psi, problem.endpoints(),
                       tie_epsilon);
}

CellMassReport estimate_cell_masses(const DemandMeasure& measure, const CostTable& costs,
                                    std::span<const double> endpoint_psi,
                                    std::span<const NodeId> endpoints, std::size_t n_samples,
                                    std::mt19937_64& rng, double tie_epsilon) {
  if (n_samples == 0) throw ParameterError("estimate_cell_masses: n_samples must be >= 1");
  if (!(measure.total_mass() > 0.0)) {
    throw ParameterError("estimate_cell_masses: measure has zero total mass");
  }
  check_shapes(measure, costs, endpoint_psi, endpoints);

  CellMassReport report = empty_report(endpoints, 0);
  const auto masses = measure.masses();
  std::discrete_distribution<std::size_t> draw(masses.begin(), masses.end());

  // Assignments are memoised per point: repeated draws of a point reuse them.
  std::vector<int> column_of(measure.size(), -2);
  std::vector<char> tied(measure.size(), 0);
  std::vector<std::size_t> counts(endpoints.size(), 0);
  for (std::size_t s = 0; s < n_samples; ++s) {
    const std::size_t p = draw(rng);
    if (column_of[p] == -2) {
      const Assignment a = assign_row(costs, p, endpoint_psi, tie_epsilon);
      if (a.column < 0) throw_infeasible(p);
      column_of[p] = a.column;
      tied[p] = a.tied ? 1 : 0;
    }
    ++counts[static_cast<std::size_t>(column_of[p])];
    report.tie_count += tied[p];
  }
  const auto n = static_cast<double>(n_samples);
  for (std::size_t e = 0; e < endpoints.size(); ++e) {
    report.masses[e] = measure.total_mass() * (static_cast<double>(counts[e]) / n);
  }
  return report;
}

}  // namespace sdotflow
