#include "sdotflow/problem.hpp"

#include <string>

#include "sdotflow/errors.hpp"

namespace sdotflow {

Problem::Problem(Scenario scenario) : scenario_(std::move(scenario)) {
  const ValidationReport report = validate_scenario(scenario_);
  if (!report.empty()) throw ValidationError(format_report(report));

  const auto endpoints = scenario_.network.endpoints();
  if (const auto* geodesic = std::get_if<GeodesicResistanceCost>(&scenario_.assignment_cost)) {
    geodesic_ = precompute_geodesic_costs(geodesic->graph, scenario_.measure.size(), endpoints);
    costs_ = geodesic_->costs;
  } else {
    costs_ = build_cost_table(scenario_.assignment_cost, scenario_.measure, scenario_.network);
  }

  column_of_.assign(scenario_.network.node_count(), -1);
  for (std::size_t e = 0; e < endpoints.size(); ++e) {
    column_of_[static_cast<std::size_t>(endpoints[e])] = static_cast<int>(e);
  }

  if (costs_.has_forbidden()) {
    for (std::size_t p = 0; p < costs_.points(); ++p) {
      bool any = false;
      for (std::size_t e = 0; e < costs_.endpoints() && !any; ++e) any = !costs_.forbidden(p, e);
      if (!any) {
        throw InfeasiblePointError(static_cast<int>(p),
                                   "point " + std::to_string(p) +
                                       " has a forbidden cost to every endpoint");
      }
    }
  }
}

std::vector<double> Problem::endpoint_psi(std::span<const double> psi) const {
  const auto endpoints = this->endpoints();
  std::vector<double> out(endpoints.size());
  for (std::size_t e = 0; e < endpoints.size(); ++e) {
    out[e] = psi[static_cast<std::size_t>(endpoints[e])];
  }
  return out;
}

}  // namespace sdotflow
