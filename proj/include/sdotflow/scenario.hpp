#pragma once

#include <string>
#include <vector>

#include "sdotflow/costs.hpp"
#include "sdotflow/model.hpp"

namespace sdotflow {

inline constexpr double kDefaultBalanceTolerance = 1e-9;

struct Scenario {
  int dimension = 2;
  DemandMeasure measure;
  Network network;
  AssignmentCostSpec assignment_cost = EuclideanCost{};
  double balance_tolerance = kDefaultBalanceTolerance;
};

struct Violation {
  std::string code;     // e.g. "balance", "arc_bounds"
  std::string subject;  // "point 3", "arc 2 (0->1)", "scenario"
  std::string detail;

  bool operator==(const Violation&) const = default;
};

using ValidationReport = std::vector<Violation>;

/// Lists every violated structural invariant. Pure; never throws.
ValidationReport validate_scenario(const Scenario& scenario);

std::string format_report(const ValidationReport& report);

}  // namespace sdotflow
