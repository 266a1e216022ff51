#include "sdotflow/scenario.hpp"

#include <cmath>
#include <set>
#include <sstream>
#include <utility>

namespace sdotflow {

namespace {

std::string arc_subject(ArcId id, const Arc& arc) {
  std::ostringstream out;
  out << "arc " << id << " (" << arc.tail << "->" << arc.head << ")";
  return out.str();
}

bool positional(const AssignmentCostSpec& spec) {
  return std::holds_alternative<EuclideanCost>(spec) ||
         std::holds_alternative<SquaredEuclideanCost>(spec);
}

}  // namespace

ValidationReport validate_scenario(const Scenario& s) {
  ValidationReport report;
  auto add = [&](std::string code, std::string subject, std::string detail) {
    report.push_back({std::move(code), std::move(subject), std::move(detail)});
  };

  if (s.dimension < 1) add("dimension", "scenario", "dimension must be >= 1");

  const auto points = s.measure.points();
  const auto masses = s.measure.masses();
  double mass_sum = 0.0;
  for (std::size_t p = 0; p < points.size(); ++p) {
    const std::string subject = "point " + std::to_string(p);
    if (points[p].id != static_cast<PointId>(p)) {
      add("point_id", subject, "id " + std::to_string(points[p].id) + " is not contiguous from 0");
    }
    if (points[p].coords.size() != static_cast<std::size_t>(std::max(s.dimension, 0))) {
      add("point_dimension", subject,
          "has " + std::to_string(points[p].coords.size()) + " coordinates");
    }
    for (double c : points[p].coords) {
      if (!std::isfinite(c)) add("point_coords", subject, "non-finite coordinate");
    }
    if (!std::isfinite(masses[p]) || masses[p] < 0.0) {
      add("mass", subject, "mass " + std::to_string(masses[p]) + " is negative or not finite");
    }
    mass_sum += masses[p];
  }

  const auto nodes = s.network.nodes();
  const auto node_count = static_cast<NodeId>(nodes.size());
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    const std::string subject = "node " + std::to_string(i);
    if (nodes[i].id != static_cast<NodeId>(i)) {
      add("node_id", subject, "id " + std::to_string(nodes[i].id) + " is not contiguous from 0");
    }
    if (!std::isfinite(nodes[i].supply)) add("supply", subject, "supply is not finite");
    if (positional(s.assignment_cost) && nodes[i].is_endpoint) {
      if (!nodes[i].position) {
        add("position", subject, "endpoint lacks a position required by the assignment cost");
      } else if (nodes[i].position->size() != static_cast<std::size_t>(std::max(s.dimension, 0))) {
        add("position", subject, "position dimension mismatch");
      }
    }
  }
  if (s.network.endpoints().empty()) add("endpoints", "scenario", "no endpoint node");

  std::set<std::pair<NodeId, NodeId>> seen;
  const auto arcs = s.network.arcs();
  for (std::size_t a = 0; a < arcs.size(); ++a) {
    const Arc& arc = arcs[a];
    const std::string subject = arc_subject(static_cast<ArcId>(a), arc);
    if (arc.tail < 0 || arc.tail >= node_count || arc.head < 0 || arc.head >= node_count) {
      add("arc_nodes", subject, "references an unknown node");
    }
    if (arc.tail == arc.head) add("arc_loop", subject, "tail equals head");
    if (!seen.insert({arc.tail, arc.head}).second) add("arc_duplicate", subject, "duplicate arc");
    if (!(arc.lower <= arc.upper)) {
      add("arc_bounds", subject,
          "lower " + std::to_string(arc.lower) + " > upper " + std::to_string(arc.upper));
    }
    if (const auto* q = std::get_if<QuadraticArcCost>(&arc.cost)) {
      if (!(q->coefficient > 0.0) || !std::isfinite(q->coefficient)) {
        add("arc_cost", subject, "quadratic coefficient must be positive and finite");
      }
    } else {
      const auto& g = std::get<GenericArcCost>(arc.cost);
      if (!g.value || !g.minimizer) add("arc_cost", subject, "generic cost lacks value or minimizer");
    }
  }

  if (const auto* table = std::get_if<TableCost>(&s.assignment_cost)) {
    if (table->table.points() != points.size() ||
        table->table.endpoints() != s.network.endpoints().size()) {
      add("cost_table", "scenario", "cost table shape does not match points x endpoints");
    }
  }

  const double supply = s.network.total_supply();
  if (!(std::fabs(mass_sum - supply) <= s.balance_tolerance)) {
    std::ostringstream detail;
    detail.precision(17);
    detail << "total demand " << mass_sum << " != total supply " << supply << " (tolerance "
           << s.balance_tolerance << ")";
    add("balance", "scenario", detail.str());
  }
  return report;
}

std::string format_report(const ValidationReport& report) {
  std::ostringstream out;
  for (std::size_t k = 0; k < report.size(); ++k) {
    if (k) out << "; ";
    out << report[k].code << ": " << report[k].subject << ": " << report[k].detail;
  }
  return out.str();
}

}  // namespace sdotflow
