#pragma once

#include <algorithm>
#include <random>
#include <vector>

#include "sdotflow/scenario.hpp"
#include "sdotflow/scenarios.hpp"

namespace fixtures {

using namespace sdotflow;

// Node 0 (supply 1) feeds endpoint node 1 over one arc with c(p) = p^2.
// One unit-mass point at cost 0. Optimum: psi = (2, 0), flow 1, value 1.
inline Scenario two_node() {
  Scenario s;
  s.dimension = 1;
  s.measure = DemandMeasure({Point{0, {0.0}}}, {1.0});
  s.network = Network({Node{0, 1.0, false, std::nullopt}, Node{1, 0.0, true, std::vector<double>{0.0}}},
                      {Arc{0, 1, -1.0, 1.0, QuadraticArcCost{1.0}}});
  CostTable table(1, 1);
  table.set(0, 0, 0.0);
  s.assignment_cost = TableCost{table};
  return s;
}

struct Planted {
  Scenario scenario;
  std::vector<double> psi_star;
  std::vector<NodeId> assignment;  // point -> endpoint id at psi_star
};

// Plants psi as the dual optimum on an arbitrary arc set with n_points
// random points; see planted().
inline Planted planted_on(std::mt19937_64& rng, int n_points, const std::vector<bool>& is_endpoint,
                          std::vector<double> psi, std::vector<Arc> arcs) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const auto n_nodes = static_cast<int>(is_endpoint.size());
  std::vector<NodeId> endpoints;
  for (int i = 0; i < n_nodes; ++i) {
    if (is_endpoint[static_cast<std::size_t>(i)]) endpoints.push_back(i);
  }

  std::vector<Point> points;
  std::vector<double> masses;
  std::vector<NodeId> assignment;
  std::vector<double> cell(static_cast<std::size_t>(n_nodes), 0.0);
  CostTable table(static_cast<std::size_t>(n_points), endpoints.size());
  std::uniform_int_distribution<std::size_t> pick(0, endpoints.size() - 1);
  for (int p = 0; p < n_points; ++p) {
    points.push_back(Point{p, {unit(rng), unit(rng)}});
    masses.push_back(0.5 + unit(rng));
    const std::size_t col = pick(rng);
    assignment.push_back(endpoints[col]);
    cell[static_cast<std::size_t>(endpoints[col])] += masses.back();
    const double base = unit(rng);
    for (std::size_t e = 0; e < endpoints.size(); ++e) {
      const double psi_e = psi[static_cast<std::size_t>(endpoints[e])];
      const double extra = e == col ? 0.0 : 0.5 + unit(rng);
      table.set(static_cast<std::size_t>(p), e, psi_e + base + extra);
    }
  }

  std::vector<double> supply = cell;
  for (const Arc& arc : arcs) {
    const double d = std::get<QuadraticArcCost>(arc.cost).coefficient;
    const double flow = (psi[static_cast<std::size_t>(arc.tail)] - psi[static_cast<std::size_t>(arc.head)]) / (2.0 * d);
    supply[static_cast<std::size_t>(arc.tail)] += flow;
    supply[static_cast<std::size_t>(arc.head)] -= flow;
  }

  std::vector<Node> nodes;
  for (int i = 0; i < n_nodes; ++i) {
    nodes.push_back(Node{i, supply[static_cast<std::size_t>(i)], is_endpoint[static_cast<std::size_t>(i)], std::nullopt});
  }

  Planted out;
  out.scenario.dimension = 2;
  out.scenario.measure = DemandMeasure(std::move(points), std::move(masses));
  out.scenario.network = Network(std::move(nodes), std::move(arcs));
  out.scenario.assignment_cost = TableCost{std::move(table)};
  out.scenario.balance_tolerance = 1e-9;
  out.psi_star = std::move(psi);
  out.assignment = std::move(assignment);
  return out;
}

// Small instance with a known dual optimum: a random spanning tree, random
// psi*, and a random assignment T*. Supplies make the supergradient vanish
// at psi*; costs make T* the strict argmin at psi* with margin >= 0.5.
inline Planted planted(std::mt19937_64& rng, int max_points = 6, int max_endpoints = 3) {
  std::uniform_int_distribution<int> n_points_d(1, max_points);
  std::uniform_int_distribution<int> n_endpoints_d(1, max_endpoints);
  std::uniform_int_distribution<int> n_extra_d(0, 2);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  const int n_points = n_points_d(rng);
  const int n_endpoints = n_endpoints_d(rng);
  const int n_nodes = n_endpoints + n_extra_d(rng) + (n_endpoints == 1 ? 1 : 0);

  std::vector<int> ids(static_cast<std::size_t>(n_nodes));
  for (int i = 0; i < n_nodes; ++i) ids[static_cast<std::size_t>(i)] = i;
  std::shuffle(ids.begin(), ids.end(), rng);
  std::vector<bool> is_endpoint(static_cast<std::size_t>(n_nodes), false);
  for (int e = 0; e < n_endpoints; ++e) is_endpoint[static_cast<std::size_t>(ids[static_cast<std::size_t>(e)])] = true;

  std::vector<double> psi(static_cast<std::size_t>(n_nodes));
  for (double& v : psi) v = -2.0 + 4.0 * unit(rng);

  std::vector<Arc> arcs;
  for (int v = 1; v < n_nodes; ++v) {
    const int parent = std::uniform_int_distribution<int>(0, v - 1)(rng);
    const double d = 1.0 + 2.0 * unit(rng);
    if (unit(rng) < 0.5) {
      arcs.push_back(Arc{parent, v, -10.0, 10.0, QuadraticArcCost{d}});
    } else {
      arcs.push_back(Arc{v, parent, -10.0, 10.0, QuadraticArcCost{d}});
    }
  }

  return planted_on(rng, n_points, is_endpoint, std::move(psi), std::move(arcs));
}

// Random small instance without a planted optimum: random tree plus
// optional extra arcs, random table costs, supplies spread over nodes.
inline Scenario random_small(std::mt19937_64& rng, int n_points = 5, int n_nodes = 4,
                             int n_endpoints = 2, int extra_arcs = 0) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<Node> nodes;
  double total = 0.0;
  std::vector<double> masses;
  std::vector<Point> points;
  for (int p = 0; p < n_points; ++p) {
    points.push_back(Point{p, {unit(rng), unit(rng)}});
    masses.push_back(0.2 + unit(rng));
    total += masses.back();
  }
  std::vector<double> weights(static_cast<std::size_t>(n_nodes));
  double wsum = 0.0;
  for (double& w : weights) wsum += (w = unit(rng));
  for (int i = 0; i < n_nodes; ++i) {
    nodes.push_back(Node{i, total * weights[static_cast<std::size_t>(i)] / wsum, i >= n_nodes - n_endpoints,
                         std::vector<double>{unit(rng), unit(rng)}});
  }
  // Make the supplies sum exactly to the total mass.
  double s = 0.0;
  for (int i = 0; i + 1 < n_nodes; ++i) s += nodes[static_cast<std::size_t>(i)].supply;
  nodes.back().supply = total - s;

  std::vector<Arc> arcs;
  for (int v = 1; v < n_nodes; ++v) {
    const int parent = std::uniform_int_distribution<int>(0, v - 1)(rng);
    arcs.push_back(Arc{parent, v, -2.0 * total, 2.0 * total, QuadraticArcCost{0.5 + unit(rng)}});
  }
  for (int k = 0; k < extra_arcs; ++k) {
    for (int tries = 0; tries < 50; ++tries) {
      const int a = std::uniform_int_distribution<int>(0, n_nodes - 1)(rng);
      const int b = std::uniform_int_distribution<int>(0, n_nodes - 1)(rng);
      if (a == b) continue;
      bool dup = false;
      for (const Arc& arc : arcs) dup = dup || (arc.tail == a && arc.head == b) || (arc.tail == b && arc.head == a);
      if (dup) continue;
      arcs.push_back(Arc{a, b, -2.0 * total, 2.0 * total, QuadraticArcCost{0.5 + unit(rng)}});
      break;
    }
  }

  Scenario sc;
  sc.dimension = 2;
  sc.measure = DemandMeasure(std::move(points), std::move(masses));
  sc.network = Network(std::move(nodes), std::move(arcs));
  sc.assignment_cost = EuclideanCost{};
  return sc;
}

}  // namespace fixtures
