#include <doctest.h>

#include <cmath>
#include <random>

#include "sdotflow/costs.hpp"
#include "sdotflow/errors.hpp"

using namespace sdotflow;

namespace {

Arc unit_arc(double d = 1.0, double lo = -1.0, double hi = 1.0) {
  return Arc{0, 1, lo, hi, QuadraticArcCost{d}};
}

GraphVertex pt(int id) { return {GraphVertex::Kind::point, id}; }
GraphVertex ep(int id) { return {GraphVertex::Kind::endpoint, id}; }

Network one_endpoint_at(std::vector<double> pos) {
  return Network({Node{0, 1.0, true, std::move(pos)}}, {});
}

}  // namespace

TEST_CASE("euclidean cost is the distance to the endpoint position") {
  const Network net = one_endpoint_at({0.0, 0.0});
  CHECK(*assignment_cost(EuclideanCost{}, net, 1, Point{0, {3.0, 0.0}}, 0) == doctest::Approx(3.0));
  CHECK(*assignment_cost(SquaredEuclideanCost{}, net, 1, Point{0, {3.0, 4.0}}, 0) ==
        doctest::Approx(25.0));
  CHECK_THROWS_AS(assignment_cost(EuclideanCost{}, net, 1, Point{0, {3.0, 0.0}}, 5), ConfigError);
}

TEST_CASE("geodesic cost sums edge weights along the path") {
  const Network net = one_endpoint_at({0.0, 0.0});
  GeodesicResistanceCost spec;
  spec.graph.edges = {{pt(0), pt(1), 1.0}, {pt(1), ep(0), 1.0}};
  CHECK(*assignment_cost(spec, net, 2, Point{0, {0.0, 0.0}}, 0) == doctest::Approx(2.0));
  CHECK(*assignment_cost(spec, net, 2, Point{1, {0.0, 0.0}}, 0) == doctest::Approx(1.0));
}

TEST_CASE("star graph gives every leaf the edge weight") {
  ConsumerGraph g;
  for (int i = 0; i < 5; ++i) g.edges.push_back({pt(i), ep(7), 0.3});
  const std::vector<NodeId> endpoints = {7};
  const GeodesicTable t = precompute_geodesic_costs(g, 5, endpoints);
  for (std::size_t p = 0; p < 5; ++p) CHECK(t.costs.value(p, 0) == doctest::Approx(0.3));
  CHECK(t.intermediate_points(0, 0).empty());
}

TEST_CASE("unreachable consumers get forbidden entries") {
  ConsumerGraph g;
  g.edges = {{pt(0), ep(2), 1.0}};
  const std::vector<NodeId> endpoints = {2};
  const GeodesicTable t = precompute_geodesic_costs(g, 2, endpoints);
  CHECK_FALSE(t.costs.forbidden(0, 0));
  CHECK(t.costs.forbidden(1, 0));
  CHECK_FALSE(t.costs.at(1, 0).has_value());
}

TEST_CASE("negative weights and unknown vertices are rejected") {
  const std::vector<NodeId> endpoints = {0};
  ConsumerGraph neg;
  neg.edges = {{pt(0), ep(0), -1.0}};
  CHECK_THROWS_AS(precompute_geodesic_costs(neg, 1, endpoints), ConfigError);
  ConsumerGraph unknown;
  unknown.edges = {{pt(4), ep(0), 1.0}};
  CHECK_THROWS_AS(precompute_geodesic_costs(unknown, 1, endpoints), ConfigError);
  ConsumerGraph not_endpoint;
  not_endpoint.edges = {{pt(0), ep(3), 1.0}};
  CHECK_THROWS_AS(precompute_geodesic_costs(not_endpoint, 1, endpoints), ConfigError);
}

TEST_CASE("stored paths list intermediate points in order") {
  // 0 - 1 - 2 - endpoint 5
  ConsumerGraph g;
  g.edges = {{pt(0), pt(1), 1.0}, {pt(1), pt(2), 1.0}, {pt(2), ep(5), 1.0}};
  const std::vector<NodeId> endpoints = {5};
  const GeodesicTable t = precompute_geodesic_costs(g, 3, endpoints);
  CHECK(t.intermediate_points(0, 0) == std::vector<PointId>{1, 2});
  CHECK(t.costs.value(0, 0) == doctest::Approx(3.0));
}

TEST_CASE("geodesic table satisfies the edge triangle inequality") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> w(0.1, 2.0);
  std::uniform_int_distribution<int> vert(0, 29);
  ConsumerGraph g;
  for (int i = 0; i < 29; ++i) g.edges.push_back({pt(i), pt(i + 1), w(rng)});
  for (int k = 0; k < 40; ++k) g.edges.push_back({pt(vert(rng)), pt(vert(rng)), w(rng)});
  g.edges.push_back({pt(0), ep(0), w(rng)});
  g.edges.push_back({pt(17), ep(1), w(rng)});
  const std::vector<NodeId> endpoints = {0, 1};
  const GeodesicTable t = precompute_geodesic_costs(g, 30, endpoints);
  for (const GraphEdge& e : g.edges) {
    if (e.u.kind != GraphVertex::Kind::point || e.v.kind != GraphVertex::Kind::point) continue;
    for (std::size_t c = 0; c < 2; ++c) {
      const auto x = static_cast<std::size_t>(e.u.id), y = static_cast<std::size_t>(e.v.id);
      CHECK(t.costs.value(x, c) <= e.weight + t.costs.value(y, c) + 1e-12);
      CHECK(t.costs.value(y, c) <= e.weight + t.costs.value(x, c) + 1e-12);
    }
  }
}

TEST_CASE("cost table rejects non-finite values and tracks forbidden entries") {
  CostTable t(2, 2);
  CHECK_FALSE(t.has_forbidden());
  CHECK_THROWS_AS(t.set(0, 0, std::nan("")), ConfigError);
  CHECK_THROWS_AS(t.set(0, 0, INFINITY), ConfigError);
  t.set(0, 1, 2.5);
  t.forbid(1, 0);
  CHECK(t.has_forbidden());
  CHECK(*t.at(0, 1) == 2.5);
  CHECK_FALSE(t.at(1, 0));
}

TEST_CASE("build_cost_table matches per-pair evaluation") {
  std::vector<Point> pts;
  for (int i = 0; i < 20; ++i) pts.push_back(Point{i, {i * 0.5, 10.0 - i}});
  const DemandMeasure m(pts, std::vector<double>(20, 0.05));
  const Network net({Node{0, 1.0, false, {}}, Node{1, 0.0, true, std::vector<double>{1.0, 2.0}},
                     Node{2, 0.0, true, std::vector<double>{8.0, -1.0}}},
                    {});
  const CostTable t = build_cost_table(EuclideanCost{}, m, net);
  for (int p = 0; p < 20; ++p) {
    CHECK(t.value(static_cast<std::size_t>(p), 0) ==
          *assignment_cost(EuclideanCost{}, net, 20, pts[static_cast<std::size_t>(p)], 1));
    CHECK(t.value(static_cast<std::size_t>(p), 1) ==
          *assignment_cost(EuclideanCost{}, net, 20, pts[static_cast<std::size_t>(p)], 2));
  }
}

TEST_CASE("quadratic arc minimizer closed form and clamping") {
  CHECK(arc_flow_minimizer(unit_arc(), 1.0) == doctest::Approx(0.5));
  CHECK(arc_flow_minimizer(unit_arc(), 4.0) == 1.0);
  CHECK(arc_flow_minimizer(unit_arc(), -4.0) == -1.0);
  CHECK_THROWS_AS(arc_flow_minimizer(unit_arc(), std::nan("")), NumericError);
}

TEST_CASE("arc dual value examples") {
  CHECK(arc_dual_value(unit_arc(), 2.0) == doctest::Approx(-1.0));
  CHECK(arc_dual_value(unit_arc(), 0.0) == doctest::Approx(0.0));
  CHECK(arc_dual_value(unit_arc(), 1.0) == doctest::Approx(-0.25));
  CHECK(arc_cost_value(unit_arc(3.0), 0.5) == doctest::Approx(0.75));
}

TEST_CASE("arc dual value is concave and the minimizer stays within bounds") {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(-10.0, 10.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int t = 0; t < 500; ++t) {
    const double lo = -3.0 * unit(rng), hi = 3.0 * unit(rng);
    const Arc arc = unit_arc(0.1 + 3.0 * unit(rng), lo, hi);
    const double d1 = u(rng), d2 = u(rng), lambda = unit(rng);
    const double mix = arc_dual_value(arc, lambda * d1 + (1 - lambda) * d2);
    CHECK(mix >= lambda * arc_dual_value(arc, d1) + (1 - lambda) * arc_dual_value(arc, d2) - 1e-10);
    const double p = arc_flow_minimizer(arc, d1);
    CHECK(p >= lo);
    CHECK(p <= hi);
  }
}

TEST_CASE("quadratic minimizer agrees with a brute-force grid") {
  std::mt19937_64 rng(12);
  std::uniform_real_distribution<double> u(-5.0, 5.0);
  const double step = 1e-4;
  for (int t = 0; t < 20; ++t) {
    const Arc arc = unit_arc(0.5 + std::fabs(u(rng)) / 5.0, -1.0, 1.0);
    const double delta = u(rng);
    double best_p = arc.lower;
    double best = INFINITY;
    for (double p = arc.lower; p <= arc.upper + 1e-12; p += step) {
      const double v = arc_cost_value(arc, p) - delta * p;
      if (v < best) {
        best = v;
        best_p = p;
      }
    }
    CHECK(std::fabs(arc_flow_minimizer(arc, delta) - best_p) <= step);
  }
}

TEST_CASE("generic arc costs use the supplied minimizer") {
  Arc arc{0, 1, -2.0, 2.0,
          GenericArcCost{[](double p) { return std::cosh(p); },
                         [](double delta, double lo, double hi) {
                           return std::clamp(std::asinh(delta), lo, hi);
                         }}};
  CHECK(arc_flow_minimizer(arc, 1.0) == doctest::Approx(std::asinh(1.0)));
  CHECK(arc_dual_value(arc, 0.0) == doctest::Approx(1.0));
  Arc bad = arc;
  std::get<GenericArcCost>(bad.cost).minimizer = [](double, double, double) { return 5.0; };
  CHECK_THROWS_AS(arc_flow_minimizer(bad, 0.0), NumericError);
}

TEST_CASE("cost kind names") {
  CHECK(std::string(cost_kind_name(EuclideanCost{})) == "euclidean");
  CHECK(std::string(cost_kind_name(GeodesicResistanceCost{})) == "geodesic_resistance");
}
