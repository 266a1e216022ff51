#include <doctest.h>

#include <random>

#include "fixtures.hpp"
#include "sdotflow/dual_ascent.hpp"
#include "sdotflow/oracle.hpp"
#include "sdotflow/scenarios.hpp"

using namespace sdotflow;

namespace {

const std::vector<double> kOptimum = {2.0, 0.0};

// One endpoint, no arcs, one unit point at cost 0, supply 1.
Problem lone_endpoint() {
  Scenario s;
  s.dimension = 1;
  s.measure = DemandMeasure({Point{0, {0.0}}}, {1.0});
  s.network = Network({Node{0, 1.0, true, std::vector<double>{0.0}}}, {});
  CostTable t(1, 1);
  t.set(0, 0, 0.0);
  s.assignment_cost = TableCost{t};
  return Problem(s);
}

Problem small_synthetic() {
  SyntheticParams p;
  p.grid_n = 40;
  return Problem(generate_synthetic(p));
}

}  // namespace

TEST_CASE("step schedules") {
  const StepSchedule h = StepSchedule::harmonic(1.0, 0.01);
  CHECK(h.gamma(0) == 1.0);
  CHECK(h.gamma(100) == doctest::Approx(0.5));
  CHECK(h.diminishing());
  CHECK_FALSE(StepSchedule::constant(0.1).diminishing());
  CHECK_THROWS_AS(StepSchedule::harmonic(0.0, 1.0), ParameterError);
  CHECK_THROWS_AS(StepSchedule::harmonic(1.0, 0.0), ParameterError);
  CHECK_THROWS_AS(StepSchedule::constant(-1.0), ParameterError);
}

TEST_CASE("dual value of a lone endpoint is identically zero") {
  const Problem p = lone_endpoint();
  for (double psi : {-5.0, 0.0, 1.5, 1e6}) CHECK(dual_value(p, std::vector<double>{psi}) == doctest::Approx(0.0));
}

TEST_CASE("two-node fixture: dual value, supergradient and primal at the optimum") {
  const Problem p(fixtures::two_node());
  CHECK(dual_value(p, kOptimum) == doctest::Approx(1.0));
  const auto g = supergradient(p, kOptimum, compute_cells(p, kOptimum));
  CHECK(g[0] == doctest::Approx(0.0));
  CHECK(g[1] == doctest::Approx(0.0));
  const PrimalSolution primal = reconstruct_primal(p, kOptimum);
  CHECK(primal.flows.flows == std::vector<double>{1.0});
  CHECK(primal.partition.assignment == std::vector<NodeId>{1});
  CHECK(primal.primal_value == doctest::Approx(1.0));
}

TEST_CASE("balanced isolated endpoint has zero supergradient") {
  const Problem p = lone_endpoint();
  const std::vector<double> psi = {3.0};
  CHECK(supergradient(p, psi, compute_cells(p, psi))[0] == 0.0);
}

TEST_CASE("supergradient component sums in the declared order") {
  CHECK(supergradient_component(1.0, 0.25, std::vector<double>{0.5}, std::vector<double>{0.125}) ==
        0.375);
  CHECK(supergradient_component(2.0, std::nullopt, {}, {}) == 2.0);
}

TEST_CASE("ascent step arithmetic") {
  const StepSchedule h = StepSchedule::harmonic(1.0, 0.01);
  DualState s{{0.5, -0.5}, 0};
  const DualState same = ascent_step(s, std::vector<double>{0.0, 0.0}, h);
  CHECK(same.psi == s.psi);
  CHECK(same.iteration == 1);
  const DualState moved = ascent_step(DualState{{0.0, 0.0}, 0}, std::vector<double>{1.0, -1.0}, h);
  CHECK(moved.psi == std::vector<double>{1.0, -1.0});
  CHECK_THROWS_AS(ascent_step(s, std::vector<double>{INFINITY, 0.0}, h), DivergenceError);
}

TEST_CASE("solve stops after one iteration at an optimal start") {
  const Problem p(fixtures::two_node());
  SolveOptions o;
  o.initial_psi = kOptimum;
  const SolveReport r = solve(p, o);
  CHECK(r.termination == Termination::epsilon_reached);
  CHECK(r.iterations == 1);
  CHECK(r.trace.size() == 1);
  CHECK(r.gap == doctest::Approx(0.0));
}

TEST_CASE("solve converges on the two-node fixture from zero") {
  const Problem p(fixtures::two_node());
  const SolveReport r = solve(p);
  CHECK(r.termination == Termination::epsilon_reached);
  CHECK(r.primal_value == doctest::Approx(1.0));
  CHECK(r.dual_value == doctest::Approx(1.0));
  CHECK(r.flows.flows[0] == doctest::Approx(1.0));
  CHECK_FALSE(r.assumes_unique_arc_minimizers);
}

TEST_CASE("huge constant steps are captured without crashing") {
  const Problem p(fixtures::two_node());
  SolveOptions o;
  o.schedule = StepSchedule::constant(1e6);
  o.max_iterations = 50;
  try {
    const SolveReport r = solve(p, o);
    CHECK(r.trace.size() <= 50);
    CHECK(std::isfinite(r.dual_value));
  } catch (const DivergenceError& e) {
    CHECK_FALSE(e.trace().empty());
  }
}

TEST_CASE("divergence guard trips on an unbounded dual") {
  // Supply at a node with no arcs and no endpoint role: g = s forever.
  Scenario s = fixtures::two_node();
  s.network = Network({Node{0, 1.0, false, {}}, Node{1, 0.0, true, std::vector<double>{0.0}}}, {});
  const Problem p(s);
  SolveOptions o;
  o.schedule = StepSchedule::constant(1e11);
  o.max_iterations = 100;
  CHECK_THROWS_AS(solve(p, o), DivergenceError);
}

TEST_CASE("solve validates its options") {
  const Problem p(fixtures::two_node());
  SolveOptions o;
  o.max_iterations = -1;
  CHECK_THROWS_AS(solve(p, o), ParameterError);
  o = {};
  o.initial_psi = std::vector<double>{1.0};
  CHECK_THROWS_AS(solve(p, o), ParameterError);
  o = {};
  o.mass_mode = StochasticMasses{0, 1};
  CHECK_THROWS_AS(solve(p, o), ParameterError);
}

TEST_CASE("trace records the dual value every dual_every iterations") {
  const Problem p = small_synthetic();
  SolveOptions o;
  o.max_iterations = 25;
  o.epsilon = 0.0;
  o.dual_every = 10;
  const SolveReport r = solve(p, o);
  REQUIRE(r.trace.size() == 25);
  for (const TraceRecord& rec : r.trace) CHECK(rec.dual_value.has_value() == (rec.k % 10 == 0));
  CHECK(r.trace[3].gamma == doctest::Approx(1.0 / 1.03));
}

TEST_CASE("synthetic run decreases the supergradient and balances the cells") {
  const Problem p = small_synthetic();
  const SolveReport r = solve(p);
  CHECK(r.final_max_abs_g < 0.05 * r.trace.front().max_abs_g);
  CHECK(r.partition.cell_masses[0] == doctest::Approx(0.5).epsilon(0.04));
  // Before exact convergence the reconstructed flows need not conserve
  // mass; the gap is then exactly -psi . g.
  const auto g = supergradient(p, r.flows, compute_cells(p, r.psi_final.psi));
  double psi_dot_g = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) psi_dot_g += r.psi_final.psi[i] * g[i];
  CHECK(r.gap == doctest::Approx(-psi_dot_g).epsilon(1e-9));
  const Certificate c = certify(p, r.psi_final.psi, r.partition, r.flows);
  for (std::size_t a = 0; a < r.flows.flows.size(); ++a) {
    const Arc& arc = p.network().arc(static_cast<ArcId>(a));
    CHECK(r.flows.flows[a] >= arc.lower);
    CHECK(r.flows.flows[a] <= arc.upper);
  }
  for (double b : c.flow_balance_residuals) CHECK(std::fabs(b) < 0.05);
}

TEST_CASE("stochastic mode is reproducible for a fixed seed") {
  const Problem p = small_synthetic();
  SolveOptions o;
  o.mass_mode = StochasticMasses{2000, 5};
  o.max_iterations = 40;
  const SolveReport a = solve(p, o);
  const SolveReport b = solve(p, o);
  CHECK(a.psi_final.psi == b.psi_final.psi);
  CHECK(a.partition.assignment.size() == p.measure().size());
}

TEST_CASE("reconstructed flows give zero arc residuals") {
  std::mt19937_64 rng(2);
  const Problem p = small_synthetic();
  std::uniform_real_distribution<double> u(-20, 20);
  for (int t = 0; t < 10; ++t) {
    std::vector<double> psi(p.node_count());
    for (double& v : psi) v = u(rng);
    const PrimalSolution s = reconstruct_primal(p, psi);
    const Certificate c = certify(p, psi, s.partition, s.flows);
    for (double b : c.arc_residuals) CHECK(std::fabs(b) <= 1e-12);
    for (double a : c.point_residuals) CHECK(a == 0.0);
  }
}

TEST_CASE("certificate at a non-optimal point has positive residuals") {
  const Problem p(fixtures::two_node());
  const std::vector<double> psi = {0.0, 0.0};
  Partition part{{1}, {1}, {1.0}};
  const Certificate c = certify(p, psi, part, FlowState{{0.5}});
  CHECK(c.arc_residuals[0] > 0.0);
  CHECK(c.max_residual > 0.0);
  const Certificate opt = certify(p, kOptimum, part, FlowState{{1.0}});
  CHECK(opt.max_residual <= 1e-12);
}

TEST_CASE("single endpoint without arcs: primal is the transport cost") {
  Scenario s;
  s.dimension = 1;
  s.measure = DemandMeasure({Point{0, {0.0}}, Point{1, {0.0}}}, {0.25, 0.75});
  s.network = Network({Node{0, 1.0, true, {}}}, {});
  CostTable t(2, 1);
  t.set(0, 0, 2.0);
  t.set(1, 0, 4.0);
  s.assignment_cost = TableCost{t};
  const Problem p(s);
  CHECK(reconstruct_primal(p, std::vector<double>{9.0}).primal_value == doctest::Approx(3.5));
}

TEST_CASE("weak duality against the oracle on small instances") {
  std::mt19937_64 rng(40);
  for (int t = 0; t < 10; ++t) {
    const Problem p(fixtures::random_small(rng, 4, 4, 2));
    const OracleResult o = brute_force(p);
    std::uniform_real_distribution<double> u(-3, 3);
    for (int k = 0; k < 20; ++k) {
      std::vector<double> psi(p.node_count());
      for (double& v : psi) v = u(rng);
      CHECK(dual_value(p, psi) <= o.best_cost + 1e-8);
    }
  }
}

TEST_CASE("generic arc costs are flagged in the report") {
  Scenario s = fixtures::two_node();
  s.network = Network(
      {Node{0, 1.0, false, {}}, Node{1, 0.0, true, std::vector<double>{0.0}}},
      {Arc{0, 1, -1.0, 1.0,
           GenericArcCost{[](double p) { return p * p; },
                          [](double d, double lo, double hi) { return std::clamp(d / 2, lo, hi); }}}});
  const Problem p(s);
  const SolveReport r = solve(p);
  CHECK(r.assumes_unique_arc_minimizers);
  CHECK(r.primal_value == doctest::Approx(1.0));
}
