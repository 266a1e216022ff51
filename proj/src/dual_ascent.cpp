#include "sdotflow/dual_ascent.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

namespace sdotflow {

StepSchedule StepSchedule::harmonic(double a, double b) {
  if (!(a > 0.0) || !(b > 0.0) || !std::isfinite(a) || !std::isfinite(b)) {
    throw ParameterError("harmonic step schedule needs a > 0 and b > 0");
  }
  return StepSchedule(HarmonicStep{a, b});
}

StepSchedule StepSchedule::constant(double gamma) {
  if (!(gamma > 0.0) || !std::isfinite(gamma)) {
    throw ParameterError("constant step size must be positive");
  }
  return StepSchedule(ConstantStep{gamma});
}

double StepSchedule::gamma(int k) const {
  if (const auto* h = std::get_if<HarmonicStep>(&kind_)) {
    return h->a / (1.0 + h->b * static_cast<double>(k));
  }
  return std::get<ConstantStep>(kind_).gamma;
}

const char* termination_name(Termination t) {
  return t == Termination::epsilon_reached ? "epsilon_reached" : "max_iterations";
}

double max_abs(std::span<const double> values) {
  double m = 0.0;
  for (double v : values) m = std::max(m, std::fabs(v));
  return m;
}

FlowState arc_flows(const Problem& problem, std::span<const double> psi) {
  const auto arcs = problem.network().arcs();
  FlowState state;
  state.flows.resize(arcs.size());
  for (std::size_t a = 0; a < arcs.size(); ++a) {
    const Arc& arc = arcs[a];
    state.flows[a] = arc_flow_minimizer(
        arc, psi[static_cast<std::size_t>(arc.tail)] - psi[static_cast<std::size_t>(arc.head)]);
  }
  return state;
}

double dual_value(const Problem& problem, std::span<const double> psi,
                  const CellMassReport& cells) {
  double q = cells.adjusted_cost_integral;
  for (const Node& node : problem.network().nodes()) {
    q += psi[static_cast<std::size_t>(node.id)] * node.supply;
  }
  for (const Arc& arc : problem.network().arcs()) {
    q += arc_dual_value(
        arc, psi[static_cast<std::size_t>(arc.tail)] - psi[static_cast<std::size_t>(arc.head)]);
  }
  return q;
}

double dual_value(const Problem& problem, std::span<const double> psi) {
  return dual_value(problem, psi, compute_cells(problem, psi));
}

double supergradient_component(double supply, std::optional<double> cell_mass,
                               std::span<const double> outgoing_flows,
                               std::span<const double> incoming_flows) {
  double g = supply;
  if (cell_mass) g -= *cell_mass;
  for (double p : outgoing_flows) g -= p;
  for (double p : incoming_flows) g += p;
  return g;
}

std::vector<double> supergradient(const Problem& problem, const FlowState& flows,
                                  const CellMassReport& cells) {
  const Network& net = problem.network();
  std::vector<double> g(net.node_count());
  std::vector<double> out;
  std::vector<double> in;
  for (const Node& node : net.nodes()) {
    out.clear();
    in.clear();
    for (ArcId a : net.outgoing(node.id)) out.push_back(flows.flows[static_cast<std::size_t>(a)]);
    for (ArcId a : net.incoming(node.id)) in.push_back(flows.flows[static_cast<std::size_t>(a)]);
    std::optional<double> mass;
    const int column = problem.endpoint_column(node.id);
    if (column >= 0) mass = cells.masses[static_cast<std::size_t>(column)];
    g[static_cast<std::size_t>(node.id)] = supergradient_component(node.supply, mass, out, in);
  }
  return g;
}

std::vector<double> supergradient(const Problem& problem, std::span<const double> psi,
                                  const CellMassReport& cells) {
  return supergradient(problem, arc_flows(problem, psi), cells);
}

DualState ascent_step(const DualState& state, std::span<const double> g,
                      const StepSchedule& schedule) {
  const double gamma = schedule.gamma(state.iteration);
  DualState next;
  next.iteration = state.iteration + 1;
  next.psi.resize(state.psi.size());
  for (std::size_t i = 0; i < state.psi.size(); ++i) {
    next.psi[i] = state.psi[i] + gamma * g[i];
    if (!std::isfinite(next.psi[i])) {
      throw DivergenceError("psi[" + std::to_string(i) + "] became non-finite at iteration " +
                                std::to_string(state.iteration),
                            {});
    }
  }
  return next;
}

namespace {

Partition partition_from(const CellMassReport& cells) {
  Partition partition;
  partition.assignment = cells.assignment;
  partition.endpoints = cells.endpoints;
  partition.cell_masses = cells.masses;
  return partition;
}

bool uses_generic_arcs(const Problem& problem) {
  const auto arcs = problem.network().arcs();
  return std::any_of(arcs.begin(), arcs.end(), [](const Arc& arc) {
    return std::holds_alternative<GenericArcCost>(arc.cost);
  });
}

}  // namespace

PrimalSolution reconstruct_primal(const Problem& problem, std::span<const double> psi,
                                  double tie_epsilon) {
  const CellMassReport cells = compute_cells(problem, psi, tie_epsilon);
  PrimalSolution solution;
  solution.partition = partition_from(cells);
  solution.flows = arc_flows(problem, psi);

  const CostTable& costs = problem.costs();
  const auto masses = problem.measure().masses();
  double value = 0.0;
  for (std::size_t p = 0; p < masses.size(); ++p) {
    const int column = problem.endpoint_column(cells.assignment[p]);
    value += masses[p] * costs.value(p, static_cast<std::size_t>(column));
  }
  const auto arcs = problem.network().arcs();
  for (std::size_t a = 0; a < arcs.size(); ++a) {
    value += arc_cost_value(arcs[a], solution.flows.flows[a]);
  }
  solution.primal_value = value;
  return solution;
}

SolveReport solve(const Problem& problem, const SolveOptions& options) {
  if (options.max_iterations < 0) throw ParameterError("max_iterations must be >= 0");
  if (options.dual_every < 1) throw ParameterError("dual_every must be >= 1");
  if (!(options.epsilon >= 0.0)) throw ParameterError("epsilon must be >= 0");

  const std::size_t n = problem.node_count();
  DualState state;
  state.psi = options.initial_psi.value_or(std::vector<double>(n, 0.0));
  if (state.psi.size() != n) throw ParameterError("initial psi has the wrong length");

  const auto* stochastic = std::get_if<StochasticMasses>(&options.mass_mode);
  if (stochastic && stochastic->n_samples == 0) {
    throw ParameterError("stochastic mass mode needs n_samples >= 1");
  }
  std::mt19937_64 rng(stochastic ? stochastic->seed : 0);

  SolveReport report;
  report.termination = Termination::max_iterations;
  for (int k = 0; k < options.max_iterations; ++k) {
    const auto endpoint_psi = problem.endpoint_psi(state.psi);
    CellMassReport cells;
    if (stochastic) {
      cells = estimate_cell_masses(problem.measure(), problem.costs(), endpoint_psi,
                                   problem.endpoints(), stochastic->n_samples, rng,
                                   options.tie_epsilon);
    } else {
      cells = compute_cells(problem.measure(), problem.costs(), endpoint_psi, problem.endpoints(),
                            options.tie_epsilon);
    }
    const FlowState flows = arc_flows(problem, state.psi);
    const std::vector<double> g = supergradient(problem, flows, cells);

    TraceRecord record;
    record.k = k;
    record.gamma = options.schedule.gamma(state.iteration);
    record.max_abs_g = max_abs(g);
    if (k % options.dual_every == 0) {
      record.dual_value = stochastic ? dual_value(problem, state.psi)
                                     : dual_value(problem, state.psi, cells);
    }
    report.trace.push_back(record);

    DualState next;
    try {
      next = ascent_step(state, g, options.schedule);
    } catch (const DivergenceError& e) {
      throw DivergenceError(e.what(), report.trace);
    }
    if (max_abs(next.psi) > options.divergence_limit) {
      throw DivergenceError("max |psi| exceeded " + std::to_string(options.divergence_limit) +
                                " at iteration " + std::to_string(k),
                            report.trace);
    }
    double change = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      change = std::max(change, std::fabs(next.psi[i] - state.psi[i]));
    }
    state = std::move(next);
    if (options.record_psi_history) report.psi_history.push_back(state.psi);
    if (change < options.epsilon) {
      report.termination = Termination::epsilon_reached;
      break;
    }
  }

  const CellMassReport cells = compute_cells(problem, state.psi, options.tie_epsilon);
  PrimalSolution primal = reconstruct_primal(problem, state.psi, options.tie_epsilon);
  report.iterations = state.iteration;
  report.dual_value = dual_value(problem, state.psi, cells);
  report.final_max_abs_g = max_abs(supergradient(problem, primal.flows, cells));
  report.primal_value = primal.primal_value;
  report.gap = report.primal_value - report.dual_value;
  report.flows = std::move(primal.flows);
  report.partition = std::move(primal.partition);
  report.psi_final = std::move(state);
  report.assumes_unique_arc_minimizers = uses_generic_arcs(problem);
  return report;
}

Certificate certify(const Problem& problem, std::span<const double> psi,
                    const Partition& partition, const FlowState& flows) {
  const Network& net = problem.network();
  const CostTable& costs = problem.costs();
  Certificate cert;

  const auto arcs = net.arcs();
  cert.arc_residuals.resize(arcs.size());
  for (std::size_t a = 0; a < arcs.size(); ++a) {
    const Arc& arc = arcs[a];
    const double delta =
        psi[static_cast<std::size_t>(arc.tail)] - psi[static_cast<std::size_t>(arc.head)];
    const double p = flows.flows[a];
    cert.arc_residuals[a] = arc_cost_value(arc, p) - delta * p - arc_dual_value(arc, delta);
  }

  const auto endpoint_psi = problem.endpoint_psi(psi);
  cert.point_residuals.resize(costs.points());
  for (std::size_t p = 0; p < costs.points(); ++p) {
    const int column = problem.endpoint_column(partition.assignment[p]);
    if (column < 0 || costs.forbidden(p, static_cast<std::size_t>(column))) {
      throw ConfigError("certify: point " + std::to_string(p) +
                        " is assigned to a non-endpoint or forbidden endpoint");
    }
    const Assignment best = assign_row(costs, p, endpoint_psi);
    const auto c = static_cast<std::size_t>(column);
    cert.point_residuals[p] = (costs.value(p, c) - endpoint_psi[c]) - best.min_adjusted_cost;
  }

  cert.flow_balance_residuals.resize(net.node_count());
  for (const Node& node : net.nodes()) {
    double net_out = 0.0;
    for (ArcId a : net.outgoing(node.id)) net_out += flows.flows[static_cast<std::size_t>(a)];
    for (ArcId a : net.incoming(node.id)) net_out -= flows.flows[static_cast<std::size_t>(a)];
    double required = node.supply;
    if (node.is_endpoint) required -= partition.cell_mass(node.id);
    cert.flow_balance_residuals[static_cast<std::size_t>(node.id)] = net_out - required;
  }

  double m = 0.0;
  for (double r : cert.arc_residuals) m = std::max(m, r);
  for (double r : cert.point_residuals) m = std::max(m, r);
  for (double r : cert.flow_balance_residuals) m = std::max(m, std::fabs(r));
  cert.max_residual = m;
  return cert;
}

}  // namespace sdotflow
