#include "sdotflow/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <string>

#include <omp.h>

namespace sdotflow {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kGridBudget = 2e6;

// Spanning forest of the underlying undirected graph. Nodes appear in BFS
// order; parent_arc is -1 at component roots.
struct Forest {
  std::vector<NodeId> order;
  std::vector<ArcId> parent_arc;
  std::vector<NodeId> parent;
  std::vector<ArcId> cotree;
};

Forest spanning_forest(const Network& net) {
  const std::size_t n = net.node_count();
  Forest f;
  f.parent_arc.assign(n, -1);
  f.parent.assign(n, -1);
  std::vector<char> seen(n, 0);
  std::vector<char> tree_arc(net.arc_count(), 0);
  for (std::size_t root = 0; root < n; ++root) {
    if (seen[root]) continue;
    seen[root] = 1;
    std::size_t head = f.order.size();
    f.order.push_back(static_cast<NodeId>(root));
    while (head < f.order.size()) {
      const NodeId v = f.order[head++];
      auto visit = [&](ArcId a, NodeId w) {
        if (seen[static_cast<std::size_t>(w)]) return;
        seen[static_cast<std::size_t>(w)] = 1;
        tree_arc[static_cast<std::size_t>(a)] = 1;
        f.parent_arc[static_cast<std::size_t>(w)] = a;
        f.parent[static_cast<std::size_t>(w)] = v;
        f.order.push_back(w);
      };
      for (ArcId a : net.outgoing(v)) visit(a, net.arc(a).head);
      for (ArcId a : net.incoming(v)) visit(a, net.arc(a).tail);
    }
  }
  for (std::size_t a = 0; a < net.arc_count(); ++a) {
    if (!tree_arc[a]) f.cotree.push_back(static_cast<ArcId>(a));
  }
  return f;
}

class FlowSolver {
 public:
  FlowSolver(const Problem& problem, double resolution)
      : net_(problem.network()), forest_(spanning_forest(net_)),
        resolution_(resolution) {
    scale_ = 1.0;
    for (const Node& node : net_.nodes()) scale_ += std::fabs(node.supply);
    scale_ += problem.measure().total_mass();
  }

  bool exact() const { return forest_.cotree.empty(); }

  // Net outflow requirement per node, s_i - m_i.
  bool solve(const std::vector<double>& required, std::vector<double>& flows, double& cost) const {
    flows.assign(net_.arc_count(), 0.0);
    if (forest_.cotree.empty()) {
      if (!complete_tree(required, flows)) return false;
      cost = flow_cost(flows);
      return true;
    }
    return grid_search(required, flows, cost);
  }

 private:
  // Fills tree-arc flows from the cotree flows already in `flows`.
  bool complete_tree(const std::vector<double>& required, std::vector<double>& flows) const {
    std::vector<double> r = required;
    for (ArcId a : forest_.cotree) {
      const Arc& arc = net_.arc(a);
      const double p = flows[static_cast<std::size_t>(a)];
      r[static_cast<std::size_t>(arc.tail)] -= p;
      r[static_cast<std::size_t>(arc.head)] += p;
    }
    for (auto it = forest_.order.rbegin(); it != forest_.order.rend(); ++it) {
      const auto v = static_cast<std::size_t>(*it);
      const ArcId a = forest_.parent_arc[v];
      if (a < 0) {
        if (std::fabs(r[v]) > 1e-9 * scale_) return false;
        continue;
      }
      const Arc& arc = net_.arc(a);
      const auto parent = static_cast<std::size_t>(forest_.parent[v]);
      double p;
      if (static_cast<std::size_t>(arc.tail) == v) {
        p = r[v];
        r[parent] += p;
      } else {
        p = -r[v];
        r[parent] -= p;
      }
      const double slack = 1e-12 * scale_;
      if (p < arc.lower - slack || p > arc.upper + slack) return false;
      flows[static_cast<std::size_t>(a)] = std::clamp(p, arc.lower, arc.upper);
    }
    return true;
  }

  double flow_cost(const std::vector<double>& flows) const {
    double c = 0.0;
    for (std::size_t a = 0; a < flows.size(); ++a) c += arc_cost_value(net_.arc(static_cast<ArcId>(a)), flows[a]);
    return c;
  }

  // Coarse-to-fine search over the cotree box. Each pass uses at most
  // kGridBudget points and then zooms to two cells around the incumbent.
  bool grid_search(const std::vector<double>& required, std::vector<double>& flows,
                   double& cost) const {
    const std::size_t k = forest_.cotree.size();
    std::vector<double> lo(k), hi(k);
    for (std::size_t j = 0; j < k; ++j) {
      const Arc& arc = net_.arc(forest_.cotree[j]);
      lo[j] = arc.lower;
      hi[j] = arc.upper;
    }
    const auto per_dim_cap =
        static_cast<std::size_t>(std::floor(std::pow(kGridBudget, 1.0 / static_cast<double>(k))));

    std::vector<double> trial(net_.arc_count(), 0.0);
    std::vector<double> best_flows;
    double best = kInf;
    for (int pass = 0; pass < 64; ++pass) {
      std::vector<std::size_t> count(k);
      std::vector<double> step(k);
      bool fine = true;
      for (std::size_t j = 0; j < k; ++j) {
        const double width = hi[j] - lo[j];
        const auto wanted = static_cast<std::size_t>(std::floor(width / resolution_ + 1e-9)) + 1;
        count[j] = std::max<std::size_t>(1, std::min(wanted, std::max<std::size_t>(per_dim_cap, 2)));
        if (count[j] < wanted) fine = false;
        step[j] = count[j] > 1 ? width / static_cast<double>(count[j] - 1) : 0.0;
      }
      std::vector<std::size_t> idx(k, 0);
      std::vector<double> best_coords;
      bool found = false;
      double pass_best = kInf;
      while (true) {
        std::fill(trial.begin(), trial.end(), 0.0);
        for (std::size_t j = 0; j < k; ++j) {
          trial[static_cast<std::size_t>(forest_.cotree[j])] =
              lo[j] + step[j] * static_cast<double>(idx[j]);
        }
        if (complete_tree(required, trial)) {
          const double c = flow_cost(trial);
          if (c < pass_best) {
            pass_best = c;
            found = true;
            best_coords.resize(k);
            for (std::size_t j = 0; j < k; ++j) {
              best_coords[j] = trial[static_cast<std::size_t>(forest_.cotree[j])];
            }
            if (c < best) {
              best = c;
              best_flows = trial;
            }
          }
        }
        std::size_t j = 0;
        while (j < k && ++idx[j] == count[j]) idx[j++] = 0;
        if (j == k) break;
      }
      if (!found || fine) break;
      for (std::size_t j = 0; j < k; ++j) {
        const Arc& arc = net_.arc(forest_.cotree[j]);
        lo[j] = std::max(arc.lower, best_coords[j] - 2.0 * step[j]);
        hi[j] = std::min(arc.upper, best_coords[j] + 2.0 * step[j]);
      }
    }
    if (best == kInf) return false;
    flows = std::move(best_flows);
    cost = best;
    return true;
  }

  const Network& net_;
  Forest forest_;
  double resolution_;
  double scale_ = 1.0;
};

std::vector<double> node_requirements(const Problem& problem, const std::vector<double>& demand) {
  const Network& net = problem.network();
  std::vector<double> r(net.node_count());
  for (const Node& node : net.nodes()) {
    r[static_cast<std::size_t>(node.id)] = node.supply;
    const int column = problem.endpoint_column(node.id);
    if (column >= 0) r[static_cast<std::size_t>(node.id)] -= demand[static_cast<std::size_t>(column)];
  }
  return r;
}

}  // namespace

bool oracle_flow_subproblem(const Problem& problem, const std::vector<double>& endpoint_demand,
                            double flow_grid_resolution, FlowState& flows, double& cost) {
  if (!(flow_grid_resolution > 0.0)) throw ParameterError("flow grid resolution must be positive");
  FlowSolver solver(problem, flow_grid_resolution);
  return solver.solve(node_requirements(problem, endpoint_demand), flows.flows, cost);
}

OracleResult brute_force(const Problem& problem, double flow_grid_resolution) {
  if (!(flow_grid_resolution > 0.0)) throw ParameterError("flow grid resolution must be positive");
  const Network& net = problem.network();
  const CostTable& costs = problem.costs();
  const std::size_t n = costs.points();
  const std::size_t s = costs.endpoints();
  if (net.arc_count() > kOracleArcLimit) {
    throw InstanceTooLargeError("oracle supports at most " + std::to_string(kOracleArcLimit) +
                                " arcs, got " + std::to_string(net.arc_count()));
  }
  std::uint64_t total = 1;
  for (std::size_t i = 0; i < n; ++i) {
    if (total > kOracleAssignmentLimit / std::max<std::size_t>(s, 1)) {
      throw InstanceTooLargeError("|S|^n exceeds " + std::to_string(kOracleAssignmentLimit));
    }
    total *= s;
  }
  if (total > kOracleAssignmentLimit) {
    throw InstanceTooLargeError("|S|^n exceeds " + std::to_string(kOracleAssignmentLimit));
  }

  const FlowSolver solver(problem, flow_grid_resolution);
  const auto masses = problem.measure().masses();
  const auto endpoints = problem.endpoints();

  struct Best {
    double cost = kInf;
    std::uint64_t index = 0;
    std::vector<double> flows;
    std::uint64_t feasible = 0;
  };

  const int threads = omp_get_max_threads();
  std::vector<Best> per_thread(static_cast<std::size_t>(threads));

#pragma omp parallel num_threads(threads)
  {
    Best& mine = per_thread[static_cast<std::size_t>(omp_get_thread_num())];
    std::vector<std::size_t> digits(n);
    std::vector<double> demand(s);
    std::vector<double> flows;
    std::map<std::vector<double>, std::pair<bool, std::pair<double, std::vector<double>>>> memo;
#pragma omp for schedule(static)
    for (std::int64_t t = 0; t < static_cast<std::int64_t>(total); ++t) {
      // Point 0 is the most significant digit, so index order is
      // lexicographic order of assignments.
      auto rest = static_cast<std::uint64_t>(t);
      for (std::size_t i = n; i-- > 0;) {
        digits[i] = rest % s;
        rest /= s;
      }
      double transport = 0.0;
      bool allowed = true;
      std::fill(demand.begin(), demand.end(), 0.0);
      for (std::size_t i = 0; i < n; ++i) {
        if (costs.forbidden(i, digits[i])) {
          allowed = false;
          break;
        }
        transport += masses[i] * costs.value(i, digits[i]);
        demand[digits[i]] += masses[i];
      }
      if (!allowed) continue;
      double flow_cost = 0.0;
      bool ok;
      if (solver.exact()) {
        ok = solver.solve(node_requirements(problem, demand), flows, flow_cost);
      } else {
        auto it = memo.find(demand);
        if (it == memo.end()) {
          double c = 0.0;
          std::vector<double> f;
          const bool feasible = solver.solve(node_requirements(problem, demand), f, c);
          it = memo.emplace(demand, std::make_pair(feasible, std::make_pair(c, std::move(f)))).first;
        }
        ok = it->second.first;
        flow_cost = it->second.second.first;
        if (ok) flows = it->second.second.second;
      }
      if (!ok) continue;
      ++mine.feasible;
      const double value = transport + flow_cost;
      if (value < mine.cost) {
        mine.cost = value;
        mine.index = static_cast<std::uint64_t>(t);
        mine.flows = flows;
      }
    }
  }

  Best best;
  for (Best& b : per_thread) {
    best.feasible += b.feasible;
    if (b.cost < best.cost || (b.cost == best.cost && b.cost < kInf && b.index < best.index)) {
      best.cost = b.cost;
      best.index = b.index;
      best.flows = std::move(b.flows);
    }
  }
  if (best.cost == kInf) {
    throw InfeasibleInstanceError("no assignment admits a flow within the arc bounds");
  }

  OracleResult result;
  result.enumerated = total;
  result.feasible = best.feasible;
  result.best_cost = best.cost;
  result.best_flows.flows = std::move(best.flows);
  result.exact = solver.exact();
  result.best_assignment.resize(n);
  std::uint64_t rest = best.index;
  for (std::size_t i = n; i-- > 0;) {
    result.best_assignment[i] = endpoints[rest % s];
    rest /= s;
  }
  return result;
}

GapReport duality_gap_check(double dual_value, double primal_value, const OracleResult& oracle,
                            double relative_tolerance) {
  GapReport r;
  r.best_cost = oracle.best_cost;
  r.dual_value = dual_value;
  r.primal_value = primal_value;
  r.dual_gap = std::fabs(dual_value - oracle.best_cost);
  r.primal_gap = std::fabs(primal_value - oracle.best_cost);
  r.tolerance = relative_tolerance * (1.0 + std::fabs(oracle.best_cost));
  r.passed = r.dual_gap <= r.tolerance && r.primal_gap <= r.tolerance;
  return r;
}

GapReport duality_gap_check(const SolveReport& report, const OracleResult& oracle,
                            double relative_tolerance) {
  return duality_gap_check(report.dual_value, report.primal_value, oracle, relative_tolerance);
}

}  // namespace sdotflow
