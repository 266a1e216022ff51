#include "sdotflow/distributed.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <string>
#include <tuple>

#include "sdotflow/laguerre.hpp"

namespace sdotflow {

namespace {

std::atomic<std::uint64_t> g_foreign_reads{0};
thread_local NodeId g_acting = -1;

}  // namespace

const char* message_kind_name(MessageKind kind) {
  switch (kind) {
    case MessageKind::psi_share: return "psi_share";
    case MessageKind::flow_share: return "flow_share";
    case MessageKind::endpoint_psi_broadcast: return "endpoint_psi_broadcast";
    case MessageKind::converged: return "converged";
  }
  return "unknown";
}

ActingAs::ActingAs(NodeId node) : previous_(g_acting) { g_acting = node; }
ActingAs::~ActingAs() { g_acting = previous_; }

std::uint64_t foreign_state_reads() { return g_foreign_reads.load(); }
void reset_foreign_state_reads() { g_foreign_reads.store(0); }

std::vector<Message> transport_deliver(std::vector<Message> messages, DeliveryPolicy policy,
                                       int round) {
  if (policy != DeliveryPolicy::synchronous) {
    throw ParameterError("delivery policy not supported; only synchronous is implemented");
  }
  for (const Message& m : messages) {
    if (m.round != round) {
      throw TransportFault("message from node " + std::to_string(m.sender) + " tagged round " +
                           std::to_string(m.round) + " during round " + std::to_string(round));
    }
  }
  std::stable_sort(messages.begin(), messages.end(), [](const Message& a, const Message& b) {
    return std::tie(a.sender, a.arc, a.recipient, a.kind) <
           std::tie(b.sender, b.arc, b.recipient, b.kind);
  });
  return messages;
}

Agent::Agent(const Problem& problem, NodeId node, double initial_psi, double epsilon)
    : problem_(&problem), epsilon_(epsilon) {
  const Network& net = problem.network();
  const Node& self = net.node(node);
  state_.node = node;
  state_.psi = initial_psi;
  state_.psi_old = initial_psi;
  state_.supply = self.supply;
  state_.is_endpoint = self.is_endpoint;
  column_ = problem.endpoint_column(node);

  const auto out = net.outgoing(node);
  const auto in = net.incoming(node);
  out_arcs_.assign(out.begin(), out.end());
  in_arcs_.assign(in.begin(), in.end());
  for (ArcId a : out_arcs_) neighbours_.push_back(net.arc(a).head);
  for (ArcId a : in_arcs_) neighbours_.push_back(net.arc(a).tail);
  std::sort(neighbours_.begin(), neighbours_.end());
  neighbours_.erase(std::unique(neighbours_.begin(), neighbours_.end()), neighbours_.end());
  for (NodeId n : neighbours_) state_.neighbour_converged[n] = false;
}

const AgentState& Agent::state() const {
  if (g_acting >= 0 && g_acting != state_.node) ++g_foreign_reads;
  return state_;
}

std::vector<Message> Agent::take_inbox(MessageKind kind) {
  std::vector<Message> taken;
  auto keep = state_.inbox.begin();
  for (auto it = state_.inbox.begin(); it != state_.inbox.end(); ++it) {
    if (it->kind == kind) {
      taken.push_back(*it);
    } else {
      *keep++ = *it;
    }
  }
  state_.inbox.erase(keep, state_.inbox.end());
  return taken;
}

std::vector<Message> Agent::share_psi(int round) {
  std::vector<Message> out;
  for (ArcId a : in_arcs_) {
    Message m;
    m.kind = MessageKind::psi_share;
    m.sender = state_.node;
    m.recipient = problem_->network().arc(a).tail;
    m.round = round;
    m.arc = a;
    m.value = state_.psi;
    out.push_back(m);
  }
  return out;
}

std::vector<Message> Agent::compute_flows(int round) {
  for (const Message& m : take_inbox(MessageKind::psi_share)) neighbour_psi_[m.sender] = m.value;

  std::vector<Message> out;
  state_.outgoing_flows.clear();
  for (ArcId a : out_arcs_) {
    const Arc& arc = problem_->network().arc(a);
    const auto it = neighbour_psi_.find(arc.head);
    if (it == neighbour_psi_.end()) {
      throw TransportFault("node " + std::to_string(state_.node) + " missing psi of node " +
                           std::to_string(arc.head) + " in round " + std::to_string(round));
    }
    const double p = arc_flow_minimizer(arc, state_.psi - it->second);
    state_.outgoing_flows[a] = p;
    Message m;
    m.kind = MessageKind::flow_share;
    m.sender = state_.node;
    m.recipient = arc.head;
    m.round = round;
    m.arc = a;
    m.value = p;
    out.push_back(m);
  }
  if (state_.is_endpoint) {
    for (NodeId other : problem_->endpoints()) {
      if (other == state_.node) continue;
      Message m;
      m.kind = MessageKind::endpoint_psi_broadcast;
      m.sender = state_.node;
      m.recipient = other;
      m.round = round;
      m.endpoint = state_.node;
      m.value = state_.psi;
      out.push_back(m);
    }
  }
  return out;
}

void Agent::update(int round, double gamma) {
  incoming_flows_.clear();
  for (const Message& m : take_inbox(MessageKind::flow_share)) incoming_flows_[m.arc] = m.value;
  endpoint_psi_.clear();
  for (const Message& m : take_inbox(MessageKind::endpoint_psi_broadcast)) {
    endpoint_psi_[m.endpoint] = m.value;
  }

  std::vector<double> out_flows;
  for (ArcId a : out_arcs_) out_flows.push_back(state_.outgoing_flows.at(a));
  std::vector<double> in_flows;
  for (ArcId a : in_arcs_) {
    const auto it = incoming_flows_.find(a);
    if (it == incoming_flows_.end()) {
      throw TransportFault("node " + std::to_string(state_.node) + " missing flow on arc " +
                           std::to_string(a) + " in round " + std::to_string(round));
    }
    in_flows.push_back(it->second);
  }

  std::optional<double> mass;
  if (state_.is_endpoint) {
    endpoint_psi_[state_.node] = state_.psi;
    const auto endpoints = problem_->endpoints();
    std::vector<double> psi_by_column(endpoints.size());
    for (std::size_t e = 0; e < endpoints.size(); ++e) {
      const auto it = endpoint_psi_.find(endpoints[e]);
      if (it == endpoint_psi_.end()) {
        throw TransportFault("endpoint " + std::to_string(state_.node) +
                             " missing broadcast from endpoint " + std::to_string(endpoints[e]));
      }
      psi_by_column[e] = it->second;
    }
    const CellMassReport cells =
        compute_cells(problem_->measure(), problem_->costs(), psi_by_column, endpoints);
    mass = cells.masses[static_cast<std::size_t>(column_)];
  }

  const double g = supergradient_component(state_.supply, mass, out_flows, in_flows);
  state_.last_gradient = g;
  state_.psi_old = state_.psi;
  state_.psi = state_.psi + gamma * g;
  state_.converged_flag = std::fabs(state_.psi - state_.psi_old) < epsilon_;
}

std::vector<Message> Agent::share_converged(int round) {
  // One flag per arc direction.
  std::vector<Message> out;
  auto send = [&](ArcId a, NodeId to) {
    Message m;
    m.kind = MessageKind::converged;
    m.sender = state_.node;
    m.recipient = to;
    m.round = round;
    m.arc = a;
    m.flag = state_.converged_flag;
    out.push_back(m);
  };
  for (ArcId a : out_arcs_) send(a, problem_->network().arc(a).head);
  for (ArcId a : in_arcs_) send(a, problem_->network().arc(a).tail);
  return out;
}

void Agent::observe_converged() {
  for (const Message& m : take_inbox(MessageKind::converged)) {
    state_.neighbour_converged[m.sender] = m.flag;
  }
}

bool Agent::ready() const {
  if (!state_.converged_flag) return false;
  return std::all_of(state_.neighbour_converged.begin(), state_.neighbour_converged.end(),
                     [](const auto& kv) { return kv.second; });
}

std::vector<PointId> Agent::final_cell() const {
  if (!state_.is_endpoint) return {};
  const auto endpoints = problem_->endpoints();
  std::vector<double> psi_by_column(endpoints.size());
  for (std::size_t e = 0; e < endpoints.size(); ++e) {
    psi_by_column[e] =
        endpoints[e] == state_.node ? state_.psi : endpoint_psi_.at(endpoints[e]);
  }
  std::vector<PointId> cell;
  const CostTable& costs = problem_->costs();
  for (std::size_t p = 0; p < costs.points(); ++p) {
    if (assign_row(costs, p, psi_by_column).column == column_) {
      cell.push_back(static_cast<PointId>(p));
    }
  }
  return cell;
}

std::map<MessageKind, std::size_t> expected_message_counts(const Network& network) {
  const std::size_t arcs = network.arc_count();
  const std::size_t s = network.endpoints().size();
  return {{MessageKind::psi_share, arcs},
          {MessageKind::flow_share, arcs},
          {MessageKind::endpoint_psi_broadcast, s * (s > 0 ? s - 1 : 0)},
          {MessageKind::converged, 2 * arcs}};
}

namespace {

std::size_t deliver(std::vector<Agent>& agents, std::vector<Message> outbox, DeliveryPolicy policy,
                    int round, RoundLog& log) {
  const auto schedule = transport_deliver(std::move(outbox), policy, round);
  for (const Message& m : schedule) {
    if (m.recipient < 0 || static_cast<std::size_t>(m.recipient) >= agents.size()) {
      throw TransportFault("message addressed to unknown node " + std::to_string(m.recipient));
    }
    agents[static_cast<std::size_t>(m.recipient)].receive(m);
    ++log.messages_by_kind[m.kind];
  }
  log.messages_delivered += schedule.size();
  return schedule.size();
}

template <typename Phase>
std::vector<Message> collect(std::vector<Agent>& agents, Phase phase) {
  std::vector<Message> outbox;
  for (Agent& agent : agents) {
    ActingAs acting(agent.id());
    auto sent = phase(agent);
    outbox.insert(outbox.end(), sent.begin(), sent.end());
  }
  return outbox;
}

}  // namespace

RoundLog run_round(std::vector<Agent>& agents, DeliveryPolicy policy,
                   const StepSchedule& schedule, int round) {
  RoundLog log;
  log.round = round;
  for (auto kind : {MessageKind::psi_share, MessageKind::flow_share,
                    MessageKind::endpoint_psi_broadcast, MessageKind::converged}) {
    log.messages_by_kind[kind] = 0;
  }

  deliver(agents, collect(agents, [&](Agent& a) { return a.share_psi(round); }), policy, round,
          log);
  deliver(agents, collect(agents, [&](Agent& a) { return a.compute_flows(round); }), policy,
          round, log);

  const double gamma = schedule.gamma(round);
  for (Agent& agent : agents) {
    ActingAs acting(agent.id());
    agent.update(round, gamma);
  }

  deliver(agents, collect(agents, [&](Agent& a) { return a.share_converged(round); }), policy,
          round, log);
  for (Agent& agent : agents) {
    ActingAs acting(agent.id());
    agent.observe_converged();
  }

  // Collector, after the barrier.
  log.all_ready = true;
  for (const Agent& agent : agents) {
    const AgentState& s = agent.state();
    log.psi.push_back(s.psi);
    log.gradient.push_back(s.last_gradient);
    log.all_ready = log.all_ready && agent.ready();
  }
  return log;
}

ProtocolResult run_protocol(const Problem& problem, const ProtocolOptions& options) {
  if (options.max_rounds < 0) throw ParameterError("max_rounds must be >= 0");
  if (options.dual_every < 1) throw ParameterError("dual_every must be >= 1");
  const std::size_t n = problem.node_count();
  const std::vector<double> psi0 = options.initial_psi.value_or(std::vector<double>(n, 0.0));
  if (psi0.size() != n) throw ParameterError("initial psi has the wrong length");

  std::vector<Agent> agents;
  agents.reserve(n);
  for (NodeId i = 0; i < static_cast<NodeId>(n); ++i) {
    agents.emplace_back(problem, i, psi0[static_cast<std::size_t>(i)], options.epsilon);
  }

  ProtocolResult result;
  SolveReport& report = result.report;
  report.termination = Termination::max_iterations;
  std::vector<double> psi = psi0;
  for (int round = 0; round < options.max_rounds; ++round) {
    RoundLog log = run_round(agents, options.policy, options.schedule, round);

    TraceRecord record;
    record.k = round;
    record.gamma = options.schedule.gamma(round);
    record.max_abs_g = max_abs(log.gradient);
    if (round % options.dual_every == 0) record.dual_value = dual_value(problem, psi);
    report.trace.push_back(record);

    for (double v : log.psi) {
      if (!std::isfinite(v)) {
        result.rounds.push_back(std::move(log));
        throw DivergenceError("psi became non-finite in round " + std::to_string(round),
                              report.trace);
      }
    }
    psi = log.psi;
    const bool done = log.all_ready;
    result.rounds.push_back(std::move(log));
    if (done) {
      report.termination = Termination::epsilon_reached;
      break;
    }
  }

  // Final emission: one more psi/flow exchange at the final psi.
  const int final_round = static_cast<int>(result.rounds.size());
  RoundLog scratch;
  deliver(agents, collect(agents, [&](Agent& a) { return a.share_psi(final_round); }),
          options.policy, final_round, scratch);
  deliver(agents, collect(agents, [&](Agent& a) { return a.compute_flows(final_round); }),
          options.policy, final_round, scratch);

  report.flows.flows.assign(problem.network().arc_count(), 0.0);
  report.partition.endpoints.assign(problem.endpoints().begin(), problem.endpoints().end());
  report.partition.cell_masses.assign(problem.endpoints().size(), 0.0);
  report.partition.assignment.assign(problem.measure().size(), -1);
  for (Agent& agent : agents) {
    ActingAs acting(agent.id());
    // Absorb the final flow shares and broadcasts.
    agent.update(final_round, 0.0);
    for (const auto& [arc, p] : agent.final_flows()) {
      report.flows.flows[static_cast<std::size_t>(arc)] = p;
    }
    for (PointId x : agent.final_cell()) {
      report.partition.assignment[static_cast<std::size_t>(x)] = agent.id();
    }
  }
  const auto masses = problem.measure().masses();
  for (std::size_t p = 0; p < masses.size(); ++p) {
    const int column = problem.endpoint_column(report.partition.assignment[p]);
    report.partition.cell_masses[static_cast<std::size_t>(column)] += masses[p];
  }

  report.psi_final.psi = psi;
  report.psi_final.iteration = static_cast<int>(result.rounds.size());
  report.iterations = report.psi_final.iteration;
  const CellMassReport cells = compute_cells(problem, psi);
  report.dual_value = dual_value(problem, psi, cells);
  report.final_max_abs_g = max_abs(supergradient(problem, report.flows, cells));
  const PrimalSolution primal = reconstruct_primal(problem, psi);
  report.primal_value = primal.primal_value;
  report.gap = report.primal_value - report.dual_value;
  return result;
}

}  // namespace sdotflow
