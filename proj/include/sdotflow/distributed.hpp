#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <vector>

#include "sdotflow/dual_ascent.hpp"
#include "sdotflow/problem.hpp"

namespace sdotflow {

enum class MessageKind { psi_share, flow_share, endpoint_psi_broadcast, converged };

const char* message_kind_name(MessageKind kind);

struct Message {
  MessageKind kind = MessageKind::psi_share;
  NodeId sender = 0;
  NodeId recipient = 0;
  int round = 0;
  ArcId arc = -1;        // psi_share / flow_share
  NodeId endpoint = -1;  // endpoint_psi_broadcast
  double value = 0.0;
  bool flag = false;     // converged
};

// Only synchronous delivery is implemented; asynchronous is reserved.
enum class DeliveryPolicy { synchronous, asynchronous };

/// Orders one round's messages for delivery by (sender, arc id, recipient,
/// kind). Throws TransportFault for a message tagged with another round and
/// ParameterError for an unsupported policy.
std::vector<Message> transport_deliver(std::vector<Message> messages, DeliveryPolicy policy,
                                       int round);

struct AgentState {
  NodeId node = 0;
  double psi = 0.0;
  double psi_old = 0.0;
  double supply = 0.0;
  bool is_endpoint = false;
  std::map<ArcId, double> outgoing_flows;
  std::vector<Message> inbox;
  bool converged_flag = false;
  std::map<NodeId, bool> neighbour_converged;
  double last_gradient = 0.0;
};

/// Per-node state machine. Everything an agent knows beyond its own state
/// arrives through its inbox; static inputs (its arcs, and for endpoints the
/// customer cost table) are fixed at construction.
class Agent {
 public:
  Agent(const Problem& problem, NodeId node, double initial_psi, double epsilon);

  NodeId id() const { return state_.node; }
  void receive(const Message& message) { state_.inbox.push_back(message); }

  // Phase 1: send psi to the tail of every incoming arc.
  std::vector<Message> share_psi(int round);
  // Phase 2: outgoing flows from neighbour psi; endpoints also broadcast psi.
  std::vector<Message> compute_flows(int round);
  // Phase 3: supergradient and dual update; sets the local converged flag.
  void update(int round, double gamma);
  // Phase 4: converged flag to every arc neighbour.
  std::vector<Message> share_converged(int round);
  void observe_converged();
  // Own flag and every neighbour flag set.
  bool ready() const;

  // Final emission after termination: flows on outgoing arcs and, for
  // endpoints, the points of the Laguerre cell.
  std::map<ArcId, double> final_flows() const { return state_.outgoing_flows; }
  std::vector<PointId> final_cell() const;

  // Instrumented read access. Counts a foreign read whenever another agent
  // is currently acting.
  const AgentState& state() const;

 private:
  std::vector<Message> take_inbox(MessageKind kind);

  const Problem* problem_;
  AgentState state_;
  double epsilon_;
  int column_ = -1;
  std::vector<ArcId> out_arcs_;
  std::vector<ArcId> in_arcs_;
  std::vector<NodeId> neighbours_;
  std::map<NodeId, double> neighbour_psi_;
  std::map<ArcId, double> incoming_flows_;
  std::map<NodeId, double> endpoint_psi_;
};

/// Marks which agent is executing, for the locality instrumentation.
class ActingAs {
 public:
  explicit ActingAs(NodeId node);
  ~ActingAs();
  ActingAs(const ActingAs&) = delete;
  ActingAs& operator=(const ActingAs&) = delete;

 private:
  NodeId previous_;
};

std::uint64_t foreign_state_reads();
void reset_foreign_state_reads();

struct RoundLog {
  int round = 0;
  std::size_t messages_delivered = 0;
  std::map<MessageKind, std::size_t> messages_by_kind;
  std::vector<double> psi;       // after the update
  std::vector<double> gradient;  // g used in the update
  bool all_ready = false;
};

/// Expected per-round message counts: |A| psi and flow shares, |S|(|S|-1)
/// endpoint broadcasts, 2|A| converged flags.
std::map<MessageKind, std::size_t> expected_message_counts(const Network& network);

RoundLog run_round(std::vector<Agent>& agents, DeliveryPolicy policy,
                   const StepSchedule& schedule, int round);

struct ProtocolOptions {
  StepSchedule schedule = StepSchedule::harmonic(1.0, 0.01);
  double epsilon = 1e-6;
  int max_rounds = 300;
  int dual_every = 10;
  std::optional<std::vector<double>> initial_psi;
  DeliveryPolicy policy = DeliveryPolicy::synchronous;
};

struct ProtocolResult {
  SolveReport report;
  std::vector<RoundLog> rounds;
};

ProtocolResult run_protocol(const Problem& problem, const ProtocolOptions& options = {});

}  // namespace sdotflow
