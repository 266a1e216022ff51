#include "sdotflow/model.hpp"

#include <algorithm>
#include <string>

#include "sdotflow/errors.hpp"

namespace sdotflow {

DemandMeasure::DemandMeasure(std::vector<Point> points, std::vector<double> masses)
    : points_(std::move(points)), masses_(std::move(masses)) {
  if (points_.size() != masses_.size()) {
    throw ConfigError("demand measure: " + std::to_string(points_.size()) + " points but " +
                      std::to_string(masses_.size()) + " masses");
  }
  for (double m : masses_) total_mass_ += m;
}

Network::Network(std::vector<Node> nodes, std::vector<Arc> arcs)
    : nodes_(std::move(nodes)), arcs_(std::move(arcs)) {
  const auto n = static_cast<NodeId>(nodes_.size());
  outgoing_.resize(nodes_.size());
  incoming_.resize(nodes_.size());
  for (ArcId a = 0; a < static_cast<ArcId>(arcs_.size()); ++a) {
    const Arc& arc = arcs_[static_cast<std::size_t>(a)];
    if (arc.tail < 0 || arc.tail >= n || arc.head < 0 || arc.head >= n) continue;
    outgoing_[static_cast<std::size_t>(arc.tail)].push_back(a);
    incoming_[static_cast<std::size_t>(arc.head)].push_back(a);
  }
  for (const Node& node : nodes_) {
    if (node.is_endpoint) endpoints_.push_back(node.id);
  }
  std::sort(endpoints_.begin(), endpoints_.end());
}

double Network::total_supply() const {
  double total = 0.0;
  for (const Node& node : nodes_) total += node.supply;
  return total;
}

bool Network::has_arc_between(NodeId a, NodeId b) const {
  return std::any_of(arcs_.begin(), arcs_.end(), [&](const Arc& arc) {
    return (arc.tail == a && arc.head == b) || (arc.tail == b && arc.head == a);
  });
}

double Partition::cell_mass(NodeId endpoint) const {
  for (std::size_t e = 0; e < endpoints.size(); ++e) {
    if (endpoints[e] == endpoint) return cell_masses[e];
  }
  return 0.0;
}

}  // namespace sdotflow
