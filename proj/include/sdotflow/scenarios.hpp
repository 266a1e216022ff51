#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "sdotflow/scenario.hpp"

namespace sdotflow {

struct TopologyNode {
  std::string name;
  std::vector<double> position;
  double supply = 0.0;
  bool endpoint = false;
};

struct TopologyArc {
  int tail = 0;
  int head = 0;
  double lower = -1.0;
  double upper = 1.0;
};

/// Transmission network layout. Arc cost coefficients are the Euclidean
/// lengths between node positions.
struct Topology {
  std::string version;
  std::vector<TopologyNode> nodes;
  std::vector<TopologyArc> arcs;
};

/// Built-in six-node layout (two sources, four interconnections, two of
/// which are endpoints). Node positions are approximate, not authoritative.
Topology default_topology();

/// Reads a topology JSON file (same schema as data/topology_v1.json).
/// Throws IoError when the file cannot be read and ConfigError on bad content.
Topology load_topology(const std::filesystem::path& path);

Network build_network(const Topology& topology);

struct SyntheticParams {
  int grid_n = 200;
  double side = 100.0;
  std::array<double, 2> mean = {50.0, 75.0};
  double sigma = 25.0;
  std::uint64_t seed = 0;  // generation is deterministic; kept for provenance
  Topology topology = default_topology();
};

/// Gaussian-weighted grid over [0, side]^2 (cell centres), total mass 1,
/// Euclidean assignment cost.
Scenario generate_synthetic(const SyntheticParams& params);

struct PowerNetworkParams {
  int n_consumers = 1000;
  std::uint64_t seed = 0;
  double side = 100.0;
  // Overrides the endpoint positions of the topology, in endpoint order.
  std::vector<std::array<double, 2>> substation_positions;
  int substation_links = 3;        // nearest consumers per substation
  bool bridge_components = true;   // add shortest edges instead of resampling
  int max_retries = 50;            // resampling attempts when not bridging
  Topology topology = default_topology();
};

struct PowerNetwork {
  Scenario scenario;  // assignment cost: geodesic resistance on `graph`
  ConsumerGraph graph;
  int attempts = 1;
  std::size_t bridges = 0;  // edges added to connect stray components
};

/// Random consumers in the square, each linked to its 2 or 3 nearest
/// neighbours; substations linked to their nearest consumers. Demands are
/// uniform draws normalized to the total supply.
PowerNetwork generate_power_network(const PowerNetworkParams& params);

}  // namespace sdotflow
