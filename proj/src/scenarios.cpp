#include "sdotflow/scenarios.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <random>
#include <set>
#include <utility>

#include <json.hpp>

#include "sdotflow/errors.hpp"

namespace sdotflow {

namespace {

using nlohmann::json;

double distance(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) s += (a[k] - b[k]) * (a[k] - b[k]);
  return std::sqrt(s);
}

template <typename T>
T required(const json& obj, const char* key, const std::string& where) {
  if (!obj.contains(key)) throw ConfigError(where + ": missing \"" + key + "\"");
  try {
    return obj.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(where + ": bad \"" + key + "\": " + e.what());
  }
}

}  // namespace

Topology default_topology() {
  Topology t;
  t.version = "1";
  t.nodes = {
      {"S1", {30.0, 35.0}, 0.5, false}, {"S2", {70.0, 35.0}, 0.5, false},
      {"I1", {40.0, 50.0}, 0.0, false}, {"I2", {60.0, 50.0}, 0.0, false},
      {"I3", {35.0, 70.0}, 0.0, true},  {"I4", {65.0, 70.0}, 0.0, true},
  };
  t.arcs = {{0, 2, -1.0, 1.0}, {1, 3, -1.0, 1.0}, {2, 3, -1.0, 1.0}, {2, 4, -1.0, 1.0},
            {3, 5, -1.0, 1.0}, {4, 5, -1.0, 1.0}, {0, 4, -1.0, 1.0}, {1, 5, -1.0, 1.0}};
  return t;
}

Topology load_topology(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open topology file " + path.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::exception& e) {
    throw ConfigError("topology " + path.string() + ": " + e.what());
  }
  if (!doc.is_object()) throw ConfigError("topology: top level must be an object");

  Topology t;
  t.version = doc.contains("version") ? doc["version"].get<std::string>() : "";
  const std::string where = "topology " + path.string();
  const auto nodes = required<json>(doc, "nodes", where);
  const auto arcs = required<json>(doc, "arcs", where);
  if (!nodes.is_array() || !arcs.is_array()) throw ConfigError(where + ": nodes/arcs must be arrays");
  for (const json& n : nodes) {
    TopologyNode node;
    node.name = n.contains("name") ? n["name"].get<std::string>() : "";
    node.position = required<std::vector<double>>(n, "position", where);
    node.supply = required<double>(n, "supply", where);
    node.endpoint = n.contains("endpoint") && n["endpoint"].get<bool>();
    t.nodes.push_back(std::move(node));
  }
  for (const json& a : arcs) {
    TopologyArc arc;
    arc.tail = required<int>(a, "tail", where);
    arc.head = required<int>(a, "head", where);
    arc.lower = a.contains("lower") ? a["lower"].get<double>() : -1.0;
    arc.upper = a.contains("upper") ? a["upper"].get<double>() : 1.0;
    const auto count = static_cast<int>(t.nodes.size());
    if (arc.tail < 0 || arc.tail >= count || arc.head < 0 || arc.head >= count) {
      throw ConfigError(where + ": arc references an unknown node");
    }
    t.arcs.push_back(arc);
  }
  return t;
}

Network build_network(const Topology& topology) {
  std::vector<Node> nodes;
  for (std::size_t i = 0; i < topology.nodes.size(); ++i) {
    const TopologyNode& tn = topology.nodes[i];
    nodes.push_back(Node{static_cast<NodeId>(i), tn.supply, tn.endpoint, tn.position});
  }
  std::vector<Arc> arcs;
  for (const TopologyArc& ta : topology.arcs) {
    const double length = distance(topology.nodes[static_cast<std::size_t>(ta.tail)].position,
                                   topology.nodes[static_cast<std::size_t>(ta.head)].position);
    arcs.push_back(Arc{ta.tail, ta.head, ta.lower, ta.upper, QuadraticArcCost{length}});
  }
  return Network(std::move(nodes), std::move(arcs));
}

Scenario generate_synthetic(const SyntheticParams& params) {
  if (params.grid_n < 2) throw ParameterError("grid_n must be >= 2");
  if (!(params.side > 0.0) || !(params.sigma > 0.0)) {
    throw ParameterError("side and sigma must be positive");
  }
  const int n = params.grid_n;
  const double h = params.side / n;
  const double half = 0.5 * n;
  // Offsets are formed from exact half-integers, so a mean at the centre of
  // the square gives bitwise mirror-symmetric masses.
  const double shift_x = 0.5 * params.side - params.mean[0];
  const double shift_y = 0.5 * params.side - params.mean[1];
  const double inv_two_var = 1.0 / (2.0 * params.sigma * params.sigma);

  std::vector<Point> points;
  std::vector<double> masses;
  points.reserve(static_cast<std::size_t>(n) * static_cast<std::size_t>(n));
  masses.reserve(points.capacity());
  for (int j = 0; j < n; ++j) {
    const double dy = (j + 0.5 - half) * h + shift_y;
    for (int i = 0; i < n; ++i) {
      const double dx = (i + 0.5 - half) * h + shift_x;
      points.push_back(Point{j * n + i, {(i + 0.5) * h, (j + 0.5) * h}});
      masses.push_back(std::exp(-(dx * dx + dy * dy) * inv_two_var));
    }
  }
  const double total = std::accumulate(masses.begin(), masses.end(), 0.0);
  for (double& m : masses) m /= total;

  Scenario s;
  s.dimension = 2;
  s.measure = DemandMeasure(std::move(points), std::move(masses));
  s.network = build_network(params.topology);
  s.assignment_cost = EuclideanCost{};
  return s;
}

namespace {

struct DisjointSets {
  explicit DisjointSets(std::size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
  std::size_t find(std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  }
  void join(std::size_t a, std::size_t b) { parent[find(a)] = find(b); }
  std::vector<std::size_t> parent;
};

// Vertices 0..n-1 are consumers, n.. are substations.
struct RawGraph {
  std::vector<std::array<double, 2>> position;
  std::set<std::pair<std::size_t, std::size_t>> edges;
};

std::vector<std::size_t> nearest(const RawGraph& g, std::size_t from, std::size_t candidates,
                                 std::size_t k, bool skip_self) {
  std::vector<std::size_t> idx;
  for (std::size_t v = 0; v < candidates; ++v) {
    if (!(skip_self && v == from)) idx.push_back(v);
  }
  k = std::min(k, idx.size());
  const auto& p = g.position[from];
  auto d2 = [&](std::size_t v) {
    const double dx = g.position[v][0] - p[0];
    const double dy = g.position[v][1] - p[1];
    return dx * dx + dy * dy;
  };
  std::partial_sort(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(k), idx.end(),
                    [&](std::size_t a, std::size_t b) {
                      const double da = d2(a), db = d2(b);
                      return da < db || (da == db && a < b);
                    });
  idx.resize(k);
  return idx;
}

void add_edge(RawGraph& g, std::size_t a, std::size_t b) {
  if (a != b) g.edges.insert({std::min(a, b), std::max(a, b)});
}

// Vertices connected to some substation.
std::vector<char> reachable(const RawGraph& g, std::size_t consumers) {
  DisjointSets sets(g.position.size());
  for (const auto& [a, b] : g.edges) sets.join(a, b);
  std::vector<char> root_has_substation(g.position.size(), 0);
  for (std::size_t v = consumers; v < g.position.size(); ++v) root_has_substation[sets.find(v)] = 1;
  std::vector<char> r(g.position.size());
  for (std::size_t v = 0; v < g.position.size(); ++v) r[v] = root_has_substation[sets.find(v)];
  return r;
}

std::size_t bridge(RawGraph& g, std::size_t consumers) {
  std::size_t added = 0;
  for (;;) {
    const std::vector<char> r = reachable(g, consumers);
    double best = std::numeric_limits<double>::infinity();
    std::pair<std::size_t, std::size_t> edge{0, 0};
    for (std::size_t u = 0; u < r.size(); ++u) {
      if (!r[u]) continue;
      for (std::size_t v = 0; v < consumers; ++v) {
        if (r[v]) continue;
        const double d = distance(g.position[u], g.position[v]);
        if (d < best) {
          best = d;
          edge = {u, v};
        }
      }
    }
    if (best == std::numeric_limits<double>::infinity()) return added;
    add_edge(g, edge.first, edge.second);
    ++added;
  }
}

}  // namespace

PowerNetwork generate_power_network(const PowerNetworkParams& params) {
  if (params.n_consumers < 2) throw ParameterError("n_consumers must be >= 2");
  if (params.substation_links < 1) throw ParameterError("substation_links must be >= 1");
  if (params.max_retries < 1) throw ParameterError("max_retries must be >= 1");

  Topology topology = params.topology;
  std::vector<std::size_t> endpoint_nodes;
  for (std::size_t i = 0; i < topology.nodes.size(); ++i) {
    if (topology.nodes[i].endpoint) endpoint_nodes.push_back(i);
  }
  if (endpoint_nodes.empty()) throw ParameterError("topology has no endpoint nodes");
  if (!params.substation_positions.empty()) {
    if (params.substation_positions.size() != endpoint_nodes.size()) {
      throw ParameterError("expected " + std::to_string(endpoint_nodes.size()) +
                           " substation positions");
    }
    for (std::size_t e = 0; e < endpoint_nodes.size(); ++e) {
      const auto& p = params.substation_positions[e];
      topology.nodes[endpoint_nodes[e]].position = {p[0], p[1]};
    }
  }
  for (std::size_t e : endpoint_nodes) {
    if (topology.nodes[e].position.size() != 2) {
      throw ParameterError("substation positions must be two-dimensional");
    }
  }
  Network network = build_network(topology);
  const double total_supply = network.total_supply();
  const auto n = static_cast<std::size_t>(params.n_consumers);

  for (int attempt = 1; attempt <= params.max_retries; ++attempt) {
    std::mt19937_64 rng(params.seed + static_cast<std::uint64_t>(attempt - 1));
    std::uniform_real_distribution<double> coord(0.0, params.side);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::uniform_int_distribution<int> degree(2, 3);

    RawGraph g;
    for (std::size_t i = 0; i < n; ++i) {
      const double x = coord(rng);
      const double y = coord(rng);
      g.position.push_back({x, y});
    }
    std::vector<double> demand(n);
    for (double& d : demand) d = unit(rng);
    std::vector<int> k(n);
    for (int& ki : k) ki = degree(rng);
    for (std::size_t e : endpoint_nodes) {
      const auto& p = topology.nodes[e].position;
      g.position.push_back({p[0], p[1]});
    }

    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j : nearest(g, i, n, static_cast<std::size_t>(k[i]), true)) add_edge(g, i, j);
    }
    for (std::size_t s = 0; s < endpoint_nodes.size(); ++s) {
      for (std::size_t j : nearest(g, n + s, n, static_cast<std::size_t>(params.substation_links),
                                   false)) {
        add_edge(g, n + s, j);
      }
    }

    std::size_t bridges = 0;
    if (params.bridge_components) {
      bridges = bridge(g, n);
    } else {
      const auto r = reachable(g, n);
      if (std::find(r.begin(), r.begin() + static_cast<std::ptrdiff_t>(n), 0) !=
          r.begin() + static_cast<std::ptrdiff_t>(n)) {
        continue;
      }
    }

    double demand_total = std::accumulate(demand.begin(), demand.end(), 0.0);
    if (!(demand_total > 0.0)) demand_total = 1.0;
    std::vector<Point> points;
    std::vector<double> masses;
    for (std::size_t i = 0; i < n; ++i) {
      points.push_back(Point{static_cast<PointId>(i), {g.position[i][0], g.position[i][1]}});
      masses.push_back(demand[i] / demand_total * total_supply);
    }

    auto vertex = [&](std::size_t v) {
      if (v < n) return GraphVertex{GraphVertex::Kind::point, static_cast<int>(v)};
      return GraphVertex{GraphVertex::Kind::endpoint, static_cast<int>(endpoint_nodes[v - n])};
    };
    ConsumerGraph graph;
    for (const auto& [a, b] : g.edges) {
      graph.edges.push_back(GraphEdge{vertex(a), vertex(b), distance(g.position[a], g.position[b])});
    }

    PowerNetwork out;
    out.graph = graph;
    out.attempts = attempt;
    out.bridges = bridges;
    out.scenario.dimension = 2;
    out.scenario.measure = DemandMeasure(std::move(points), std::move(masses));
    out.scenario.network = network;
    out.scenario.assignment_cost = GeodesicResistanceCost{std::move(graph), ""};
    return out;
  }
  throw ConfigError("consumer graph stayed disconnected from every substation after " +
                    std::to_string(params.max_retries) + " attempts");
}

}  // namespace sdotflow
