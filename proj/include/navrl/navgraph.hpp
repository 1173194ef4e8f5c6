#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <deque>
#include <fstream>
#include <limits>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "navrl/rng.hpp"

namespace navrl {

// Dense node index, stable across save/load.
using NodeId = std::uint32_t;

inline constexpr double kUnreachableM = std::numeric_limits<double>::infinity();
inline constexpr std::uint32_t kNoHopPath = std::numeric_limits<std::uint32_t>::max();

// Nodes within this path distance of an elevator node are elevator-adjacent
// and carry elevator edges to the other floors of the building.
inline constexpr double kElevatorRadiusM = 4.0;

struct GraphError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class EdgeKind : std::uint8_t { Move, Elevator };

struct Edge {
  NodeId from = 0;
  NodeId to = 0;
  EdgeKind kind = EdgeKind::Move;
  double bearing_deg = 0.0;  // Move edges only; [0, 360), quantized to 0.1
  int dest_floor = 0;        // Elevator edges only
  double length_m = 1.0;
};

struct Node {
  NodeId id = 0;
  // Metric position (z = floor height). Never read by transition logic;
  // used for visualisation, statistics, and synthetic frame generation.
  std::array<double, 3> position{0.0, 0.0, 0.0};
  int floor = 0;
  std::optional<int> building;
  bool is_elevator_adjacent = false;
};

inline double quantize_bearing(double deg) {
  double b = std::fmod(deg, 360.0);
  if (b < 0.0) b += 360.0;
  b = std::round(b * 10.0) / 10.0;
  if (b >= 360.0) b = 0.0;
  return b;
}

/// Absolute angular distance between two bearings, in [0, 180].
inline double bearing_distance_deg(double a, double b) {
  double d = std::fmod(std::fabs(a - b), 360.0);
  return d > 180.0 ? 360.0 - d : d;
}

struct PairStats {
  double mean_m = 0.0;
  double std_m = 0.0;
  double max_m = 0.0;  // L_max
  double bucket_width_m = 10.0;
  std::vector<std::uint64_t> histogram;  // bucket i covers [i*w, (i+1)*w)
  std::uint64_t pair_count = 0;
};

class NavGraph {
 public:
  NavGraph() = default;

  std::size_t size() const { return nodes_.size(); }
  double node_spacing_m() const { return spacing_m_; }
  const Node& node(NodeId id) const { return nodes_.at(id); }
  const std::vector<Node>& nodes() const { return nodes_; }
  const std::vector<Edge>& edges_from(NodeId id) const { return adj_.at(id); }

  std::size_t edge_count() const {
    std::size_t n = 0;
    for (const auto& a : adj_) n += a.size();
    return n;
  }

  /// Number of distinct floors (max floor index + 1); defines the elevator
  /// action set size F_max.
  int floor_count() const { return floor_count_; }

  /// Designated elevator locations, one per (building, floor): the 1-center
  /// of that floor's elevator-edge carriers. Derived from edges, so the set
  /// is stable across save/load.
  const std::vector<NodeId>& elevator_nodes() const { return elevator_nodes_; }

  /// The unique Move edge whose bearing lies within 45 degrees of the given
  /// heading bearing, or nullptr if none exists (blocked).
  const Edge* find_move_edge(NodeId from, double heading_deg) const {
    for (const Edge& e : adj_[from]) {
      if (e.kind == EdgeKind::Move &&
          bearing_distance_deg(e.bearing_deg, heading_deg) <= 45.0 + 1e-9) {
        return &e;
      }
    }
    return nullptr;
  }

  /// The unique elevator edge to the given floor, or nullptr (blocked).
  const Edge* find_elevator_edge(NodeId from, int dest_floor) const {
    for (const Edge& e : adj_[from]) {
      if (e.kind == EdgeKind::Elevator && e.dest_floor == dest_floor) return &e;
    }
    return nullptr;
  }

  /// Hop distances from `a` to every node (kNoHopPath if unreachable).
  /// Neighbors expand lowest-NodeId-first, so discovery order and the
  /// parent tree are deterministic.
  std::vector<std::uint32_t> hop_distances_from(NodeId a) const {
    std::vector<std::uint32_t> dist(size(), kNoHopPath);
    std::deque<NodeId> queue;
    dist[a] = 0;
    queue.push_back(a);
    while (!queue.empty()) {
      NodeId u = queue.front();
      queue.pop_front();
      for (const Edge& e : adj_[u]) {
        if (dist[e.to] == kNoHopPath) {
          dist[e.to] = dist[u] + 1;
          queue.push_back(e.to);
        }
      }
    }
    return dist;
  }

  /// Minimal hop count times node spacing; symmetric because every edge has
  /// a reverse partner. Elevator hops cost one node spacing.
  double shortest_path_length(NodeId a, NodeId b) const {
    check_node(a);
    check_node(b);
    if (a == b) return 0.0;
    auto dist = hop_distances_from(a);
    if (dist[b] == kNoHopPath) return kUnreachableM;
    return static_cast<double>(dist[b]) * spacing_m_;
  }

  /// Statistics of shortest-path length over all unordered distinct pairs.
  PairStats all_pairs_stats(double bucket_width_m = 10.0) const {
    PairStats s;
    s.bucket_width_m = bucket_width_m;
    long double sum = 0.0L, sumsq = 0.0L;
    for (NodeId a = 0; a < size(); ++a) {
      auto dist = hop_distances_from(a);
      for (NodeId b = a + 1; b < size(); ++b) {
        if (dist[b] == kNoHopPath)
          throw GraphError("all_pairs_stats: graph is not connected");
        double d = static_cast<double>(dist[b]) * spacing_m_;
        sum += d;
        sumsq += static_cast<long double>(d) * d;
        s.max_m = std::max(s.max_m, d);
        auto bucket = static_cast<std::size_t>(d / bucket_width_m);
        if (bucket >= s.histogram.size()) s.histogram.resize(bucket + 1, 0);
        ++s.histogram[bucket];
        ++s.pair_count;
      }
    }
    if (s.pair_count > 0) {
      s.mean_m = static_cast<double>(sum / s.pair_count);
      double var = static_cast<double>(sumsq / s.pair_count) - s.mean_m * s.mean_m;
      s.std_m = std::sqrt(std::max(0.0, var));
    }
    return s;
  }

  /// For each node, the number of unordered node pairs whose shortest path
  /// (under the lowest-NodeId-first tie-break) passes through it, endpoints
  /// included.
  std::vector<std::uint64_t> visitation_counts() const {
    std::vector<std::uint64_t> counts(size(), 0);
    std::vector<NodeId> parent(size());
    std::vector<std::uint32_t> dist(size());
    std::deque<NodeId> queue;
    for (NodeId a = 0; a < size(); ++a) {
      std::fill(dist.begin(), dist.end(), kNoHopPath);
      dist[a] = 0;
      parent[a] = a;
      queue.clear();
      queue.push_back(a);
      while (!queue.empty()) {
        NodeId u = queue.front();
        queue.pop_front();
        for (const Edge& e : adj_[u]) {
          if (dist[e.to] == kNoHopPath) {
            dist[e.to] = dist[u] + 1;
            parent[e.to] = u;
            queue.push_back(e.to);
          }
        }
      }
      for (NodeId b = a + 1; b < size(); ++b) {
        if (dist[b] == kNoHopPath) continue;
        NodeId v = b;
        while (v != a) {
          ++counts[v];
          v = parent[v];
        }
        ++counts[a];
      }
    }
    return counts;
  }

  void save(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw GraphError("cannot open '" + path + "' for writing");
    char buf[160];
    std::snprintf(buf, sizeof buf, "navgraph v1 %zu %.17g\n", size(), spacing_m_);
    out << buf;
    for (const Node& n : nodes_) {
      std::snprintf(buf, sizeof buf, "N %u %.17g %.17g %.17g %d ", n.id,
                    n.position[0], n.position[1], n.position[2], n.floor);
      out << buf;
      if (n.building)
        out << *n.building << "\n";
      else
        out << "-\n";
    }
    for (const auto& edges : adj_) {
      for (const Edge& e : edges) {
        if (e.kind == EdgeKind::Move) {
          std::snprintf(buf, sizeof buf, "E %u %u M %.1f\n", e.from, e.to,
                        e.bearing_deg);
        } else {
          std::snprintf(buf, sizeof buf, "E %u %u L %d\n", e.from, e.to,
                        e.dest_floor);
        }
        out << buf;
      }
    }
    if (!out) throw GraphError("write failure on '" + path + "'");
  }

 private:
  friend class GraphBuilder;

  void check_node(NodeId id) const {
    if (id >= size())
      throw GraphError("invalid node id " + std::to_string(id));
  }

  std::vector<Node> nodes_;
  std::vector<std::vector<Edge>> adj_;
  std::vector<NodeId> elevator_nodes_;
  double spacing_m_ = 1.0;
  int floor_count_ = 1;
};

/// Accumulates nodes and edges, then validates every graph invariant in
/// build(). Generators and the loader both go through here.
class GraphBuilder {
 public:
  explicit GraphBuilder(double spacing_m = 1.0) : spacing_m_(spacing_m) {
    if (!(spacing_m > 0.0)) throw GraphError("node spacing must be positive");
  }

  NodeId add_node(std::array<double, 3> position, int floor = 0,
                  std::optional<int> building = std::nullopt) {
    Node n;
    n.id = static_cast<NodeId>(nodes_.size());
    n.position = position;
    n.floor = floor;
    n.building = building;
    nodes_.push_back(n);
    return n.id;
  }

  /// One directed edge; used by the loader. Generators prefer the paired
  /// helpers below.
  void add_directed_move_edge(NodeId from, NodeId to, double bearing_deg) {
    Edge e;
    e.from = from;
    e.to = to;
    e.kind = EdgeKind::Move;
    e.bearing_deg = quantize_bearing(bearing_deg);
    e.length_m = spacing_m_;
    edges_.push_back(e);
  }

  void add_directed_elevator_edge(NodeId from, NodeId to, int dest_floor) {
    Edge e;
    e.from = from;
    e.to = to;
    e.kind = EdgeKind::Elevator;
    e.dest_floor = dest_floor;
    e.length_m = spacing_m_;
    edges_.push_back(e);
  }

  /// Mutually traversable Move pair; reverse bearing rotated 180 degrees.
  void add_move_pair(NodeId a, NodeId b, double bearing_ab_deg) {
    add_directed_move_edge(a, b, bearing_ab_deg);
    add_directed_move_edge(b, a, bearing_ab_deg + 180.0);
  }

  /// Mutually paired elevator link; destination floors are the endpoints'
  /// floors (must already be set via add_node).
  void add_elevator_pair(NodeId a, NodeId b) {
    add_directed_elevator_edge(a, b, nodes_.at(b).floor);
    add_directed_elevator_edge(b, a, nodes_.at(a).floor);
  }

  std::size_t node_count() const { return nodes_.size(); }

  NavGraph build() {
    if (nodes_.empty()) throw GraphError("graph has no nodes");
    NavGraph g;
    g.spacing_m_ = spacing_m_;
    g.nodes_ = std::move(nodes_);
    g.adj_.assign(g.nodes_.size(), {});
    for (const Edge& e : edges_) {
      if (e.from >= g.size() || e.to >= g.size())
        throw GraphError("invariant violation: edge " + std::to_string(e.from) +
                         " -> " + std::to_string(e.to) +
                         " references unknown node");
      if (e.from == e.to)
        throw GraphError("invariant violation: self-loop at node " +
                         std::to_string(e.from));
      g.adj_[e.from].push_back(e);
    }
    // Deterministic lowest-NodeId-first expansion order.
    for (auto& edges : g.adj_) {
      std::sort(edges.begin(), edges.end(), [](const Edge& a, const Edge& b) {
        if (a.to != b.to) return a.to < b.to;
        if (a.kind != b.kind) return a.kind < b.kind;
        return a.dest_floor < b.dest_floor;
      });
    }
    validate(g);
    mark_elevator_adjacency(g);
    int max_floor = 0;
    for (const Node& n : g.nodes_) max_floor = std::max(max_floor, n.floor);
    g.floor_count_ = max_floor + 1;
    edges_.clear();
    return g;
  }

 private:
  static void validate(const NavGraph& g) {
    // Move edges come in mutually traversable pairs, bearings consistent
    // under 180-degree reversal within 1 degree.
    for (NodeId u = 0; u < g.size(); ++u) {
      for (const Edge& e : g.edges_from(u)) {
        if (e.kind == EdgeKind::Move) {
          bool paired = false;
          for (const Edge& r : g.edges_from(e.to)) {
            if (r.kind == EdgeKind::Move && r.to == u &&
                bearing_distance_deg(r.bearing_deg, e.bearing_deg + 180.0) <=
                    1.0) {
              paired = true;
              break;
            }
          }
          if (!paired)
            throw GraphError(
                "invariant violation: Move edge " + std::to_string(e.from) +
                " -> " + std::to_string(e.to) +
                " has no reverse edge with bearing rotated 180 degrees");
        } else {
          const Node& from = g.node(e.from);
          const Node& to = g.node(e.to);
          if (!from.building || !to.building || *from.building != *to.building)
            throw GraphError(
                "invariant violation: elevator edge " + std::to_string(e.from) +
                " -> " + std::to_string(e.to) +
                " does not connect nodes of the same building");
          if (from.floor == to.floor)
            throw GraphError(
                "invariant violation: elevator edge " + std::to_string(e.from) +
                " -> " + std::to_string(e.to) + " connects equal floors");
          if (e.dest_floor != to.floor)
            throw GraphError(
                "invariant violation: elevator edge " + std::to_string(e.from) +
                " -> " + std::to_string(e.to) +
                " declares destination floor " + std::to_string(e.dest_floor) +
                " but lands on floor " + std::to_string(to.floor));
          bool paired = false;
          for (const Edge& r : g.edges_from(e.to)) {
            if (r.kind == EdgeKind::Elevator && r.to == u) {
              paired = true;
              break;
            }
          }
          if (!paired)
            throw GraphError("invariant violation: elevator edge " +
                             std::to_string(e.from) + " -> " +
                             std::to_string(e.to) + " has no reverse edge");
        }
      }
      // At most one Move edge per 90-degree heading cone, and at most one
      // elevator edge per destination floor: both actions must resolve to a
      // unique successor.
      for (int q = 0; q < 4; ++q) {
        int in_cone = 0;
        for (const Edge& e : g.edges_from(u)) {
          if (e.kind == EdgeKind::Move &&
              bearing_distance_deg(e.bearing_deg, 90.0 * q) <= 45.0 + 1e-9)
            ++in_cone;
        }
        if (in_cone > 1)
          throw GraphError(
              "invariant violation: node " + std::to_string(u) + " has " +
              std::to_string(in_cone) + " Move edges within the " +
              std::to_string(90 * q) + "-degree heading cone");
      }
      for (std::size_t i = 0; i < g.edges_from(u).size(); ++i) {
        const Edge& a = g.edges_from(u)[i];
        if (a.kind != EdgeKind::Elevator) continue;
        for (std::size_t j = i + 1; j < g.edges_from(u).size(); ++j) {
          const Edge& b = g.edges_from(u)[j];
          if (b.kind == EdgeKind::Elevator && b.dest_floor == a.dest_floor)
            throw GraphError("invariant violation: node " + std::to_string(u) +
                             " has multiple elevator edges to floor " +
                             std::to_string(a.dest_floor));
        }
      }
    }
    // Single connected component.
    auto dist = g.hop_distances_from(0);
    for (NodeId v = 0; v < g.size(); ++v) {
      if (dist[v] == kNoHopPath)
        throw GraphError("invariant violation: disconnected component (node " +
                         std::to_string(v) + " unreachable from node 0)");
    }
  }

  /// Hop distances over Move edges only (walking distance within a floor).
  static std::vector<std::uint32_t> walk_distances(const NavGraph& g,
                                                   NodeId from) {
    std::vector<std::uint32_t> dist(g.size(), kNoHopPath);
    std::deque<NodeId> queue;
    dist[from] = 0;
    queue.push_back(from);
    while (!queue.empty()) {
      NodeId u = queue.front();
      queue.pop_front();
      for (const Edge& e : g.edges_from(u)) {
        if (e.kind == EdgeKind::Move && dist[e.to] == kNoHopPath) {
          dist[e.to] = dist[u] + 1;
          queue.push_back(e.to);
        }
      }
    }
    return dist;
  }

  /// Designates one elevator node per (building, floor) — the 1-center of
  /// that floor's elevator-edge carriers, tie-broken by lowest id — then
  /// flags every node within kElevatorRadiusM walking distance of one.
  static void mark_elevator_adjacency(NavGraph& g) {
    std::vector<std::pair<std::pair<int, int>, NodeId>> carriers;
    for (NodeId u = 0; u < g.size(); ++u) {
      for (const Edge& e : g.edges_from(u)) {
        if (e.kind == EdgeKind::Elevator) {
          carriers.push_back({{*g.node(u).building, g.node(u).floor}, u});
          break;
        }
      }
    }
    std::sort(carriers.begin(), carriers.end());
    for (std::size_t i = 0; i < carriers.size();) {
      std::size_t j = i;
      while (j < carriers.size() && carriers[j].first == carriers[i].first) ++j;
      NodeId best = carriers[i].second;
      std::uint32_t best_ecc = kNoHopPath;
      for (std::size_t k = i; k < j; ++k) {
        auto dist = walk_distances(g, carriers[k].second);
        std::uint32_t ecc = 0;
        for (std::size_t m = i; m < j; ++m)
          ecc = std::max(ecc, dist[carriers[m].second]);
        if (ecc < best_ecc) {
          best_ecc = ecc;
          best = carriers[k].second;
        }
      }
      g.elevator_nodes_.push_back(best);
      i = j;
    }

    auto radius_hops =
        static_cast<std::uint32_t>(kElevatorRadiusM / g.node_spacing_m());
    std::vector<std::uint32_t> dist(g.size(), kNoHopPath);
    std::deque<NodeId> queue;
    for (NodeId e : g.elevator_nodes_) {
      dist[e] = 0;
      queue.push_back(e);
    }
    while (!queue.empty()) {
      NodeId u = queue.front();
      queue.pop_front();
      if (dist[u] >= radius_hops) continue;
      for (const Edge& e : g.edges_from(u)) {
        if (e.kind == EdgeKind::Move && dist[u] + 1 < dist[e.to]) {
          dist[e.to] = dist[u] + 1;
          queue.push_back(e.to);
        }
      }
    }
    for (NodeId u = 0; u < g.size(); ++u)
      g.nodes_[u].is_elevator_adjacent = dist[u] <= radius_hops;
  }

  double spacing_m_;
  std::vector<Node> nodes_;
  std::vector<Edge> edges_;
};

// ---------------------------------------------------------------------------
// File format: line-oriented UTF-8 text.
//   navgraph v1 <node_count> <spacing_m>
//   N <id> <x> <y> <z> <floor> <building|->
//   E <from> <to> M <bearing_deg>
//   E <from> <to> L <dest_floor>
// '#' starts a comment.
// ---------------------------------------------------------------------------

inline NavGraph load_graph(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw GraphError("cannot open '" + path + "'");
  auto fail = [&](std::size_t line_no, const std::string& what) {
    throw GraphError(path + ":" + std::to_string(line_no) + ": " + what);
  };

  std::string line;
  std::size_t line_no = 0;
  std::size_t node_count = 0;
  double spacing = 1.0;
  bool header_seen = false;
  std::vector<std::optional<Node>> nodes;
  struct PendingEdge {
    NodeId from, to;
    char kind;
    double bearing;
    int dest_floor;
    std::size_t line_no;
  };
  std::vector<PendingEdge> pending;

  while (std::getline(in, line)) {
    ++line_no;
    auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::istringstream ls(line);
    std::string tok;
    if (!(ls >> tok)) continue;  // blank or comment-only line

    if (!header_seen) {
      std::string version;
      if (tok != "navgraph" || !(ls >> version >> node_count >> spacing) ||
          version != "v1")
        fail(line_no, "expected header 'navgraph v1 <node_count> <spacing_m>'");
      if (node_count == 0) fail(line_no, "node count must be positive");
      if (!(spacing > 0.0)) fail(line_no, "spacing must be positive");
      nodes.resize(node_count);
      header_seen = true;
      continue;
    }

    if (tok == "N") {
      std::uint64_t id;
      double x, y, z;
      int floor;
      std::string building;
      if (!(ls >> id >> x >> y >> z >> floor >> building))
        fail(line_no, "malformed node line");
      if (id >= node_count)
        fail(line_no, "node id " + std::to_string(id) +
                          " outside 0.." + std::to_string(node_count - 1));
      if (nodes[id])
        fail(line_no, "duplicate node id " + std::to_string(id));
      Node n;
      n.id = static_cast<NodeId>(id);
      n.position = {x, y, z};
      n.floor = floor;
      if (building != "-") {
        try {
          n.building = std::stoi(building);
        } catch (const std::exception&) {
          fail(line_no, "malformed building field '" + building + "'");
        }
      }
      nodes[id] = n;
    } else if (tok == "E") {
      std::uint64_t from, to;
      std::string kind;
      if (!(ls >> from >> to >> kind)) fail(line_no, "malformed edge line");
      if (from >= node_count || to >= node_count)
        fail(line_no, "invariant violation: edge references unknown node " +
                          std::to_string(std::max(from, to)));
      PendingEdge e{static_cast<NodeId>(from), static_cast<NodeId>(to), 0, 0.0,
                    0, line_no};
      if (kind == "M") {
        if (!(ls >> e.bearing)) fail(line_no, "malformed Move edge bearing");
        if (e.bearing < 0.0 || e.bearing >= 360.0)
          fail(line_no, "bearing out of [0, 360)");
        e.kind = 'M';
      } else if (kind == "L") {
        if (!(ls >> e.dest_floor)) fail(line_no, "malformed elevator floor");
        e.kind = 'L';
      } else {
        fail(line_no, "unknown edge kind '" + kind + "'");
      }
      pending.push_back(e);
    } else {
      fail(line_no, "unknown record '" + tok + "'");
    }
  }
  if (!header_seen) throw GraphError(path + ": empty file (missing header)");

  GraphBuilder b(spacing);
  for (std::size_t i = 0; i < node_count; ++i) {
    if (!nodes[i])
      throw GraphError(path + ": node " + std::to_string(i) +
                       " declared in header but never defined");
    b.add_node(nodes[i]->position, nodes[i]->floor, nodes[i]->building);
  }
  for (const PendingEdge& e : pending) {
    if (e.kind == 'M')
      b.add_directed_move_edge(e.from, e.to, e.bearing);
    else
      b.add_directed_elevator_edge(e.from, e.to, e.dest_floor);
  }
  return b.build();
}

inline void save_graph(const NavGraph& g, const std::string& path) {
  g.save(path);
}

// ---------------------------------------------------------------------------
// Generators
// ---------------------------------------------------------------------------

/// 4-connected grid, bearings exactly 0/90/180/270. Heading bearing 0 points
/// along +x and 90 along +y.
inline NavGraph generate_grid(int width, int height, double spacing_m = 1.0) {
  if (width < 2 || height < 2)
    throw GraphError("grid dimensions must be at least 2x2, got " +
                     std::to_string(width) + "x" + std::to_string(height));
  GraphBuilder b(spacing_m);
  for (int y = 0; y < height; ++y)
    for (int x = 0; x < width; ++x)
      b.add_node({x * spacing_m, y * spacing_m, 0.0});
  auto id = [width](int x, int y) {
    return static_cast<NodeId>(y * width + x);
  };
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      if (x + 1 < width) b.add_move_pair(id(x, y), id(x + 1, y), 0.0);
      if (y + 1 < height) b.add_move_pair(id(x, y), id(x, y + 1), 90.0);
    }
  }
  return b.build();
}

struct CampusParams {
  int corridors = 4;
  int buildings = 2;
  int floors_per_building = 3;
  int nodes_per_corridor = 25;
  double spacing_m = 1.0;
};

namespace detail {

inline constexpr std::array<std::array<double, 2>, 4> kQuadrantDir{
    {{1.0, 0.0}, {0.0, 1.0}, {-1.0, 0.0}, {0.0, -1.0}}};

inline bool quadrant_free(const std::vector<std::array<bool, 4>>& used,
                          NodeId n, int q) {
  return !used[n][q];
}

/// A straight corridor of `count` new nodes leaving `attach` in quadrant
/// direction `q`. Returns the new node ids in order.
inline std::vector<NodeId> grow_corridor(GraphBuilder& b,
                                         std::vector<std::array<bool, 4>>& used,
                                         std::vector<std::array<double, 3>>& pos,
                                         NodeId attach, int q, int count,
                                         double spacing, int floor,
                                         std::optional<int> building) {
  std::vector<NodeId> ids;
  const auto& dir = kQuadrantDir[q];
  std::array<double, 3> p = pos[attach];
  NodeId prev = attach;
  for (int i = 0; i < count; ++i) {
    p[0] += dir[0] * spacing;
    p[1] += dir[1] * spacing;
    NodeId n = b.add_node(p, floor, building);
    used.push_back({false, false, false, false});
    pos.push_back(p);
    b.add_move_pair(prev, n, 90.0 * q);
    used[prev][q] = true;
    used[n][(q + 2) % 4] = true;
    ids.push_back(n);
    prev = n;
  }
  return ids;
}

}  // namespace detail

/// Synthetic campus: a trunk corridor with branching side corridors, plus
/// multi-floor buildings joined by elevator edges. Buildings are corridors
/// sized so that exactly the building's own nodes fall within the elevator
/// adjacency radius; upper floors are congruent copies, and each node is
/// elevator-linked to its counterpart on every other floor. Deterministic
/// for a fixed seed.
inline NavGraph generate_campus(std::uint64_t seed, const CampusParams& p) {
  if (p.corridors < 1 || p.nodes_per_corridor < 1 || p.buildings < 0 ||
      p.floors_per_building < 1 || !(p.spacing_m > 0.0))
    throw GraphError("campus parameters must be positive");
  if (p.floors_per_building > 1 && p.buildings < 1)
    throw GraphError("multi-floor campus requires at least one building");

  Rng rng = make_rng(seed, 17);
  GraphBuilder b(p.spacing_m);
  std::vector<std::array<bool, 4>> used;    // occupied heading cones per node
  std::vector<std::array<double, 3>> pos;   // mirror of builder positions
  std::vector<NodeId> outdoor;

  NodeId origin = b.add_node({0.0, 0.0, 0.0});
  used.push_back({false, false, false, false});
  pos.push_back({0.0, 0.0, 0.0});
  outdoor.push_back(origin);

  auto attach_point = [&]() -> std::pair<NodeId, int> {
    // Deterministic retry loop over random outdoor nodes with a free cone.
    for (int tries = 0; tries < 4096; ++tries) {
      NodeId n = outdoor[uniform_index(rng, outdoor.size())];
      int q = static_cast<int>(uniform_index(rng, 4));
      for (int k = 0; k < 4; ++k) {
        int cand = (q + k) % 4;
        if (detail::quadrant_free(used, n, cand)) return {n, cand};
      }
    }
    throw GraphError("campus generation could not find a free attachment");
  };

  // Trunk corridor plus side corridors.
  if (p.nodes_per_corridor > 1) {
    auto trunk = detail::grow_corridor(b, used, pos, origin, 0,
                                       p.nodes_per_corridor - 1, p.spacing_m,
                                       0, std::nullopt);
    outdoor.insert(outdoor.end(), trunk.begin(), trunk.end());
  }
  for (int c = 1; c < p.corridors; ++c) {
    auto [attach, q] = attach_point();
    auto grown = detail::grow_corridor(b, used, pos, attach, q,
                                       p.nodes_per_corridor, p.spacing_m, 0,
                                       std::nullopt);
    outdoor.insert(outdoor.end(), grown.begin(), grown.end());
  }

  // Buildings: each floor is a corridor of 2*radius_hops + 1 nodes with the
  // elevator node at its center, so the 4 m neighborhood of the elevator is
  // exactly the floor itself.
  int radius_hops = static_cast<int>(kElevatorRadiusM / p.spacing_m);
  int floor_nodes = 2 * radius_hops + 1;
  for (int bld = 0; bld < p.buildings; ++bld) {
    auto [attach, q] = attach_point();
    std::vector<std::vector<NodeId>> floors;
    auto ground = detail::grow_corridor(b, used, pos, attach, q, floor_nodes,
                                        p.spacing_m, 0, bld);
    floors.push_back(ground);
    for (int f = 1; f < p.floors_per_building; ++f) {
      std::vector<NodeId> floor_ids;
      const auto& dir = detail::kQuadrantDir[q];
      std::array<double, 3> base = pos[ground.front()];
      base[0] -= dir[0] * p.spacing_m;
      base[1] -= dir[1] * p.spacing_m;
      std::array<double, 3> fp = base;
      NodeId prev = 0;
      for (int i = 0; i < floor_nodes; ++i) {
        fp[0] += dir[0] * p.spacing_m;
        fp[1] += dir[1] * p.spacing_m;
        std::array<double, 3> np = {fp[0], fp[1], 3.0 * f};
        NodeId n = b.add_node(np, f, bld);
        used.push_back({false, false, false, false});
        pos.push_back(np);
        if (i > 0) {
          b.add_move_pair(prev, n, 90.0 * q);
          used[prev][q] = true;
          used[n][(q + 2) % 4] = true;
        }
        floor_ids.push_back(n);
        prev = n;
      }
      floors.push_back(floor_ids);
    }
    // Congruent elevator pairing: node k on floor i <-> node k on floor j.
    for (std::size_t i = 0; i < floors.size(); ++i)
      for (std::size_t j = i + 1; j < floors.size(); ++j)
        for (int k = 0; k < floor_nodes; ++k)
          b.add_elevator_pair(floors[i][k], floors[j][k]);
  }

  return b.build();
}

/// Grid "campus": a WxH grid plus one multi-floor building whose ground
/// corridor hangs off the grid corner. floors <= 1 yields the plain grid.
inline NavGraph generate_grid_campus(int width, int height, int floors,
                                     double spacing_m = 1.0) {
  if (floors <= 1) return generate_grid(width, height, spacing_m);
  if (width < 2 || height < 2)
    throw GraphError("grid dimensions must be at least 2x2");
  GraphBuilder b(spacing_m);
  for (int y = 0; y < height; ++y)
    for (int x = 0; x < width; ++x)
      b.add_node({x * spacing_m, y * spacing_m, 0.0});
  auto id = [width](int x, int y) {
    return static_cast<NodeId>(y * width + x);
  };
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      if (x + 1 < width) b.add_move_pair(id(x, y), id(x + 1, y), 0.0);
      if (y + 1 < height) b.add_move_pair(id(x, y), id(x, y + 1), 90.0);
    }
  }
  int radius_hops = static_cast<int>(kElevatorRadiusM / spacing_m);
  int floor_nodes = 2 * radius_hops + 1;
  std::vector<std::vector<NodeId>> floor_ids(floors);
  for (int f = 0; f < floors; ++f) {
    NodeId prev = 0;
    for (int i = 0; i < floor_nodes; ++i) {
      // Ground corridor extends from the grid corner in -y; upper floors are
      // congruent copies stacked in z.
      NodeId n = b.add_node({0.0, -(i + 1) * spacing_m, 3.0 * f}, f, 0);
      if (i > 0)
        b.add_move_pair(prev, n, 270.0);
      else if (f == 0)
        b.add_move_pair(id(0, 0), n, 270.0);
      floor_ids[f].push_back(n);
      prev = n;
    }
  }
  for (int i = 0; i < floors; ++i)
    for (int j = i + 1; j < floors; ++j)
      for (int k = 0; k < floor_nodes; ++k)
        b.add_elevator_pair(floor_ids[i][k], floor_ids[j][k]);
  return b.build();
}

}  // namespace navrl
