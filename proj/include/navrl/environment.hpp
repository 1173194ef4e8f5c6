#pragma once

#include <cstdint>
#include <deque>
#include <optional>
#include <stdexcept>
#include <vector>

#include "navrl/augment.hpp"
#include "navrl/embedstore.hpp"
#include "navrl/navgraph.hpp"
#include "navrl/rng.hpp"

namespace navrl {

struct EnvError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Agent orientation, quantized to 90-degree quadrants. Quadrant q faces
/// bearing 90*q degrees.
struct Heading {
  std::uint8_t quadrant = 0;

  double bearing_deg() const { return 90.0 * quadrant; }
  Heading turned_left() const {
    return Heading{static_cast<std::uint8_t>((quadrant + 3) % 4)};
  }
  Heading turned_right() const {
    return Heading{static_cast<std::uint8_t>((quadrant + 1) % 4)};
  }
  bool operator==(const Heading&) const = default;
};

enum class ActionKind : std::uint8_t { TurnLeft, TurnRight, Forward, Elevator };

struct Action {
  ActionKind kind = ActionKind::Forward;
  int floor = 0;  // Elevator only

  static Action turn_left() { return {ActionKind::TurnLeft, 0}; }
  static Action turn_right() { return {ActionKind::TurnRight, 0}; }
  static Action forward() { return {ActionKind::Forward, 0}; }
  static Action elevator(int floor) { return {ActionKind::Elevator, floor}; }
  bool operator==(const Action&) const = default;
};

// Dense action indexing shared with the agent: 0 = TurnLeft, 1 = TurnRight,
// 2 = Forward, 3+f = Elevator(f). N_a = 3 + floor_count.
inline int action_count(int floor_count) { return 3 + floor_count; }

inline int action_index(const Action& a) {
  switch (a.kind) {
    case ActionKind::TurnLeft: return 0;
    case ActionKind::TurnRight: return 1;
    case ActionKind::Forward: return 2;
    case ActionKind::Elevator: return 3 + a.floor;
  }
  return 0;
}

inline Action action_from_index(int index, int floor_count) {
  if (index == 0) return Action::turn_left();
  if (index == 1) return Action::turn_right();
  if (index == 2) return Action::forward();
  int floor = index - 3;
  if (floor < 0 || floor >= floor_count)
    throw EnvError("action index " + std::to_string(index) + " out of range");
  return Action::elevator(floor);
}

struct StepInfo {
  bool reached_goal = false;
  bool stuttered = false;
  bool blocked = false;
};

struct StepResult {
  std::vector<double> observation;
  std::vector<double> goal_observation;
  double reward = 0.0;
  bool done = false;
  StepInfo info;
};

struct EnvConfig {
  double p_stutter = 0.05;
  NoiseConfig noise;
  int horizon = 100;
  double goal_radius_m = 0.0;      // 0 = exact node match
  bool goal_observation_noised = false;
  bool ou_reset_per_episode = true;
};

struct EnvState {
  NodeId node = 0;
  Heading heading;
  NodeId goal = 0;
  int step = 0;
  OuState ou;
  int episode_horizon = 0;
};

/// Shortest step counts over the (node, heading) product space for one goal
/// node, with turns, forward moves and elevator rides all costing one step.
/// Reaching the goal node at any heading terminates.
class OraclePlanner {
 public:
  explicit OraclePlanner(const NavGraph& graph) : graph_(&graph) {}

  const std::vector<std::uint32_t>& distances(NodeId goal) {
    if (!cached_goal_ || *cached_goal_ != goal) {
      compute(goal);
      cached_goal_ = goal;
    }
    return dist_;
  }

  static std::size_t state_index(NodeId node, Heading h) {
    return static_cast<std::size_t>(node) * 4 + h.quadrant;
  }

 private:
  void compute(NodeId goal) {
    const NavGraph& g = *graph_;
    if (incoming_.empty()) build_incoming();
    dist_.assign(g.size() * 4, kNoHopPath);
    std::deque<std::size_t> queue;
    for (std::uint8_t q = 0; q < 4; ++q) {
      dist_[state_index(goal, Heading{q})] = 0;
      queue.push_back(state_index(goal, Heading{q}));
    }
    // Reverse BFS: for each settled state, relax its predecessors.
    // Predecessors of (n, h): (n, h+1) via TurnLeft, (n, h-1) via TurnRight,
    // (m, h) for Move edges m->n within the heading-h cone, and (m, h) for
    // elevator edges m->n.
    while (!queue.empty()) {
      std::size_t s = queue.front();
      queue.pop_front();
      NodeId n = static_cast<NodeId>(s / 4);
      Heading h{static_cast<std::uint8_t>(s % 4)};
      std::uint32_t d = dist_[s];
      auto relax = [&](std::size_t pred) {
        if (dist_[pred] == kNoHopPath) {
          dist_[pred] = d + 1;
          queue.push_back(pred);
        }
      };
      relax(state_index(n, h.turned_right()));  // TurnLeft from h+1 lands on h
      relax(state_index(n, h.turned_left()));   // TurnRight from h-1 lands on h
      for (const auto& [m, q] : incoming_[n]) {
        if (q == 0xff)
          relax(state_index(m, h));  // elevator preserves heading
        else if (q == h.quadrant)
          relax(state_index(m, h));
      }
    }
  }

  // incoming_[n]: list of (m, heading quadrant) that reach n with Forward,
  // plus (m, 0xff) markers for elevator edges m->n (any heading).
  void build_incoming() {
    const NavGraph& g = *graph_;
    incoming_.assign(g.size(), {});
    for (NodeId m = 0; m < g.size(); ++m) {
      for (const Edge& e : g.edges_from(m)) {
        if (e.kind == EdgeKind::Move) {
          for (std::uint8_t q = 0; q < 4; ++q)
            if (bearing_distance_deg(e.bearing_deg, 90.0 * q) <= 45.0 + 1e-9)
              incoming_[e.to].push_back({m, q});
        } else {
          incoming_[e.to].push_back({m, 0xff});
        }
      }
    }
  }

  // Elevator rides preserve heading, so the predecessor relaxation above is
  // heading-to-same-heading; the 0xff marker expands to all four pairs.
  const NavGraph* graph_;
  std::vector<std::uint32_t> dist_;
  std::vector<std::vector<std::pair<NodeId, std::uint8_t>>> incoming_;
  std::optional<NodeId> cached_goal_;
};

/// The POMDP over a bound graph and embedding store. One instance per
/// worker; distinct instances over the same graph/store step in parallel.
class Environment {
 public:
  Environment(const NavGraph& graph, const EmbeddingStore& store, EnvConfig cfg)
      : graph_(&graph), store_(&store), cfg_(cfg), planner_(graph) {
    cfg_.noise.validate();
    if (cfg_.horizon < 1) throw EnvError("horizon must be positive");
    for (NodeId n = 0; n < graph.size(); ++n)
      if (store.node_pool(n).empty())
        throw EnvError("empty observation pool for node " + std::to_string(n) +
                       " (graph/store mismatch)");
    state_.ou = make_ou(cfg_.noise);
  }

  const NavGraph& graph() const { return *graph_; }
  const EmbeddingStore& store() const { return *store_; }
  const EnvState& state() const { return state_; }
  const EnvConfig& config() const { return cfg_; }
  int action_count() const { return navrl::action_count(graph_->floor_count()); }
  std::uint32_t obs_dim() const { return store_->dim(); }
  bool done() const { return done_; }

  void set_horizon(int horizon) {
    if (horizon < 1) throw EnvError("horizon must be positive");
    cfg_.horizon = horizon;
  }

  StepResult reset(NodeId start, Heading heading, NodeId goal, Rng& rng) {
    if (start >= graph_->size() || goal >= graph_->size())
      throw EnvError("reset with invalid node id");
    state_.node = start;
    state_.heading = heading;
    state_.goal = goal;
    state_.step = 0;
    state_.episode_horizon = cfg_.horizon;
    if (cfg_.ou_reset_per_episode) ou_reset(state_.ou);
    done_ = false;

    StepResult result;
    sample_goal_observation(rng);
    sample_observation(rng, observation_buf_);
    result.goal_observation = goal_obs_;
    result.observation = observation_buf_;
    result.reward = 0.0;
    result.done = false;
    return result;
  }

  void step(const Action& action, Rng& rng, StepResult& out) {
    if (done_) throw EnvError("step after episode end");
    out.info = StepInfo{};
    switch (action.kind) {
      case ActionKind::TurnLeft:
        state_.heading = state_.heading.turned_left();
        break;
      case ActionKind::TurnRight:
        state_.heading = state_.heading.turned_right();
        break;
      case ActionKind::Forward: {
        if (cfg_.p_stutter > 0.0 && uniform01(rng) < cfg_.p_stutter) {
          out.info.stuttered = true;
        } else if (const Edge* e = graph_->find_move_edge(
                       state_.node, state_.heading.bearing_deg())) {
          state_.node = e->to;
        } else {
          out.info.blocked = true;
        }
        break;
      }
      case ActionKind::Elevator: {
        if (const Edge* e =
                graph_->find_elevator_edge(state_.node, action.floor)) {
          state_.node = e->to;  // heading preserved
        } else {
          out.info.blocked = true;
        }
        break;
      }
    }
    ++state_.step;
    out.info.reached_goal = reached_goal();
    out.reward = out.info.reached_goal ? 1.0 : 0.0;
    done_ = out.info.reached_goal || state_.step >= state_.episode_horizon;
    out.done = done_;

    state_.ou = ou_step(state_.ou, rng);
    sample_observation(rng, out.observation);
    out.goal_observation = goal_obs_;
  }

  StepResult step(const Action& action, Rng& rng) {
    StepResult out;
    step(action, rng, out);
    return out;
  }

  /// Frame drawn uniformly from the current node pool, rotation variant
  /// drawn uniformly, then noise applied.
  void sample_observation(Rng& rng, std::vector<double>& out) const {
    const auto& pool = store_->node_pool(state_.node);
    if (pool.empty())
      throw EnvError("empty observation pool for node " +
                     std::to_string(state_.node));
    FrameId frame = pool[uniform_index(rng, pool.size())];
    auto variant = static_cast<std::uint32_t>(
        uniform_index(rng, store_->rotations_per_frame()));
    apply_noise(store_->phi(frame, variant), store_->jac(frame, variant),
                state_.ou, cfg_.noise, rng, out);
  }

  /// A step-count-optimal action toward the goal over the (node, heading)
  /// product space. Tie-break order: Forward, elevators by floor, TurnRight,
  /// TurnLeft.
  Action oracle_action() {
    const auto& dist = planner_.distances(state_.goal);
    std::uint32_t here =
        dist[OraclePlanner::state_index(state_.node, state_.heading)];
    if (here == kNoHopPath) throw EnvError("goal unreachable");
    if (here == 0) return Action::forward();  // already at goal

    auto is_improvement = [&](NodeId n, Heading h) {
      return dist[OraclePlanner::state_index(n, h)] == here - 1;
    };
    if (const Edge* e = graph_->find_move_edge(state_.node,
                                               state_.heading.bearing_deg()))
      if (is_improvement(e->to, state_.heading)) return Action::forward();
    for (int f = 0; f < graph_->floor_count(); ++f)
      if (const Edge* e = graph_->find_elevator_edge(state_.node, f))
        if (is_improvement(e->to, state_.heading)) return Action::elevator(f);
    if (is_improvement(state_.node, state_.heading.turned_right()))
      return Action::turn_right();
    if (is_improvement(state_.node, state_.heading.turned_left()))
      return Action::turn_left();
    throw EnvError("oracle found no improving action");  // unreachable
  }

  /// Optimal step count from the current state to the goal.
  std::uint32_t oracle_distance() {
    return planner_.distances(
        state_.goal)[OraclePlanner::state_index(state_.node, state_.heading)];
  }

 private:
  bool reached_goal() const {
    if (state_.node == state_.goal) return true;
    if (cfg_.goal_radius_m > 0.0)
      return graph_->shortest_path_length(state_.node, state_.goal) <=
             cfg_.goal_radius_m;
    return false;
  }

  void sample_goal_observation(Rng& rng) {
    const auto& pool = store_->node_pool(state_.goal);
    if (pool.empty())
      throw EnvError("empty observation pool for goal node " +
                     std::to_string(state_.goal));
    FrameId frame = pool[uniform_index(rng, pool.size())];
    // Variant 0, and by default no noise: the goal image is a stable
    // conditioning signal.
    if (cfg_.goal_observation_noised) {
      apply_noise(store_->phi(frame, 0), store_->jac(frame, 0), state_.ou,
                  cfg_.noise, rng, goal_obs_);
    } else {
      auto phi = store_->phi(frame, 0);
      goal_obs_.assign(phi.begin(), phi.end());
    }
  }

  const NavGraph* graph_;
  const EmbeddingStore* store_;
  EnvConfig cfg_;
  EnvState state_;
  bool done_ = true;  // must reset before stepping
  std::vector<double> goal_obs_;
  std::vector<double> observation_buf_;
  OraclePlanner planner_;
};

}  // namespace navrl
