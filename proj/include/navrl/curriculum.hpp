#pragma once

#include <cmath>
#include <cstdint>
#include <mutex>
#include <stdexcept>
#include <utility>
#include <vector>

#include "navrl/navgraph.hpp"
#include "navrl/rng.hpp"

namespace navrl {

struct CurriculumError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// All-pairs hop distances, one BFS per source. Row-major N x N.
class DistanceTable {
 public:
  explicit DistanceTable(const NavGraph& g)
      : size_(g.size()), spacing_m_(g.node_spacing_m()) {
    hops_.resize(size_ * size_);
    for (NodeId a = 0; a < size_; ++a) {
      auto row = g.hop_distances_from(a);
      std::copy(row.begin(), row.end(), hops_.begin() + a * size_);
      for (std::uint32_t h : row)
        if (h != kNoHopPath) max_hops_ = std::max(max_hops_, h);
    }
  }

  std::size_t size() const { return size_; }
  std::uint32_t hops(NodeId a, NodeId b) const { return hops_[a * size_ + b]; }
  double distance_m(NodeId a, NodeId b) const {
    return static_cast<double>(hops(a, b)) * spacing_m_;
  }
  double l_max_m() const { return static_cast<double>(max_hops_) * spacing_m_; }
  double spacing_m() const { return spacing_m_; }

 private:
  std::size_t size_;
  double spacing_m_;
  std::uint32_t max_hops_ = 0;
  std::vector<std::uint32_t> hops_;
};

struct TaskPool {
  int level = 1;
  std::vector<std::pair<NodeId, NodeId>> pairs;  // ordered (start, goal)
};

/// Ordered pairs with 0 < shortest path <= (level/levels) * L_max, in
/// lexicographic order.
inline TaskPool level_pairs(const DistanceTable& table, int level, int levels) {
  if (level < 1 || level > levels)
    throw CurriculumError("curriculum level " + std::to_string(level) +
                          " outside [1, " + std::to_string(levels) + "]");
  const double bound =
      static_cast<double>(level) / levels * table.l_max_m() + 1e-9;
  TaskPool pool;
  pool.level = level;
  for (NodeId a = 0; a < table.size(); ++a)
    for (NodeId b = 0; b < table.size(); ++b) {
      if (a == b) continue;
      double d = table.distance_m(a, b);
      if (d > 0.0 && d <= bound) pool.pairs.push_back({a, b});
    }
  return pool;
}

inline TaskPool level_pairs(const NavGraph& g, int level, int levels) {
  return level_pairs(DistanceTable(g), level, levels);
}

inline std::pair<NodeId, NodeId> sample_task(const TaskPool& pool, Rng& rng) {
  if (pool.pairs.empty()) throw CurriculumError("empty task pool");
  return pool.pairs[uniform_index(rng, pool.pairs.size())];
}

struct CurriculumConfig {
  int levels = 100;        // N_c
  double threshold = 0.8;  // advance when windowed success rate reaches this
  int window = 100;        // success window W, shared across workers
  int horizon_min = 100;
  int horizon_factor = 4;
};

struct CurriculumState {
  int level = 1;
  int levels = 100;
  double l_max_m = 0.0;
  double threshold = 0.8;
  std::vector<std::uint8_t> window;  // ring buffer of recent outcomes
  std::size_t window_capacity = 100;
  std::size_t window_pos = 0;
};

inline CurriculumState make_curriculum(const CurriculumConfig& cfg,
                                       double l_max_m) {
  if (cfg.levels < 1) throw CurriculumError("curriculum needs at least 1 level");
  if (!(cfg.threshold > 0.0) || cfg.threshold > 1.0)
    throw CurriculumError("threshold must lie in (0, 1]");
  if (cfg.window < 1) throw CurriculumError("window must be positive");
  CurriculumState s;
  s.levels = cfg.levels;
  s.l_max_m = l_max_m;
  s.threshold = cfg.threshold;
  s.window_capacity = static_cast<std::size_t>(cfg.window);
  return s;
}

inline double window_success_rate(const CurriculumState& s) {
  if (s.window.empty()) return 0.0;
  std::size_t hits = 0;
  for (auto v : s.window) hits += v;
  return static_cast<double>(hits) / static_cast<double>(s.window.size());
}

/// Pushes one episode outcome; once the window is full and the success rate
/// reaches the threshold, advances one level and clears the window. Returns
/// whether an advance happened.
inline bool record_and_maybe_advance(CurriculumState& s, bool success) {
  if (s.window.size() < s.window_capacity) {
    s.window.push_back(success ? 1 : 0);
  } else {
    s.window[s.window_pos] = success ? 1 : 0;
    s.window_pos = (s.window_pos + 1) % s.window_capacity;
  }
  if (s.window.size() == s.window_capacity &&
      window_success_rate(s) >= s.threshold && s.level < s.levels) {
    ++s.level;
    s.window.clear();
    s.window_pos = 0;
    return true;
  }
  return false;
}

/// Episode horizon rule: proportional to the level's maximum path length,
/// floored so early levels still allow exploration.
inline int episode_horizon(const CurriculumState& s, double spacing_m,
                           const CurriculumConfig& cfg) {
  double max_path =
      static_cast<double>(s.level) / s.levels * s.l_max_m;
  int proportional =
      cfg.horizon_factor * static_cast<int>(std::ceil(max_path / spacing_m));
  return std::max(cfg.horizon_min, proportional);
}

/// Thread-safe wrapper: sampling, outcome recording and level advancement
/// are linearizable across workers. Task pools are materialized per level on
/// first use.
class SharedCurriculum {
 public:
  SharedCurriculum(const NavGraph& graph, const CurriculumConfig& cfg)
      : table_(graph),
        cfg_(cfg),
        state_(make_curriculum(cfg, table_.l_max_m())),
        spacing_m_(graph.node_spacing_m()) {
    pool_ = level_pairs(table_, state_.level, state_.levels);
  }

  const DistanceTable& distances() const { return table_; }

  int level() const {
    std::lock_guard lock(mutex_);
    return state_.level;
  }

  double success_rate() const {
    std::lock_guard lock(mutex_);
    return window_success_rate(state_);
  }

  struct Task {
    NodeId start;
    NodeId goal;
    double optimal_m;
    int horizon;
    int level;
  };

  /// Samples a start/goal pair at the current level. The caller's rng keeps
  /// worker streams independent of each other.
  Task sample(Rng& rng) {
    std::lock_guard lock(mutex_);
    auto [start, goal] = sample_task(pool_, rng);
    Task t;
    t.start = start;
    t.goal = goal;
    t.optimal_m = table_.distance_m(start, goal);
    t.horizon = episode_horizon(state_, spacing_m_, cfg_);
    t.level = state_.level;
    return t;
  }

  /// Records an episode outcome; rebuilds the pool when the level advances.
  bool record(bool success) {
    std::lock_guard lock(mutex_);
    bool advanced = record_and_maybe_advance(state_, success);
    if (advanced) pool_ = level_pairs(table_, state_.level, state_.levels);
    return advanced;
  }

  bool at_final_level() const {
    std::lock_guard lock(mutex_);
    return state_.level >= state_.levels;
  }

 private:
  DistanceTable table_;
  CurriculumConfig cfg_;
  mutable std::mutex mutex_;
  CurriculumState state_;
  TaskPool pool_;
  double spacing_m_;
};

}  // namespace navrl
