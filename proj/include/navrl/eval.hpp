#pragma once

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>
#include <memory>
#include <string>
#include <thread>
#include <vector>

#include "navrl/curriculum.hpp"
#include "navrl/environment.hpp"
#include "navrl/trainer.hpp"

namespace navrl {

struct EvalError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class PolicyMode { Greedy, Sample, Oracle, UniformRandom };

struct EpisodeRecord {
  NodeId start = 0;
  NodeId goal = 0;
  bool success = false;
  int steps = 0;
  double path_m = 0.0;     // Move traversals and elevator rides, in meters
  double optimal_m = 0.0;  // shortest-path length for the task
  double ratio = std::numeric_limits<double>::quiet_NaN();  // undefined on failure
  std::vector<double> policy_entropy;  // per timestep (network policies only)
  std::vector<double> probe_entropy;
  std::vector<NodeId> visited;  // start node, then node after each step
};

struct EvalSummary {
  std::size_t episodes = 0;
  double success_rate = 0.0;
  double mean_ratio = 0.0;  // over successes
  // Percentiles of the success ratios, keyed by percent (2.5 .. 97.5).
  std::map<double, double> ratio_percentiles;
};

/// Uniform random ordered (start, goal) pairs with nonzero distance.
inline std::vector<std::pair<NodeId, NodeId>> sample_eval_tasks(
    const NavGraph& graph, std::size_t count, std::uint64_t seed,
    double min_optimal_m = 0.0) {
  if (graph.size() < 2) throw EvalError("need at least two nodes for tasks");
  Rng rng = make_rng(seed, 0xe7a1);
  std::vector<std::pair<NodeId, NodeId>> tasks;
  int guard = 0;
  while (tasks.size() < count) {
    auto a = static_cast<NodeId>(uniform_index(rng, graph.size()));
    auto b = static_cast<NodeId>(uniform_index(rng, graph.size()));
    if (a == b) continue;
    if (min_optimal_m > 0.0 &&
        graph.shortest_path_length(a, b) < min_optimal_m) {
      if (++guard > 1'000'000)
        throw EvalError("no tasks satisfy the minimum distance");
      continue;
    }
    tasks.push_back({a, b});
  }
  return tasks;
}

/// Fixed-goal scenario: the goal maximizes local node density (nodes within
/// an 8 m radius), and starts are spread by farthest-point sampling.
inline std::vector<std::pair<NodeId, NodeId>> fixed_goal_tasks(
    const NavGraph& graph, std::size_t starts, double density_radius_m = 8.0) {
  if (graph.size() < 2) throw EvalError("need at least two nodes for tasks");
  DistanceTable table(graph);
  NodeId goal = 0;
  std::size_t best_density = 0;
  for (NodeId n = 0; n < graph.size(); ++n) {
    std::size_t density = 0;
    for (NodeId m = 0; m < graph.size(); ++m)
      if (m != n && table.distance_m(n, m) <= density_radius_m) ++density;
    if (density > best_density) {
      best_density = density;
      goal = n;
    }
  }
  std::vector<NodeId> chosen{goal};
  std::vector<std::pair<NodeId, NodeId>> tasks;
  while (tasks.size() < starts && chosen.size() <= graph.size()) {
    NodeId best = goal;
    double best_min = -1.0;
    for (NodeId n = 0; n < graph.size(); ++n) {
      if (std::find(chosen.begin(), chosen.end(), n) != chosen.end()) continue;
      double min_d = std::numeric_limits<double>::infinity();
      for (NodeId c : chosen) min_d = std::min(min_d, table.distance_m(n, c));
      if (min_d > best_min) {
        best_min = min_d;
        best = n;
      }
    }
    if (best == goal) break;
    chosen.push_back(best);
    tasks.push_back({best, goal});
  }
  return tasks;
}

/// Runs episodes for every task. Episodes execute in parallel over
/// independent environment instances; per-slot seeding makes the records
/// independent of scheduling.
template <typename S>
std::vector<EpisodeRecord> evaluate(const NavGraph& graph,
                                    const EmbeddingStore& store,
                                    const AgentParams<S>& params,
                                    const std::vector<std::pair<NodeId, NodeId>>& tasks,
                                    int episodes_per_task, const EnvConfig& ecfg,
                                    PolicyMode mode, std::uint64_t seed,
                                    unsigned threads = 1) {
  if (tasks.empty()) throw EvalError("no evaluation tasks");
  const bool needs_network =
      mode == PolicyMode::Greedy || mode == PolicyMode::Sample;
  if (needs_network && params.cfg.embed_dim != store.dim())
    throw EvalError("checkpoint dimension does not match the store");
  if (needs_network &&
      params.cfg.num_actions !=
          static_cast<std::uint32_t>(action_count(graph.floor_count())))
    throw EvalError("checkpoint action count does not match the graph");

  const std::size_t slots = tasks.size() * static_cast<std::size_t>(episodes_per_task);
  std::vector<EpisodeRecord> records(slots);

  auto run_slot = [&](Environment& env, std::size_t slot) {
    const auto [start, goal] = tasks[slot / episodes_per_task];
    Rng rng = make_rng(seed, 0xeea0 + slot);
    EpisodeRecord rec;
    rec.start = start;
    rec.goal = goal;
    rec.optimal_m = graph.shortest_path_length(start, goal);
    Heading heading{static_cast<std::uint8_t>(uniform_index(rng, 4))};
    StepResult sr = env.reset(start, heading, goal, rng);
    rec.visited.push_back(start);

    std::vector<S> obs, goal_obs, onehot;
    RecurrentState<S> rstate(params.cfg.width);
    int prev_action = -1;
    if (needs_network) {
      detail::cast_assign(obs, sr.observation);
      detail::cast_assign(goal_obs, sr.goal_observation);
    }
    StepCache<S> cache;
    const double spacing = graph.node_spacing_m();
    while (!env.done()) {
      int action_idx;
      if (mode == PolicyMode::Oracle) {
        action_idx = action_index(env.oracle_action());
      } else if (mode == PolicyMode::UniformRandom) {
        action_idx = static_cast<int>(uniform_index(rng, env.action_count()));
      } else {
        detail::onehot_assign(onehot, prev_action, params.cfg.num_actions);
        agent_forward(params, std::span<const S>(obs), std::span<const S>(goal_obs),
                      std::span<const S>(onehot), rstate, cache);
        rstate = cache.new_state();
        action_idx = mode == PolicyMode::Greedy
                         ? argmax_action(std::span<const S>(cache.policy))
                         : sample_action(std::span<const S>(cache.policy), rng);
        rec.policy_entropy.push_back(static_cast<double>(
            policy_entropy(std::span<const S>(cache.policy))));
        rec.probe_entropy.push_back(static_cast<double>(
            policy_entropy(std::span<const S>(cache.loc_probs))));
      }
      Action action = action_from_index(action_idx, graph.floor_count());
      env.step(action, rng, sr);
      ++rec.steps;
      rec.visited.push_back(env.state().node);
      if (!sr.info.stuttered && !sr.info.blocked &&
          (action.kind == ActionKind::Forward ||
           action.kind == ActionKind::Elevator))
        rec.path_m += spacing;
      if (needs_network) detail::cast_assign(obs, sr.observation);
      prev_action = action_idx;
    }
    rec.success = sr.info.reached_goal;
    if (rec.success && rec.optimal_m > 0.0) rec.ratio = rec.path_m / rec.optimal_m;
    records[slot] = std::move(rec);
  };

  if (threads <= 1) {
    Environment env(graph, store, ecfg);
    for (std::size_t slot = 0; slot < slots; ++slot) run_slot(env, slot);
  } else {
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < threads; ++w) {
      pool.emplace_back([&, w] {
        Environment env(graph, store, ecfg);
        for (std::size_t slot = w; slot < slots; slot += threads)
          run_slot(env, slot);
      });
    }
    for (auto& t : pool) t.join();
  }
  return records;
}

inline EvalSummary summarize(const std::vector<EpisodeRecord>& records) {
  EvalSummary s;
  s.episodes = records.size();
  std::vector<double> ratios;
  for (const auto& r : records) {
    if (r.success) {
      s.success_rate += 1.0;
      if (std::isfinite(r.ratio)) ratios.push_back(r.ratio);
    }
  }
  if (!records.empty()) s.success_rate /= static_cast<double>(records.size());
  if (!ratios.empty()) {
    double sum = 0.0;
    for (double r : ratios) sum += r;
    s.mean_ratio = sum / static_cast<double>(ratios.size());
    std::sort(ratios.begin(), ratios.end());
    for (double pct : {2.5, 25.0, 50.0, 75.0, 97.5}) {
      auto idx = static_cast<std::size_t>(
          pct / 100.0 * static_cast<double>(ratios.size() - 1) + 0.5);
      s.ratio_percentiles[pct] = ratios[std::min(idx, ratios.size() - 1)];
    }
  }
  return s;
}

struct EntropyCurves {
  std::vector<double> policy_mean;
  std::vector<double> probe_mean;
  std::vector<std::uint64_t> episodes;  // how many episodes reached step t
};

/// Mean per-timestep policy and probe entropies, averaged over episodes that
/// ran at least that long.
inline EntropyCurves entropy_curves_from_records(
    const std::vector<EpisodeRecord>& records, std::size_t max_steps = 64) {
  EntropyCurves c;
  c.policy_mean.assign(max_steps, 0.0);
  c.probe_mean.assign(max_steps, 0.0);
  c.episodes.assign(max_steps, 0);
  for (const auto& r : records) {
    for (std::size_t t = 0; t < std::min(max_steps, r.policy_entropy.size()); ++t) {
      c.policy_mean[t] += r.policy_entropy[t];
      c.probe_mean[t] += r.probe_entropy[t];
      ++c.episodes[t];
    }
  }
  for (std::size_t t = 0; t < max_steps; ++t) {
    if (c.episodes[t] > 0) {
      c.policy_mean[t] /= static_cast<double>(c.episodes[t]);
      c.probe_mean[t] /= static_cast<double>(c.episodes[t]);
    }
  }
  return c;
}

template <typename S>
EntropyCurves entropy_probe(const NavGraph& graph, const EmbeddingStore& store,
                            const AgentParams<S>& params,
                            const std::vector<std::pair<NodeId, NodeId>>& tasks,
                            int episodes_per_task, const EnvConfig& ecfg,
                            std::uint64_t seed, unsigned threads = 1,
                            std::vector<EpisodeRecord>* out_records = nullptr) {
  auto records = evaluate(graph, store, params, tasks, episodes_per_task, ecfg,
                          PolicyMode::Sample, seed, threads);
  auto curves = entropy_curves_from_records(records);
  if (out_records) *out_records = std::move(records);
  return curves;
}

// ---------------------------------------------------------------------------
// Throughput benchmark
// ---------------------------------------------------------------------------

struct BenchResult {
  double tps = 0.0;
  std::uint64_t transitions = 0;
  double seconds = 0.0;
  int workers = 0;
};

namespace detail {

/// Shared phase control: workers spin through warmup, count only during the
/// measure phase.
template <typename StepFn>
BenchResult run_bench(int workers, double duration_s, double warmup_s,
                      const StepFn& make_worker, std::ostream* metrics_sink) {
  BenchResult result;
  result.workers = workers;
  if (duration_s <= 0.0) return result;  // zero-sample report

  std::atomic<int> phase{0};  // 0 warmup, 1 measure, 2 stop
  std::vector<std::uint64_t> counts(static_cast<std::size_t>(workers) * 16, 0);
  std::vector<std::thread> pool;
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      auto step = make_worker(w);
      std::uint64_t local = 0;
      int seen;
      while ((seen = phase.load(std::memory_order_relaxed)) != 2) {
        step();
        if (seen == 1) ++local;
      }
      counts[static_cast<std::size_t>(w) * 16] = local;
    });
  }
  std::this_thread::sleep_for(std::chrono::duration<double>(warmup_s));
  const auto t0 = std::chrono::steady_clock::now();
  phase.store(1, std::memory_order_relaxed);
  const auto deadline = t0 + std::chrono::duration<double>(duration_s);
  while (std::chrono::steady_clock::now() < deadline) {
    std::this_thread::sleep_for(std::chrono::milliseconds(50));
    if (metrics_sink)
      (*metrics_sink) << "# bench heartbeat\n" << std::flush;
  }
  phase.store(2, std::memory_order_relaxed);
  const auto t1 = std::chrono::steady_clock::now();
  for (auto& t : pool) t.join();
  for (int w = 0; w < workers; ++w)
    result.transitions += counts[static_cast<std::size_t>(w) * 16];
  result.seconds = std::chrono::duration<double>(t1 - t0).count();
  result.tps = result.seconds > 0.0
                   ? static_cast<double>(result.transitions) / result.seconds
                   : 0.0;
  return result;
}

}  // namespace detail

/// Environment-only stepping: transition + observation sampling + noise,
/// uniform random actions, episodes resampled on termination.
inline BenchResult bench_env(const NavGraph& graph, const EmbeddingStore& store,
                             const EnvConfig& ecfg, int workers,
                             double duration_s, std::uint64_t seed,
                             double warmup_s = 1.0,
                             std::ostream* metrics_sink = nullptr) {
  auto make_worker = [&](int w) {
    auto env = std::make_shared<Environment>(graph, store, ecfg);
    auto rng = std::make_shared<Rng>(make_rng(seed, 0xbe7c + w));
    auto out = std::make_shared<StepResult>();
    auto reset = [env, rng, &graph] {
      NodeId a = static_cast<NodeId>(uniform_index(*rng, graph.size()));
      NodeId b = static_cast<NodeId>(uniform_index(*rng, graph.size()));
      if (a == b) b = (b + 1) % graph.size();
      env->reset(a, Heading{static_cast<std::uint8_t>(uniform_index(*rng, 4))},
                 b, *rng);
    };
    reset();
    int n_actions = env->action_count();
    int floors = graph.floor_count();
    return [env, rng, out, reset, n_actions, floors] {
      int a = static_cast<int>(uniform_index(*rng, n_actions));
      env->step(action_from_index(a, floors), *rng, *out);
      if (out->done) reset();
    };
  };
  return detail::run_bench(workers, duration_s, warmup_s, make_worker,
                           metrics_sink);
}

/// Environment stepping plus the agent forward pass and policy sampling.
template <typename S>
BenchResult bench_env_forward(const NavGraph& graph, const EmbeddingStore& store,
                              const AgentParams<S>& params, const EnvConfig& ecfg,
                              int workers, double duration_s, std::uint64_t seed,
                              double warmup_s = 1.0) {
  auto make_worker = [&](int w) {
    struct WorkerState {
      Environment env;
      Rng rng;
      StepResult out;
      std::vector<S> obs, goal, onehot;
      RecurrentState<S> rstate;
      StepCache<S> cache;
      int prev_action = -1;
      WorkerState(const NavGraph& g, const EmbeddingStore& s, const EnvConfig& e,
                  std::uint64_t sd, std::uint32_t width)
          : env(g, s, e), rng(make_rng(sd)), rstate(width) {}
    };
    auto st = std::make_shared<WorkerState>(graph, store, ecfg,
                                            derive_seed(seed, 0xbeef + w),
                                            params.cfg.width);
    auto reset = [st, &graph] {
      NodeId a = static_cast<NodeId>(uniform_index(st->rng, graph.size()));
      NodeId b = static_cast<NodeId>(uniform_index(st->rng, graph.size()));
      if (a == b) b = (b + 1) % graph.size();
      StepResult r = st->env.reset(
          a, Heading{static_cast<std::uint8_t>(uniform_index(st->rng, 4))}, b,
          st->rng);
      detail::cast_assign(st->obs, r.observation);
      detail::cast_assign(st->goal, r.goal_observation);
      st->rstate.zero();
      st->prev_action = -1;
    };
    reset();
    const AgentParams<S>* p = &params;
    int floors = graph.floor_count();
    return [st, reset, p, floors] {
      detail::onehot_assign(st->onehot, st->prev_action, p->cfg.num_actions);
      agent_forward(*p, std::span<const S>(st->obs), std::span<const S>(st->goal),
                    std::span<const S>(st->onehot), st->rstate, st->cache);
      st->rstate = st->cache.new_state();
      int a = sample_action(std::span<const S>(st->cache.policy), st->rng);
      st->env.step(action_from_index(a, floors), st->rng, st->out);
      detail::cast_assign(st->obs, st->out.observation);
      st->prev_action = a;
      if (st->out.done) reset();
    };
  };
  return detail::run_bench(workers, duration_s, warmup_s, make_worker, nullptr);
}

// ---------------------------------------------------------------------------
// Episode-record files and figure-ready plot data (tab-separated, one header
// row, '#' provenance comments).
// ---------------------------------------------------------------------------

namespace detail {

inline std::ofstream open_plot_file(const std::string& path,
                                    const std::string& provenance) {
  std::ofstream out(path);
  if (!out) throw EvalError("cannot open '" + path + "' for writing");
  if (!provenance.empty()) out << "# " << provenance << "\n";
  return out;
}

}  // namespace detail

inline void write_episode_records(const std::vector<EpisodeRecord>& records,
                                  const std::string& path,
                                  const std::string& provenance = "") {
  auto out = detail::open_plot_file(path, provenance);
  out << "start\tgoal\tsuccess\tsteps\tpath_m\toptimal_m\tratio\n";
  char buf[160];
  for (const auto& r : records) {
    if (r.success)
      std::snprintf(buf, sizeof buf, "%u\t%u\t1\t%d\t%.9g\t%.9g\t%.9g\n",
                    r.start, r.goal, r.steps, r.path_m, r.optimal_m, r.ratio);
    else
      std::snprintf(buf, sizeof buf, "%u\t%u\t0\t%d\t%.9g\t%.9g\t-\n", r.start,
                    r.goal, r.steps, r.path_m, r.optimal_m);
    out << buf;
  }
}

inline std::vector<EpisodeRecord> read_episode_records(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw EvalError("cannot open '" + path + "'");
  std::vector<EpisodeRecord> records;
  std::string line;
  bool header_seen = false;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    if (!header_seen) {
      header_seen = true;  // column header
      continue;
    }
    EpisodeRecord r;
    char ratio_field[64];
    int success;
    if (std::sscanf(line.c_str(), "%u\t%u\t%d\t%d\t%lg\t%lg\t%63s", &r.start,
                    &r.goal, &success, &r.steps, &r.path_m, &r.optimal_m,
                    ratio_field) != 7)
      throw EvalError("malformed episode record: " + line);
    r.success = success != 0;
    if (ratio_field[0] != '-') r.ratio = std::stod(ratio_field);
    records.push_back(r);
  }
  return records;
}

inline void write_trajectories(const std::vector<EpisodeRecord>& records,
                               const std::string& path,
                               const std::string& provenance = "") {
  auto out = detail::open_plot_file(path, provenance);
  out << "episode\tstart\tgoal\tsuccess\tnodes\n";
  for (std::size_t i = 0; i < records.size(); ++i) {
    const auto& r = records[i];
    out << i << "\t" << r.start << "\t" << r.goal << "\t" << (r.success ? 1 : 0)
        << "\t";
    for (std::size_t k = 0; k < r.visited.size(); ++k) {
      if (k) out << ' ';
      out << r.visited[k];
    }
    out << "\n";
  }
}

inline void write_learning_curve(const std::vector<MetricsRecord>& metrics,
                                 const std::string& path,
                                 const std::string& provenance = "") {
  if (metrics.empty()) throw EvalError("no metrics records to plot");
  auto out = detail::open_plot_file(path, provenance);
  out << "step\tsolved_len\n";
  char buf[80];
  for (const auto& m : metrics) {
    std::snprintf(buf, sizeof buf, "%llu\t%.9g\n",
                  static_cast<unsigned long long>(m.step), m.solved_len);
    out << buf;
  }
}

inline void write_ratio_histogram(const std::vector<EpisodeRecord>& records,
                                  const std::string& path, double bucket = 0.1,
                                  const std::string& provenance = "") {
  if (records.empty()) throw EvalError("no records to plot");
  std::map<long, std::uint64_t> buckets;
  for (const auto& r : records)
    if (r.success && std::isfinite(r.ratio))
      ++buckets[std::lround(std::floor(r.ratio / bucket + 1e-9))];
  auto out = detail::open_plot_file(path, provenance);
  out << "ratio_bucket_lo\tcount\n";
  char buf[80];
  for (const auto& [b, count] : buckets) {
    std::snprintf(buf, sizeof buf, "%.9g\t%llu\n", b * bucket,
                  static_cast<unsigned long long>(count));
    out << buf;
  }
}

/// Raw (optimal_m, path_m) scatter over successes, plus a sibling
/// '<path>.bands.tsv' with per-bucket percentiles of path_m.
inline void write_path_scatter(const std::vector<EpisodeRecord>& records,
                               const std::string& path, double band_bucket_m = 10.0,
                               const std::string& provenance = "") {
  if (records.empty()) throw EvalError("no records to plot");
  auto out = detail::open_plot_file(path, provenance);
  out << "optimal_m\tpath_m\n";
  char buf[80];
  std::map<long, std::vector<double>> bands;
  for (const auto& r : records) {
    if (!r.success) continue;
    std::snprintf(buf, sizeof buf, "%.9g\t%.9g\n", r.optimal_m, r.path_m);
    out << buf;
    bands[std::lround(std::floor(r.optimal_m / band_bucket_m))].push_back(r.path_m);
  }
  auto bands_out = detail::open_plot_file(path + ".bands.tsv", provenance);
  bands_out << "optimal_bucket_lo\tp2.5\tp25\tp50\tp75\tp97.5\tcount\n";
  for (auto& [b, values] : bands) {
    std::sort(values.begin(), values.end());
    auto pct = [&](double p) {
      auto idx = static_cast<std::size_t>(
          p / 100.0 * static_cast<double>(values.size() - 1) + 0.5);
      return values[std::min(idx, values.size() - 1)];
    };
    std::snprintf(buf, sizeof buf, "%.9g\t%.9g\t%.9g\t%.9g\t%.9g\t%.9g\t%zu\n",
                  b * band_bucket_m, pct(2.5), pct(25), pct(50), pct(75),
                  pct(97.5), values.size());
    bands_out << buf;
  }
}

inline void write_visitation_heatmap(const NavGraph& graph,
                                     const std::string& path,
                                     const std::string& provenance = "") {
  auto counts = graph.visitation_counts();
  auto out = detail::open_plot_file(path, provenance);
  out << "node\tx\ty\tcount\n";
  char buf[160];
  for (NodeId n = 0; n < graph.size(); ++n) {
    std::snprintf(buf, sizeof buf, "%u\t%.9g\t%.9g\t%llu\n", n,
                  graph.node(n).position[0], graph.node(n).position[1],
                  static_cast<unsigned long long>(counts[n]));
    out << buf;
  }
}

inline void write_length_histogram(const PairStats& stats,
                                   const std::string& path,
                                   const std::string& provenance = "") {
  if (stats.pair_count == 0) throw EvalError("no pairs to plot");
  auto out = detail::open_plot_file(path, provenance);
  out << "length_bucket_lo_m\tcount\n";
  char buf[80];
  for (std::size_t b = 0; b < stats.histogram.size(); ++b) {
    std::snprintf(buf, sizeof buf, "%.9g\t%llu\n", b * stats.bucket_width_m,
                  static_cast<unsigned long long>(stats.histogram[b]));
    out << buf;
  }
}

inline void write_entropy_curves(const EntropyCurves& curves,
                                 const std::string& path,
                                 const std::string& provenance = "") {
  auto out = detail::open_plot_file(path, provenance);
  out << "t\tpolicy_entropy\tprobe_entropy\tepisodes\n";
  char buf[160];
  for (std::size_t t = 0; t < curves.policy_mean.size(); ++t) {
    if (curves.episodes[t] == 0) continue;
    std::snprintf(buf, sizeof buf, "%zu\t%.9g\t%.9g\t%llu\n", t,
                  curves.policy_mean[t], curves.probe_mean[t],
                  static_cast<unsigned long long>(curves.episodes[t]));
    out << buf;
  }
}

/// One-sided paired comparison that entropies at a later step are lower than
/// at an earlier step: returns the t statistic over per-episode differences
/// (early - late); t > 2.33 corresponds to p < 0.01 for large n.
inline double paired_decrease_t_statistic(const std::vector<EpisodeRecord>& records,
                                          std::size_t early, std::size_t late,
                                          bool probe_head) {
  std::vector<double> diffs;
  for (const auto& r : records) {
    const auto& e = probe_head ? r.probe_entropy : r.policy_entropy;
    if (e.size() > late) diffs.push_back(e[early] - e[late]);
  }
  if (diffs.size() < 2) return 0.0;
  double mean = 0.0;
  for (double d : diffs) mean += d;
  mean /= static_cast<double>(diffs.size());
  double var = 0.0;
  for (double d : diffs) var += (d - mean) * (d - mean);
  var /= static_cast<double>(diffs.size() - 1);
  if (var <= 0.0) return mean > 0.0 ? std::numeric_limits<double>::infinity() : 0.0;
  return mean / std::sqrt(var / static_cast<double>(diffs.size()));
}

}  // namespace navrl
