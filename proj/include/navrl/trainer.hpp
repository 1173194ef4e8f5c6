#pragma once

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <mutex>
#include <ostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "navrl/agent.hpp"
#include "navrl/curriculum.hpp"
#include "navrl/environment.hpp"
#include "navrl/rng.hpp"

namespace navrl {

struct TrainError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct TrainerConfig {
  double gamma = 0.99;
  int rollout_len = 50;
  double entropy_weight = 5e-4;
  double value_loss_weight = 0.5;
  double probe_weight = 1.0;
  int workers = 128;
  std::uint32_t width = 256;
  AdamConfig adam;
  std::uint64_t total_env_steps = 1'000'000;
  std::uint64_t seed = 0;
  std::uint64_t metrics_interval = 10'000;
  bool locked_updates = true;  // relaxed mode tolerates torn reads
  bool greedy = false;         // argmax policy, for determinism tests
  int expected_actions = 0;    // 0 = derive from the graph
  // Optional early stop: once the curriculum reaches its final level, run
  // this many additional steps, then stop (still capped by the budget).
  bool stop_after_final_level = false;
  std::uint64_t steps_after_final_level = 0;

  void validate() const {
    if (gamma < 0.0 || gamma > 1.0) throw TrainError("gamma must lie in [0, 1]");
    if (rollout_len < 1) throw TrainError("rollout length must be >= 1");
    if (workers < 1) throw TrainError("worker count must be >= 1");
  }
};

template <typename S>
struct Transition {
  int prev_action = -1;  // -1 = episode start (zero one-hot)
  int action = 0;
  S log_prob = S(0);
  double reward = 0.0;
  S value = S(0);
  bool done = false;
  NodeId node = 0;  // node at observation time; probe target
};

template <typename S>
struct Rollout {
  std::vector<Transition<S>> transitions;
  std::vector<StepCache<S>> caches;  // aligned with transitions
  S bootstrap_value = S(0);          // V after the rollout; 0 if terminal
  RecurrentState<S> initial_state;
};

template <typename S>
struct Returns {
  std::vector<S> returns;
  std::vector<S> advantages;
};

/// R_t = r_t + gamma * R_{t+1}, seeded by the bootstrap value; A_t = R_t - V_t.
template <typename S>
Returns<S> compute_returns(const Rollout<S>& rollout, double gamma) {
  Returns<S> out;
  const std::size_t n = rollout.transitions.size();
  out.returns.resize(n);
  out.advantages.resize(n);
  S acc = rollout.bootstrap_value;
  for (std::size_t t = n; t-- > 0;) {
    acc = static_cast<S>(rollout.transitions[t].reward) +
          static_cast<S>(gamma) * acc;
    out.returns[t] = acc;
    out.advantages[t] = acc - rollout.transitions[t].value;
  }
  return out;
}

struct LossBreakdown {
  double policy = 0.0;       // sum of -log pi(a_t) * A_t
  double value = 0.0;        // weighted value loss sum
  double entropy_sum = 0.0;  // sum of H(pi_t), unweighted
  double probe = 0.0;        // probe cross-entropy sum, unweighted
  double entropy_weight = 0.0;
  double probe_weight = 0.0;
  int steps = 0;

  double total() const {
    return policy + value - entropy_weight * entropy_sum + probe_weight * probe;
  }
};

/// Composite A3C loss over one rollout, plus exact head gradients at the
/// policy/value/probe heads. Advantages are treated as constants.
template <typename S>
LossBreakdown a3c_loss(const Rollout<S>& rollout, const Returns<S>& returns,
                       const TrainerConfig& cfg,
                       std::vector<HeadGrads<S>>& head_grads) {
  const std::size_t n = rollout.transitions.size();
  if (returns.returns.size() != n || rollout.caches.size() != n)
    throw TrainError("rollout/returns length mismatch");
  LossBreakdown loss;
  loss.entropy_weight = cfg.entropy_weight;
  loss.probe_weight = cfg.probe_weight;
  loss.steps = static_cast<int>(n);
  head_grads.resize(n);
  for (std::size_t t = 0; t < n; ++t) {
    const Transition<S>& tr = rollout.transitions[t];
    const StepCache<S>& cache = rollout.caches[t];
    const std::size_t na = cache.policy.size();
    const S advantage = returns.advantages[t];
    const S ret = returns.returns[t];

    HeadGrads<S>& g = head_grads[t];
    g.d_policy_logits.assign(na, S(0));
    const S entropy = policy_entropy(std::span<const S>(cache.policy));
    for (std::size_t j = 0; j < na; ++j) {
      // -log pi(a) * A contributes A*(pi - onehot); the entropy bonus
      // -beta*H contributes beta*pi*(log pi + H).
      S grad = advantage * (cache.policy[j] -
                            (static_cast<int>(j) == tr.action ? S(1) : S(0)));
      grad += static_cast<S>(cfg.entropy_weight) * cache.policy[j] *
              (std::log(cache.policy[j]) + entropy);
      g.d_policy_logits[j] = grad;
    }
    const S value_err = ret - cache.value;
    g.d_value = static_cast<S>(-2.0 * cfg.value_loss_weight) * value_err;
    g.d_loc_logits.assign(cache.loc_probs.size(), S(0));
    for (std::size_t j = 0; j < cache.loc_probs.size(); ++j)
      g.d_loc_logits[j] =
          static_cast<S>(cfg.probe_weight) *
          (cache.loc_probs[j] - (j == tr.node ? S(1) : S(0)));

    loss.policy += -std::log(static_cast<double>(cache.policy[tr.action])) *
                   static_cast<double>(advantage);
    loss.value += cfg.value_loss_weight * static_cast<double>(value_err) *
                  static_cast<double>(value_err);
    loss.entropy_sum += static_cast<double>(entropy);
    loss.probe +=
        -std::log(static_cast<double>(cache.loc_probs[tr.node]));
  }
  return loss;
}

template <typename S>
int sample_action(std::span<const S> policy, Rng& rng) {
  double u = uniform01(rng);
  double acc = 0.0;
  for (std::size_t j = 0; j < policy.size(); ++j) {
    acc += static_cast<double>(policy[j]);
    if (u < acc) return static_cast<int>(j);
  }
  return static_cast<int>(policy.size()) - 1;
}

template <typename S>
int argmax_action(std::span<const S> policy) {
  int best = 0;
  for (std::size_t j = 1; j < policy.size(); ++j)
    if (policy[j] > policy[best]) best = static_cast<int>(j);
  return best;
}

/// Per-worker episode state that persists across rollouts.
template <typename S>
struct EpisodeContext {
  bool active = false;
  std::vector<S> obs, goal;
  RecurrentState<S> rstate;
  int prev_action = -1;
  SharedCurriculum::Task task{};
  int steps_taken = 0;
};

namespace detail {

template <typename S>
void cast_assign(std::vector<S>& dst, const std::vector<double>& src) {
  dst.resize(src.size());
  for (std::size_t i = 0; i < src.size(); ++i) dst[i] = static_cast<S>(src[i]);
}

template <typename S>
void onehot_assign(std::vector<S>& dst, int index, std::size_t n) {
  dst.assign(n, S(0));
  if (index >= 0) dst[static_cast<std::size_t>(index)] = S(1);
}

/// Data copy without reallocation; shapes must already match.
template <typename S>
void copy_params(AgentParams<S>& dst, const AgentParams<S>& src) {
  auto d = dst.tensors();
  auto s = src.tensors();
  for (std::size_t i = 0; i < d.size(); ++i)
    std::copy(s[i]->begin(), s[i]->end(), d[i]->begin());
}

}  // namespace detail

template <typename S>
void start_episode(Environment& env, SharedCurriculum& curriculum,
                   EpisodeContext<S>& ctx, std::uint32_t width, Rng& rng) {
  ctx.task = curriculum.sample(rng);
  Heading heading{static_cast<std::uint8_t>(uniform_index(rng, 4))};
  env.set_horizon(ctx.task.horizon);
  StepResult r = env.reset(ctx.task.start, heading, ctx.task.goal, rng);
  detail::cast_assign(ctx.obs, r.observation);
  detail::cast_assign(ctx.goal, r.goal_observation);
  ctx.rstate = RecurrentState<S>(width);
  ctx.prev_action = -1;
  ctx.steps_taken = 0;
  ctx.active = true;
}

struct CollectOutcome {
  bool episode_ended = false;
  bool success = false;
};

/// Collects up to rollout_len transitions; a rollout never spans an episode
/// boundary. Leaves the context ready for the next rollout (or inactive at
/// episode end).
template <typename S>
CollectOutcome collect_rollout(Environment& env, const AgentParams<S>& params,
                               EpisodeContext<S>& ctx, const TrainerConfig& cfg,
                               Rng& rng, Rollout<S>& out) {
  if (!ctx.active) throw TrainError("collect_rollout without an active episode");
  const std::size_t na = params.cfg.num_actions;
  out.transitions.clear();
  out.caches.clear();
  out.initial_state = ctx.rstate;
  CollectOutcome outcome;

  std::vector<S> prev_onehot;
  StepResult step_out;
  for (int t = 0; t < cfg.rollout_len; ++t) {
    detail::onehot_assign(prev_onehot, ctx.prev_action, na);
    StepCache<S> cache;
    agent_forward(params, std::span<const S>(ctx.obs),
                  std::span<const S>(ctx.goal), std::span<const S>(prev_onehot),
                  ctx.rstate, cache);
    int action = cfg.greedy ? argmax_action(std::span<const S>(cache.policy))
                            : sample_action(std::span<const S>(cache.policy), rng);
    NodeId node_before = env.state().node;
    env.step(action_from_index(action, env.graph().floor_count()), rng,
             step_out);

    Transition<S> tr;
    tr.prev_action = ctx.prev_action;
    tr.action = action;
    tr.log_prob = std::log(cache.policy[action]);
    tr.reward = step_out.reward;
    tr.value = cache.value;
    tr.done = step_out.done;
    tr.node = node_before;

    ctx.rstate = cache.new_state();
    ctx.prev_action = action;
    detail::cast_assign(ctx.obs, step_out.observation);
    ++ctx.steps_taken;

    out.transitions.push_back(tr);
    out.caches.push_back(std::move(cache));

    if (step_out.done) {
      outcome.episode_ended = true;
      outcome.success = step_out.info.reached_goal;
      ctx.active = false;
      out.bootstrap_value = S(0);
      return outcome;
    }
  }
  // Non-terminal rollout: bootstrap with V at the pending observation. The
  // persistent recurrent state is not advanced by this forward.
  detail::onehot_assign(prev_onehot, ctx.prev_action, na);
  StepCache<S> scratch;
  agent_forward(params, std::span<const S>(ctx.obs), std::span<const S>(ctx.goal),
                std::span<const S>(prev_onehot), ctx.rstate, scratch);
  out.bootstrap_value = scratch.value;
  return outcome;
}

// ---------------------------------------------------------------------------
// Metrics stream
// ---------------------------------------------------------------------------

struct MetricsRecord {
  std::uint64_t step = 0;
  int level = 1;
  double success = 0.0;
  double solved_len = 0.0;
  double loss_pi = 0.0;
  double loss_v = 0.0;
  double entropy = 0.0;
  double tps = 0.0;
};

inline std::string format_metrics(const MetricsRecord& r) {
  char buf[256];
  std::snprintf(buf, sizeof buf,
                "step=%llu level=%d success=%.9g solved_len=%.9g "
                "loss_pi=%.9g loss_v=%.9g entropy=%.9g tps=%.9g",
                static_cast<unsigned long long>(r.step), r.level, r.success,
                r.solved_len, r.loss_pi, r.loss_v, r.entropy, r.tps);
  return buf;
}

inline MetricsRecord parse_metrics(const std::string& line) {
  MetricsRecord r;
  unsigned long long step;
  if (std::sscanf(line.c_str(),
                  "step=%llu level=%d success=%lg solved_len=%lg "
                  "loss_pi=%lg loss_v=%lg entropy=%lg tps=%lg",
                  &step, &r.level, &r.success, &r.solved_len, &r.loss_pi,
                  &r.loss_v, &r.entropy, &r.tps) != 8)
    throw TrainError("malformed metrics line: " + line);
  r.step = step;
  return r;
}

template <typename S>
struct TrainResult {
  AgentParams<S> params;
  AdamState<S> adam;
  std::vector<MetricsRecord> metrics;
  std::uint64_t env_steps = 0;
  int final_level = 1;
  double final_success = 0.0;
  double wall_seconds = 0.0;
};

/// Asynchronous advantage actor-critic over shared parameters. Workers own
/// one environment each; the parameter store, Adam moments, curriculum and
/// step counter are shared. In locked mode (the default) snapshots and
/// updates are serialized by a mutex; relaxed mode runs hogwild-style and
/// tolerates torn reads.
template <typename S>
TrainResult<S> train(const NavGraph& graph, const EmbeddingStore& store,
                     const TrainerConfig& tcfg, const EnvConfig& ecfg,
                     const CurriculumConfig& ccfg,
                     std::ostream* progress = nullptr) {
  tcfg.validate();
  const int derived_actions = action_count(graph.floor_count());
  if (tcfg.expected_actions != 0 && tcfg.expected_actions != derived_actions)
    throw TrainError("configuration mismatch: config declares " +
                     std::to_string(tcfg.expected_actions) +
                     " actions but the graph defines " +
                     std::to_string(derived_actions));

  AgentConfig acfg;
  acfg.embed_dim = store.dim();
  acfg.num_actions = static_cast<std::uint32_t>(derived_actions);
  acfg.num_nodes = static_cast<std::uint32_t>(graph.size());
  acfg.width = tcfg.width;

  AgentParams<S> shared = init_params<S>(acfg, tcfg.seed);
  AdamState<S> adam(acfg);
  std::mutex params_mutex;
  SharedCurriculum curriculum(graph, ccfg);

  std::atomic<std::uint64_t> global_steps{0};
  std::atomic<bool> stop{false};
  std::atomic<std::uint64_t> stop_at_step{~0ull};

  struct Accum {
    std::uint64_t episodes = 0, successes = 0;
    double solved_len_sum = 0.0;
    double loss_pi = 0.0, loss_v = 0.0, entropy = 0.0;
    std::uint64_t loss_steps = 0;
    double last_success = 0.0, last_solved = 0.0;
  };
  Accum accum;
  std::vector<MetricsRecord> records;
  std::mutex metrics_mutex;
  const auto t_start = std::chrono::steady_clock::now();
  const bool deterministic = tcfg.workers == 1;

  auto worker_fn = [&](int worker_id) {
    Rng rng = make_rng(tcfg.seed, 1000 + static_cast<std::uint64_t>(worker_id));
    Environment env(graph, store, ecfg);
    EpisodeContext<S> ctx;
    AgentParams<S> snapshot(acfg);
    AgentGrads<S> grads(acfg);
    Rollout<S> rollout;
    Returns<S> returns;
    std::vector<HeadGrads<S>> head_grads;

    while (!stop.load(std::memory_order_relaxed) &&
           global_steps.load(std::memory_order_relaxed) < tcfg.total_env_steps) {
      if (tcfg.locked_updates) {
        std::lock_guard lock(params_mutex);
        detail::copy_params(snapshot, shared);
      } else {
        detail::copy_params(snapshot, shared);  // torn reads tolerated
      }

      if (!ctx.active)
        start_episode(env, curriculum, ctx, acfg.width, rng);
      CollectOutcome outcome =
          collect_rollout(env, snapshot, ctx, tcfg, rng, rollout);
      returns = compute_returns(rollout, tcfg.gamma);
      LossBreakdown loss = a3c_loss(rollout, returns, tcfg, head_grads);
      agent_backward(snapshot, std::span<const StepCache<S>>(rollout.caches),
                     std::span<const HeadGrads<S>>(head_grads), grads);

      if (tcfg.locked_updates) {
        std::lock_guard lock(params_mutex);
        adam_update(shared, grads, adam, tcfg.adam);
      } else {
        adam_update(shared, grads, adam, tcfg.adam);
      }

      if (outcome.episode_ended) curriculum.record(outcome.success);

      const auto len = static_cast<std::uint64_t>(rollout.transitions.size());
      const std::uint64_t before = global_steps.fetch_add(len);
      const std::uint64_t after = before + len;

      {
        std::lock_guard lock(metrics_mutex);
        accum.loss_pi += loss.policy;
        accum.loss_v += loss.value;
        accum.entropy += loss.entropy_sum;
        accum.loss_steps += static_cast<std::uint64_t>(loss.steps);
        if (outcome.episode_ended) {
          ++accum.episodes;
          accum.successes += outcome.success ? 1 : 0;
          accum.solved_len_sum += outcome.success ? ctx.task.optimal_m : 0.0;
        }
        if (before / tcfg.metrics_interval != after / tcfg.metrics_interval) {
          MetricsRecord r;
          r.step = (after / tcfg.metrics_interval) * tcfg.metrics_interval;
          r.level = curriculum.level();
          if (accum.episodes > 0) {
            r.success = static_cast<double>(accum.successes) /
                        static_cast<double>(accum.episodes);
            r.solved_len = accum.solved_len_sum /
                           static_cast<double>(accum.episodes);
            accum.last_success = r.success;
            accum.last_solved = r.solved_len;
          } else {
            r.success = accum.last_success;
            r.solved_len = accum.last_solved;
          }
          if (accum.loss_steps > 0) {
            r.loss_pi = accum.loss_pi / static_cast<double>(accum.loss_steps);
            r.loss_v = accum.loss_v / static_cast<double>(accum.loss_steps);
            r.entropy = accum.entropy / static_cast<double>(accum.loss_steps);
          }
          if (!deterministic) {
            double elapsed =
                std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                              t_start)
                    .count();
            r.tps = elapsed > 0.0 ? static_cast<double>(after) / elapsed : 0.0;
          }
          records.push_back(r);
          if (progress) (*progress) << format_metrics(r) << "\n" << std::flush;
          accum.episodes = accum.successes = 0;
          accum.solved_len_sum = 0.0;
          accum.loss_pi = accum.loss_v = accum.entropy = 0.0;
          accum.loss_steps = 0;
        }
      }

      if (tcfg.stop_after_final_level && curriculum.at_final_level()) {
        std::uint64_t expect = ~0ull;
        stop_at_step.compare_exchange_strong(
            expect, after + tcfg.steps_after_final_level);
      }
      if (after >= stop_at_step.load(std::memory_order_relaxed))
        stop.store(true, std::memory_order_relaxed);
    }
  };

  if (tcfg.workers == 1) {
    worker_fn(0);
  } else {
    std::vector<std::thread> threads;
    for (int w = 0; w < tcfg.workers; ++w) threads.emplace_back(worker_fn, w);
    for (auto& t : threads) t.join();
  }

  std::sort(records.begin(), records.end(),
            [](const MetricsRecord& a, const MetricsRecord& b) {
              return a.step < b.step;
            });

  TrainResult<S> result;
  result.params = std::move(shared);
  result.adam = std::move(adam);
  result.metrics = std::move(records);
  result.env_steps = global_steps.load();
  result.final_level = curriculum.level();
  result.final_success = curriculum.success_rate();
  result.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start)
          .count();
  return result;
}

inline void write_metrics_file(const std::vector<MetricsRecord>& records,
                               const std::string& path) {
  std::ofstream out(path);
  if (!out) throw TrainError("cannot open '" + path + "' for writing");
  for (const MetricsRecord& r : records) out << format_metrics(r) << "\n";
  if (!out) throw TrainError("write failure on '" + path + "'");
}

inline std::vector<MetricsRecord> read_metrics_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw TrainError("cannot open '" + path + "'");
  std::vector<MetricsRecord> records;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    records.push_back(parse_metrics(line));
  }
  return records;
}

}  // namespace navrl
