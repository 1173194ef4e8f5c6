#include <catch2/catch_amalgamated.hpp>

#include <deque>

#include "navrl/environment.hpp"
#include "oracles.hpp"

using namespace navrl;

namespace {

EmbeddingStore tiny_store(const NavGraph& g, std::uint32_t dim = 6,
                          std::uint32_t rotations = 2) {
  PrecomputeParams p;
  p.dim = dim;
  p.rotations_per_frame = rotations;
  p.frames_per_edge = 4;
  p.seed = 123;
  return precompute_synthetic(g, p);
}

EnvConfig quiet_config(int horizon = 100) {
  EnvConfig cfg;
  cfg.p_stutter = 0.0;
  cfg.noise.sigma_global = 0.0;
  cfg.noise.sigma_local = 0.0;
  cfg.horizon = horizon;
  return cfg;
}

/// Independent product-space shortest paths, derived by probing the
/// environment's own deterministic transitions (stutter and noise off).
std::vector<std::uint32_t> probed_product_distances(const NavGraph& g,
                                                    const EmbeddingStore& store,
                                                    NodeId goal) {
  const int n_actions = action_count(g.floor_count());
  auto idx = [](NodeId n, int q) { return n * 4 + q; };
  // succ[state][action] = next state
  std::vector<std::vector<std::size_t>> succ(g.size() * 4,
                                             std::vector<std::size_t>(n_actions));
  Rng rng = make_rng(5);
  for (NodeId n = 0; n < g.size(); ++n) {
    for (int q = 0; q < 4; ++q) {
      for (int a = 0; a < n_actions; ++a) {
        Environment env(g, store, quiet_config());
        env.reset(n, Heading{static_cast<std::uint8_t>(q)}, goal, rng);
        env.step(action_from_index(a, g.floor_count()), rng);
        succ[idx(n, q)][a] =
            idx(env.state().node, env.state().heading.quadrant);
      }
    }
  }
  // Reverse BFS from all headings of the goal.
  std::vector<std::vector<std::size_t>> preds(g.size() * 4);
  for (std::size_t s = 0; s < succ.size(); ++s)
    for (int a = 0; a < n_actions; ++a)
      if (succ[s][a] != s) preds[succ[s][a]].push_back(s);
  std::vector<std::uint32_t> dist(g.size() * 4, kNoHopPath);
  std::deque<std::size_t> queue;
  for (int q = 0; q < 4; ++q) {
    dist[idx(goal, q)] = 0;
    queue.push_back(idx(goal, q));
  }
  while (!queue.empty()) {
    std::size_t s = queue.front();
    queue.pop_front();
    for (std::size_t p : preds[s])
      if (dist[p] == kNoHopPath) {
        dist[p] = dist[s] + 1;
        queue.push_back(p);
      }
  }
  return dist;
}

}  // namespace

TEST_CASE("turn actions rotate the heading by 90 degrees") {
  NavGraph g = generate_grid(3, 3, 1.0);
  EmbeddingStore store = tiny_store(g);
  Environment env(g, store, quiet_config());
  Rng rng = make_rng(1);
  env.reset(0, Heading{0}, 8, rng);
  env.step(Action::turn_left(), rng);
  CHECK(env.state().heading.quadrant == 3);  // 0 deg -> 270 deg
  env.reset(0, Heading{0}, 8, rng);
  env.step(Action::turn_right(), rng);
  CHECK(env.state().heading.quadrant == 1);  // 0 deg -> 90 deg
}

TEST_CASE("forward stutter frequency matches p_stutter") {
  // A long corridor so Forward is never blocked.
  GraphBuilder b(1.0);
  const int n = 200;
  for (int i = 0; i < n; ++i) b.add_node({static_cast<double>(i), 0, 0});
  for (int i = 0; i + 1 < n; ++i)
    b.add_move_pair(static_cast<NodeId>(i), static_cast<NodeId>(i + 1), 0.0);
  NavGraph g = b.build();
  EmbeddingStore store = tiny_store(g, 4, 1);

  EnvConfig cfg = quiet_config(1 << 30);
  cfg.p_stutter = 0.05;
  Environment env(g, store, cfg);
  Rng rng = make_rng(99);
  env.reset(0, Heading{0}, n - 1, rng);
  int stutters = 0;
  const int steps = 100'000;
  StepResult out;
  for (int i = 0; i < steps; ++i) {
    // Bounce off the corridor ends so Forward always has an edge.
    if (env.state().node == n - 2 && env.state().heading.quadrant == 0) {
      env.reset(0, Heading{0}, n - 1, rng);
    }
    env.step(Action::forward(), rng, out);
    if (out.info.stuttered) ++stutters;
    REQUIRE_FALSE(out.info.blocked);
  }
  double rate = static_cast<double>(stutters) / steps;
  CHECK_THAT(rate, Catch::Matchers::WithinAbs(0.05, 0.005));
}

TEST_CASE("forward is deterministic with zero stutter") {
  NavGraph g = generate_grid(4, 4, 1.0);
  EmbeddingStore store = tiny_store(g);
  Environment env(g, store, quiet_config());
  Rng rng = make_rng(3);
  env.reset(0, Heading{0}, 15, rng);
  env.step(Action::forward(), rng);
  CHECK(env.state().node == 1);
  env.step(Action::forward(), rng);
  CHECK(env.state().node == 2);
}

TEST_CASE("turns never stutter even at p_stutter = 1") {
  NavGraph g = generate_grid(3, 3, 1.0);
  EmbeddingStore store = tiny_store(g);
  EnvConfig cfg = quiet_config(1 << 20);
  cfg.p_stutter = 1.0;
  Environment env(g, store, cfg);
  Rng rng = make_rng(4);
  env.reset(4, Heading{0}, 0, rng);
  StepResult out;
  for (int i = 0; i < 100; ++i) {
    env.step(i % 2 == 0 ? Action::turn_left() : Action::turn_right(), rng, out);
    REQUIRE_FALSE(out.info.stuttered);
  }
  // Forward must now always stutter.
  for (int i = 0; i < 100; ++i) {
    env.step(Action::forward(), rng, out);
    REQUIRE(out.info.stuttered);
    REQUIRE(env.state().node == 4);
  }
}

TEST_CASE("elevator at a non-elevator node is a blocked no-op") {
  NavGraph g = generate_grid_campus(5, 5, 3);
  EmbeddingStore store = tiny_store(g);
  Environment env(g, store, quiet_config());
  Rng rng = make_rng(5);
  env.reset(12, Heading{0}, 0, rng);  // grid interior, not elevator adjacent
  StepResult out;
  env.step(Action::elevator(2), rng, out);
  CHECK(out.info.blocked);
  CHECK(env.state().node == 12);
  CHECK(out.reward == 0.0);
}

TEST_CASE("elevator rides relocate to the linked node preserving heading") {
  NavGraph g = generate_grid_campus(5, 5, 3);
  EmbeddingStore store = tiny_store(g);
  Environment env(g, store, quiet_config());
  Rng rng = make_rng(6);
  NodeId lift = 0;
  for (NodeId n = 0; n < g.size(); ++n)
    if (g.node(n).is_elevator_adjacent && g.node(n).floor == 0) lift = n;
  env.reset(lift, Heading{2}, 0, rng);
  StepResult out;
  env.step(Action::elevator(2), rng, out);
  CHECK_FALSE(out.info.blocked);
  CHECK(env.state().node == g.find_elevator_edge(lift, 2)->to);
  CHECK(env.state().heading.quadrant == 2);
  // Elevator to the current floor is blocked.
  env.step(Action::elevator(2), rng, out);
  CHECK(out.info.blocked);
}

TEST_CASE("reset returns zero reward and not done") {
  NavGraph g = generate_grid(3, 3, 1.0);
  EmbeddingStore store = tiny_store(g);
  Environment env(g, store, quiet_config());
  Rng rng = make_rng(7);
  StepResult r = env.reset(0, Heading{1}, 8, rng);
  CHECK(r.reward == 0.0);
  CHECK_FALSE(r.done);
  CHECK(r.observation.size() == store.dim());
  CHECK(r.goal_observation.size() == store.dim());
}

TEST_CASE("seeded resets are reproducible") {
  NavGraph g = generate_grid(3, 3, 1.0);
  EmbeddingStore store = tiny_store(g);
  EnvConfig cfg;  // default noise on
  Environment env(g, store, cfg);
  Rng rng1 = make_rng(11);
  Rng rng2 = make_rng(11);
  StepResult a = env.reset(2, Heading{0}, 6, rng1);
  StepResult b = env.reset(2, Heading{0}, 6, rng2);
  CHECK(a.observation == b.observation);
  CHECK(a.goal_observation == b.goal_observation);
}

TEST_CASE("reset at the goal does not terminate; the first step does") {
  NavGraph g = generate_grid(3, 3, 1.0);
  EmbeddingStore store = tiny_store(g);
  Environment env(g, store, quiet_config());
  Rng rng = make_rng(8);
  StepResult r = env.reset(4, Heading{0}, 4, rng);
  CHECK_FALSE(r.done);
  StepResult s = env.step(Action::turn_left(), rng);
  CHECK(s.done);
  CHECK(s.reward == 1.0);
  CHECK(s.info.reached_goal);
}

TEST_CASE("reward fires exactly when the post-transition node is the goal") {
  NavGraph g = generate_grid(3, 3, 1.0);
  EmbeddingStore store = tiny_store(g);
  const NodeId goal = 4;
  Rng rng = make_rng(9);
  for (NodeId n = 0; n < g.size(); ++n) {
    for (int q = 0; q < 4; ++q) {
      for (int a = 0; a < action_count(g.floor_count()); ++a) {
        Environment env(g, store, quiet_config());
        env.reset(n, Heading{static_cast<std::uint8_t>(q)}, goal, rng);
        StepResult out =
            env.step(action_from_index(a, g.floor_count()), rng);
        bool at_goal = env.state().node == goal;
        REQUIRE(out.reward == (at_goal ? 1.0 : 0.0));
        REQUIRE(out.info.reached_goal == at_goal);
      }
    }
  }
}

TEST_CASE("noise-free stepping is bit-reproducible") {
  NavGraph g = generate_grid(4, 4, 1.0);
  EmbeddingStore store = tiny_store(g);
  auto run = [&] {
    Environment env(g, store, quiet_config());
    Rng rng = make_rng(12);
    std::vector<double> trace;
    env.reset(0, Heading{0}, 15, rng);
    StepResult out;
    for (int i = 0; i < 20 && !env.done(); ++i) {
      env.step(i % 3 == 0 ? Action::turn_right() : Action::forward(), rng, out);
      trace.insert(trace.end(), out.observation.begin(), out.observation.end());
      trace.push_back(out.reward);
    }
    return trace;
  };
  CHECK(run() == run());
}

TEST_CASE("episodes never exceed the horizon and done is absorbing") {
  NavGraph g = generate_grid(3, 3, 1.0);
  EmbeddingStore store = tiny_store(g);
  Environment env(g, store, quiet_config(5));
  Rng rng = make_rng(13);
  env.reset(0, Heading{0}, 8, rng);
  StepResult out;
  for (int i = 0; i < 5; ++i) {
    REQUIRE_FALSE(env.done());
    env.step(Action::turn_left(), rng, out);
  }
  CHECK(env.done());
  CHECK(out.done);
  CHECK(out.reward == 0.0);
  CHECK_THROWS_AS(env.step(Action::turn_left(), rng), EnvError);
}

TEST_CASE("single-frame pool with noise off returns phi exactly") {
  GraphBuilder b(1.0);
  b.add_node({0, 0, 0});
  b.add_node({1, 0, 0});
  b.add_move_pair(0, 1, 0.0);
  NavGraph g = b.build();
  std::vector<FrameMeta> frames(2);
  frames[0].anchor_node = 0;
  frames[0].offset_m = 0.1f;
  frames[0].yaw_deg = 0.0f;
  frames[1].anchor_node = 1;
  frames[1].offset_m = -0.1f;
  frames[1].yaw_deg = 0.0f;
  PrecomputeParams p;
  p.dim = 5;
  p.rotations_per_frame = 1;
  p.seed = 77;
  EmbeddingStore store = precompute(g, frames, p);
  Environment env(g, store, quiet_config());
  Rng rng = make_rng(14);
  StepResult r = env.reset(0, Heading{0}, 1, rng);
  auto phi = store.phi(0, 0);
  REQUIRE(r.observation.size() == phi.size());
  for (std::size_t i = 0; i < phi.size(); ++i)
    CHECK(r.observation[i] == static_cast<double>(phi[i]));
}

TEST_CASE("frame selection is uniform over a 120-frame pool") {
  GraphBuilder b(1.0);
  b.add_node({0, 0, 0});
  b.add_node({1, 0, 0});
  b.add_move_pair(0, 1, 0.0);
  NavGraph g = b.build();
  std::vector<FrameMeta> frames(121);
  for (int i = 0; i < 120; ++i) {
    frames[i].anchor_node = 0;
    frames[i].offset_m = static_cast<float>(0.5 * (i - 60) / 60.0);
    frames[i].yaw_deg = 0.0f;
  }
  frames[120].anchor_node = 1;  // keep node 1's pool non-empty
  PrecomputeParams p;
  p.dim = 3;
  p.rotations_per_frame = 1;
  p.seed = 15;
  EmbeddingStore store = precompute(g, frames, p);
  REQUIRE(store.node_pool(0).size() == 120);

  Environment env(g, store, quiet_config(1 << 30));
  Rng rng = make_rng(16);
  env.reset(0, Heading{1}, 1, rng);  // heading 90: forward blocked, stays put
  // Identify sampled frames by phi: with noise off the observation equals a
  // stored record bitwise.
  std::vector<std::uint64_t> counts(120, 0);
  std::vector<double> obs;
  for (int i = 0; i < 100'000; ++i) {
    env.sample_observation(rng, obs);
    for (FrameId f : store.node_pool(0)) {
      if (obs[0] == static_cast<double>(store.phi(f, 0)[0]) &&
          obs[1] == static_cast<double>(store.phi(f, 0)[1])) {
        ++counts[f];
        break;
      }
    }
  }
  std::uint64_t total = 0;
  for (auto c : counts) total += c;
  REQUIRE(total == 100'000);
  double stat = oracles::chi2_uniform_statistic(counts, total);
  CHECK(stat < oracles::chi2_critical(119.0, 0.01));
}

TEST_CASE("observation sampling is deterministic given the rng state") {
  NavGraph g = generate_grid(3, 3, 1.0);
  EmbeddingStore store = tiny_store(g);
  Environment env(g, store, EnvConfig{});
  Rng rng = make_rng(17);
  env.reset(0, Heading{0}, 8, rng);
  Rng probe1 = rng;
  Rng probe2 = rng;
  std::vector<double> a, b;
  env.sample_observation(probe1, a);
  env.sample_observation(probe2, b);
  CHECK(a == b);
}

TEST_CASE("oracle picks Forward when aligned with the shortest path") {
  GraphBuilder b(1.0);
  for (int i = 0; i < 5; ++i) b.add_node({static_cast<double>(i), 0, 0});
  for (int i = 0; i + 1 < 5; ++i)
    b.add_move_pair(static_cast<NodeId>(i), static_cast<NodeId>(i + 1), 0.0);
  NavGraph g = b.build();
  EmbeddingStore store = tiny_store(g, 4, 1);
  Environment env(g, store, quiet_config());
  Rng rng = make_rng(18);
  env.reset(0, Heading{0}, 3, rng);
  CHECK(env.oracle_action() == Action::forward());
  // Goal directly behind: deterministic TurnRight.
  env.reset(3, Heading{0}, 0, rng);
  CHECK(env.oracle_action() == Action::turn_right());
}

TEST_CASE("oracle realizes the product-space optimum") {
  // Lattice graphs plus one campus with elevators.
  std::vector<NavGraph> graphs;
  for (std::uint64_t seed = 0; seed < 8; ++seed) {
    Rng rng = make_rng(seed, 55);
    graphs.push_back(oracles::random_lattice_graph(rng, 50));
  }
  graphs.push_back(generate_grid_campus(4, 4, 3));

  for (const NavGraph& g : graphs) {
    EmbeddingStore store = tiny_store(g, 4, 1);
    Rng rng = make_rng(g.size(), 66);
    for (int trial = 0; trial < 6; ++trial) {
      NodeId start = static_cast<NodeId>(uniform_index(rng, g.size()));
      NodeId goal = static_cast<NodeId>(uniform_index(rng, g.size()));
      auto q = static_cast<std::uint8_t>(uniform_index(rng, 4));
      if (start == goal) continue;
      auto expected = probed_product_distances(g, store, goal);
      Environment env(g, store, quiet_config(10'000));
      env.reset(start, Heading{q}, goal, rng);
      REQUIRE(env.oracle_distance() == expected[start * 4 + q]);
      int steps = 0;
      while (!env.done()) {
        env.step(env.oracle_action(), rng);
        ++steps;
        REQUIRE(steps < 10'000);
      }
      REQUIRE(env.state().node == goal);
      REQUIRE(static_cast<std::uint32_t>(steps) == expected[start * 4 + q]);
    }
  }
}
