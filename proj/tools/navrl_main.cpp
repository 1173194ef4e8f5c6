// navrl: graph-navigation replay training toolkit.
//
// Subcommands: gen-graph, precompute, train, evaluate, probe, bench, stats,
// plotdata. Diagnostics go to stderr; data goes to files (stats prints its
// summary to stdout). Exit codes: 0 success, 1 usage error, 2 config error,
// 3 runtime error.

#include <CLI11.hpp>

#include <cstdio>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "navrl/config.hpp"
#include "navrl/eval.hpp"
#include "navrl/navgraph.hpp"
#include "navrl/trainer.hpp"

using namespace navrl;

namespace {

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

RunConfig resolve_config(const std::string& config_path,
                         const std::vector<std::string>& sets,
                         std::optional<std::int64_t> seed) {
  RunConfig cfg;
  if (!config_path.empty()) cfg = load_config(config_path);
  for (const std::string& kv : sets) {
    auto eq = kv.find('=');
    if (eq == std::string::npos)
      throw ConfigError("--set expects key=value, got '" + kv + "'");
    config_set(cfg, detail::trim(kv.substr(0, eq)), kv.substr(eq + 1));
  }
  if (seed) cfg.seed = *seed;
  validate_config(cfg);
  return cfg;
}

std::string provenance(const char* kind, const RunConfig& cfg) {
  char buf[128];
  std::snprintf(buf, sizeof buf, "navrl v1 kind=%s seed=%lld config=%016llx",
                kind, static_cast<long long>(cfg.seed),
                static_cast<unsigned long long>(config_hash(cfg)));
  return buf;
}

NavGraph load_graph_arg(const std::string& flag_path, const RunConfig& cfg) {
  const std::string& path = !flag_path.empty() ? flag_path : cfg.graph_path;
  if (path.empty()) throw UsageError("no graph path given (--graph or config)");
  return load_graph(path);
}

EmbeddingStore load_store_arg(const std::string& flag_path, const RunConfig& cfg) {
  const std::string& path = !flag_path.empty() ? flag_path : cfg.store_path;
  if (path.empty()) throw UsageError("no store path given (--store or config)");
  return load_store(path);
}

int episode_horizon_for_eval(const NavGraph& graph, const RunConfig& cfg) {
  DistanceTable table(graph);
  double l_max = table.l_max_m();
  int proportional = static_cast<int>(cfg.horizon_factor) *
                     static_cast<int>(std::ceil(l_max / graph.node_spacing_m()));
  return std::max(static_cast<int>(cfg.horizon_min), proportional);
}

// ---------------------------------------------------------------------------
// gen-graph
// ---------------------------------------------------------------------------

struct GenGraphArgs {
  std::string grid;  // "WxH"
  bool campus = false;
  int corridors = 4;
  int buildings = 2;
  int floors = 1;
  int corridor_nodes = 25;
  double spacing = 1.0;
  std::uint64_t seed = 0;
  std::string out;
};

void run_gen_graph(const GenGraphArgs& a) {
  if (a.grid.empty() == !a.campus)
    throw UsageError("gen-graph needs exactly one of --grid WxH or --campus");
  NavGraph g = [&] {
    if (a.campus) {
      CampusParams p;
      p.corridors = a.corridors;
      p.buildings = a.buildings;
      p.floors_per_building = a.floors;
      p.nodes_per_corridor = a.corridor_nodes;
      p.spacing_m = a.spacing;
      return generate_campus(a.seed, p);
    }
    int w = 0, h = 0;
    if (std::sscanf(a.grid.c_str(), "%dx%d", &w, &h) != 2)
      throw UsageError("--grid expects WxH, got '" + a.grid + "'");
    return generate_grid_campus(w, h, a.floors, a.spacing);
  }();
  save_graph(g, a.out);
  std::cerr << "wrote " << g.size() << " nodes, " << g.edge_count()
            << " directed edges to " << a.out << "\n";
}

// ---------------------------------------------------------------------------
// precompute
// ---------------------------------------------------------------------------

struct PrecomputeArgs {
  std::string graph, out, config;
  std::vector<std::string> sets;
  std::optional<std::int64_t> seed;
  unsigned threads = 1;
};

void run_precompute(const PrecomputeArgs& a) {
  RunConfig cfg = resolve_config(a.config, a.sets, a.seed);
  NavGraph g = load_graph_arg(a.graph, cfg);
  PrecomputeParams p = make_precompute_params(cfg);
  p.threads = a.threads;
  EmbeddingStore store = precompute_synthetic(g, p);
  save_store(store, a.out);
  std::cerr << "wrote " << store.frame_count() << " frames x "
            << store.rotations_per_frame() << " rotations, dim " << store.dim()
            << " to " << a.out << "\n";
}

// ---------------------------------------------------------------------------
// train
// ---------------------------------------------------------------------------

struct TrainArgs {
  std::string config, graph, store;
  std::vector<std::string> sets;
  std::int64_t seed = 0;
  std::string metrics_out = "metrics.txt";
  std::string checkpoint_out = "checkpoint.agnt";
  bool quiet = false;
};

template <typename S>
void run_train_typed(const TrainArgs& a, const RunConfig& cfg,
                     const NavGraph& graph, const EmbeddingStore& store) {
  TrainerConfig tcfg = make_trainer_config(cfg);
  EnvConfig ecfg = make_env_config(cfg);
  CurriculumConfig ccfg = make_curriculum_config(cfg);
  auto result = train<S>(graph, store, tcfg, ecfg, ccfg,
                         a.quiet ? nullptr : &std::cerr);
  write_metrics_file(result.metrics, a.metrics_out);
  save_checkpoint(result.params, &result.adam, a.checkpoint_out);
  std::cerr << "trained " << result.env_steps << " env steps in "
            << result.wall_seconds << " s; final level " << result.final_level
            << "; metrics -> " << a.metrics_out << "; checkpoint -> "
            << a.checkpoint_out << "\n";
}

void run_train(const TrainArgs& a) {
  RunConfig cfg = resolve_config(a.config, a.sets, a.seed);
  NavGraph graph = load_graph_arg(a.graph, cfg);
  EmbeddingStore store = load_store_arg(a.store, cfg);
  if (cfg.precision == "f32")
    run_train_typed<float>(a, cfg, graph, store);
  else
    run_train_typed<double>(a, cfg, graph, store);
}

// ---------------------------------------------------------------------------
// evaluate / probe
// ---------------------------------------------------------------------------

struct EvaluateArgs {
  std::string checkpoint, config, graph, store;
  std::vector<std::string> sets;
  std::int64_t seed = 0;
  int tasks = 100;
  int fixed_goal_starts = 0;  // > 0 selects the fixed-goal scenario
  int episodes_per_task = 1;
  bool greedy = false;
  double min_optimal_m = 0.0;
  unsigned threads = 1;
  std::string out = "records.tsv";
  std::string summary_out, trajectories_out;
};

void run_evaluate(const EvaluateArgs& a) {
  RunConfig cfg = resolve_config(a.config, a.sets, a.seed);
  NavGraph graph = load_graph_arg(a.graph, cfg);
  EmbeddingStore store = load_store_arg(a.store, cfg);
  AgentParams<double> params = load_checkpoint<double>(a.checkpoint);
  EnvConfig ecfg = make_env_config(cfg);
  ecfg.horizon = episode_horizon_for_eval(graph, cfg);

  auto tasks = a.fixed_goal_starts > 0
                   ? fixed_goal_tasks(graph, a.fixed_goal_starts)
                   : sample_eval_tasks(graph, a.tasks,
                                       static_cast<std::uint64_t>(cfg.seed),
                                       a.min_optimal_m);
  auto records = evaluate(graph, store, params, tasks, a.episodes_per_task,
                          ecfg, a.greedy ? PolicyMode::Greedy : PolicyMode::Sample,
                          static_cast<std::uint64_t>(cfg.seed), a.threads);
  auto prov = provenance("evaluate", cfg);
  write_episode_records(records, a.out, prov);
  auto summary = summarize(records);
  char line[256];
  std::snprintf(line, sizeof line,
                "episodes %zu\nsuccess_rate %.6g\nmean_ratio %.6g\n",
                summary.episodes, summary.success_rate, summary.mean_ratio);
  if (!a.summary_out.empty()) {
    std::ofstream out(a.summary_out);
    out << "# " << prov << "\n" << line;
    for (const auto& [pct, v] : summary.ratio_percentiles)
      out << "ratio_p" << pct << " " << v << "\n";
  }
  if (!a.trajectories_out.empty())
    write_trajectories(records, a.trajectories_out, prov);
  std::cerr << line;
}

struct ProbeArgs {
  std::string checkpoint, config, graph, store;
  std::vector<std::string> sets;
  std::optional<std::int64_t> seed;
  int episodes = 1000;
  double min_optimal_m = 10.0;
  unsigned threads = 1;
  std::string out = "entropy_curves.tsv";
};

void run_probe(const ProbeArgs& a) {
  RunConfig cfg = resolve_config(a.config, a.sets, a.seed);
  NavGraph graph = load_graph_arg(a.graph, cfg);
  EmbeddingStore store = load_store_arg(a.store, cfg);
  AgentParams<double> params = load_checkpoint<double>(a.checkpoint);
  EnvConfig ecfg = make_env_config(cfg);
  ecfg.horizon = episode_horizon_for_eval(graph, cfg);
  auto tasks = sample_eval_tasks(graph, a.episodes,
                                 static_cast<std::uint64_t>(cfg.seed),
                                 a.min_optimal_m);
  auto curves = entropy_probe(graph, store, params, tasks, 1, ecfg,
                              static_cast<std::uint64_t>(cfg.seed), a.threads);
  write_entropy_curves(curves, a.out, provenance("probe", cfg));
  std::cerr << "wrote entropy curves to " << a.out << "\n";
}

// ---------------------------------------------------------------------------
// bench
// ---------------------------------------------------------------------------

struct BenchArgs {
  std::string config, graph, store, checkpoint;
  std::vector<std::string> sets;
  std::int64_t seed = 0;
  int workers = 8;
  double duration = 30.0;
  double warmup = 1.0;
  std::string mode = "env";
  std::string out;
};

void run_bench_cmd(const BenchArgs& a) {
  RunConfig cfg = resolve_config(a.config, a.sets, a.seed);
  NavGraph graph = load_graph_arg(a.graph, cfg);
  EmbeddingStore store = load_store_arg(a.store, cfg);
  EnvConfig ecfg = make_env_config(cfg);
  ecfg.horizon = episode_horizon_for_eval(graph, cfg);
  BenchResult r;
  if (a.mode == "env") {
    r = bench_env(graph, store, ecfg, a.workers, a.duration,
                  static_cast<std::uint64_t>(cfg.seed), a.warmup);
  } else if (a.mode == "env+forward") {
    AgentParams<double> params =
        !a.checkpoint.empty()
            ? load_checkpoint<double>(a.checkpoint)
            : init_params<double>(
                  AgentConfig{store.dim(),
                              static_cast<std::uint32_t>(
                                  action_count(graph.floor_count())),
                              static_cast<std::uint32_t>(graph.size()),
                              static_cast<std::uint32_t>(cfg.network_width)},
                  static_cast<std::uint64_t>(cfg.seed));
    r = bench_env_forward(graph, store, params, ecfg, a.workers, a.duration,
                          static_cast<std::uint64_t>(cfg.seed), a.warmup);
  } else {
    throw UsageError("--mode must be env or env+forward");
  }
  char line[200];
  std::snprintf(line, sizeof line,
                "mode %s\nworkers %d\ntransitions %llu\nseconds %.6g\ntps %.6g\n",
                a.mode.c_str(), r.workers,
                static_cast<unsigned long long>(r.transitions), r.seconds,
                r.tps);
  if (!a.out.empty()) {
    std::ofstream out(a.out);
    out << "# " << provenance("bench", cfg) << "\n" << line;
  }
  std::cerr << line;
}

// ---------------------------------------------------------------------------
// stats
// ---------------------------------------------------------------------------

void run_stats(const std::string& graph_path, double bucket_m) {
  NavGraph g = load_graph(graph_path);
  auto stats = g.all_pairs_stats(bucket_m);
  std::size_t elevator_edges = 0;
  for (NodeId u = 0; u < g.size(); ++u)
    for (const Edge& e : g.edges_from(u))
      if (e.kind == EdgeKind::Elevator) ++elevator_edges;
  std::printf("nodes %zu\n", g.size());
  std::printf("directed edges %zu\n", g.edge_count());
  std::printf("elevator edges %zu\n", elevator_edges);
  std::printf("floors %d\n", g.floor_count());
  std::printf("spacing %.3g m\n", g.node_spacing_m());
  std::printf("pairs %llu\n", static_cast<unsigned long long>(stats.pair_count));
  std::printf("mean path %.1f m\n", stats.mean_m);
  std::printf("std path %.1f m\n", stats.std_m);
  std::printf("max path %.1f m\n", stats.max_m);
}

// ---------------------------------------------------------------------------
// plotdata
// ---------------------------------------------------------------------------

struct PlotArgs {
  std::string kind, in, out;
  double bucket = 0.0;  // 0 = per-kind default
};

void run_plotdata(const PlotArgs& a) {
  RunConfig cfg;
  auto prov = provenance(("plotdata." + a.kind).c_str(), cfg);
  if (a.kind == "learning_curve") {
    write_learning_curve(read_metrics_file(a.in), a.out, prov);
  } else if (a.kind == "ratio_histogram") {
    write_ratio_histogram(read_episode_records(a.in), a.out,
                          a.bucket > 0 ? a.bucket : 0.1, prov);
  } else if (a.kind == "path_scatter") {
    write_path_scatter(read_episode_records(a.in), a.out,
                       a.bucket > 0 ? a.bucket : 10.0, prov);
  } else if (a.kind == "visitation_heatmap") {
    write_visitation_heatmap(load_graph(a.in), a.out, prov);
  } else if (a.kind == "length_histogram") {
    write_length_histogram(
        load_graph(a.in).all_pairs_stats(a.bucket > 0 ? a.bucket : 10.0), a.out,
        prov);
  } else if (a.kind == "entropy_curves") {
    // Re-emit a probe output with fresh provenance.
    std::ifstream in(a.in);
    if (!in) throw EvalError("cannot open '" + a.in + "'");
    std::ofstream out(a.out);
    out << "# " << prov << "\n";
    std::string line;
    while (std::getline(in, line))
      if (!line.empty() && line[0] != '#') out << line << "\n";
  } else {
    throw UsageError("unknown plot kind '" + a.kind + "'");
  }
  std::cerr << "wrote " << a.out << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"graph-navigation replay training toolkit"};
  app.require_subcommand(1);

  GenGraphArgs gen;
  auto* gen_cmd = app.add_subcommand("gen-graph", "generate a navigation graph");
  gen_cmd->add_option("--grid", gen.grid, "grid dimensions WxH");
  gen_cmd->add_flag("--campus", gen.campus, "synthetic corridor campus");
  gen_cmd->add_option("--corridors", gen.corridors);
  gen_cmd->add_option("--buildings", gen.buildings);
  gen_cmd->add_option("--floors", gen.floors,
                      "floors per building (>=2 adds elevators)");
  gen_cmd->add_option("--corridor-nodes", gen.corridor_nodes);
  gen_cmd->add_option("--spacing", gen.spacing, "node spacing in meters");
  gen_cmd->add_option("--seed", gen.seed);
  gen_cmd->add_option("--out", gen.out)->required();

  PrecomputeArgs pre;
  auto* pre_cmd =
      app.add_subcommand("precompute", "precompute synthetic embeddings");
  pre_cmd->add_option("--graph", pre.graph)->required();
  pre_cmd->add_option("--out", pre.out)->required();
  pre_cmd->add_option("--config", pre.config);
  pre_cmd->add_option("--set", pre.sets, "override config key=value");
  std::int64_t pre_seed = 0;
  auto* pre_seed_opt = pre_cmd->add_option("--seed", pre_seed);
  pre_cmd->add_option("--threads", pre.threads);

  TrainArgs tr;
  auto* tr_cmd = app.add_subcommand("train", "train the navigation agent");
  tr_cmd->add_option("--config", tr.config);
  tr_cmd->add_option("--set", tr.sets, "override config key=value");
  tr_cmd->add_option("--seed", tr.seed)->required();
  tr_cmd->add_option("--graph", tr.graph);
  tr_cmd->add_option("--store", tr.store);
  tr_cmd->add_option("--metrics-out", tr.metrics_out);
  tr_cmd->add_option("--checkpoint-out", tr.checkpoint_out);
  tr_cmd->add_flag("--quiet", tr.quiet);

  EvaluateArgs ev;
  auto* ev_cmd = app.add_subcommand("evaluate", "run evaluation episodes");
  ev_cmd->add_option("--checkpoint", ev.checkpoint)->required();
  ev_cmd->add_option("--config", ev.config);
  ev_cmd->add_option("--set", ev.sets);
  ev_cmd->add_option("--seed", ev.seed)->required();
  ev_cmd->add_option("--graph", ev.graph);
  ev_cmd->add_option("--store", ev.store);
  ev_cmd->add_option("--tasks", ev.tasks, "random held-out task count");
  ev_cmd->add_option("--fixed-goal", ev.fixed_goal_starts,
                     "fixed-goal scenario with N starts");
  ev_cmd->add_option("--episodes-per-task", ev.episodes_per_task);
  ev_cmd->add_flag("--greedy", ev.greedy, "argmax policy instead of sampling");
  ev_cmd->add_option("--min-optimal", ev.min_optimal_m);
  ev_cmd->add_option("--threads", ev.threads);
  ev_cmd->add_option("--out", ev.out);
  ev_cmd->add_option("--summary-out", ev.summary_out);
  ev_cmd->add_option("--trajectories-out", ev.trajectories_out);

  ProbeArgs pr;
  auto* pr_cmd = app.add_subcommand("probe", "per-timestep entropy curves");
  pr_cmd->add_option("--checkpoint", pr.checkpoint)->required();
  pr_cmd->add_option("--config", pr.config);
  pr_cmd->add_option("--set", pr.sets);
  std::int64_t pr_seed = 0;
  auto* pr_seed_opt = pr_cmd->add_option("--seed", pr_seed);
  pr_cmd->add_option("--graph", pr.graph);
  pr_cmd->add_option("--store", pr.store);
  pr_cmd->add_option("--episodes", pr.episodes);
  pr_cmd->add_option("--min-optimal", pr.min_optimal_m);
  pr_cmd->add_option("--threads", pr.threads);
  pr_cmd->add_option("--out", pr.out);

  BenchArgs be;
  auto* be_cmd = app.add_subcommand("bench", "stepping throughput benchmark");
  be_cmd->add_option("--config", be.config);
  be_cmd->add_option("--set", be.sets);
  be_cmd->add_option("--seed", be.seed)->required();
  be_cmd->add_option("--graph", be.graph);
  be_cmd->add_option("--store", be.store);
  be_cmd->add_option("--checkpoint", be.checkpoint, "for env+forward mode");
  be_cmd->add_option("--workers", be.workers);
  be_cmd->add_option("--duration", be.duration, "measured seconds");
  be_cmd->add_option("--warmup", be.warmup, "warmup seconds");
  be_cmd->add_option("--mode", be.mode, "env or env+forward");
  be_cmd->add_option("--out", be.out, "report file");

  std::string stats_graph;
  double stats_bucket = 10.0;
  auto* st_cmd = app.add_subcommand("stats", "all-pairs path statistics");
  st_cmd->add_option("graph", stats_graph, "graph file")->required();
  st_cmd->add_option("--bucket", stats_bucket, "histogram bucket (m)");

  PlotArgs pl;
  auto* pl_cmd = app.add_subcommand("plotdata", "emit figure-ready files");
  pl_cmd->add_option("--kind", pl.kind)->required();
  pl_cmd->add_option("--in", pl.in)->required();
  pl_cmd->add_option("--out", pl.out)->required();
  pl_cmd->add_option("--bucket", pl.bucket);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 1;
  }

  try {
    if (*gen_cmd) run_gen_graph(gen);
    if (*pre_cmd) {
      if (*pre_seed_opt) pre.seed = pre_seed;
      run_precompute(pre);
    }
    if (*tr_cmd) run_train(tr);
    if (*ev_cmd) run_evaluate(ev);
    if (*pr_cmd) {
      if (*pr_seed_opt) pr.seed = pr_seed;
      run_probe(pr);
    }
    if (*be_cmd) run_bench_cmd(be);
    if (*st_cmd) run_stats(stats_graph, stats_bucket);
    if (*pl_cmd) run_plotdata(pl);
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 1;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
  return 0;
}
