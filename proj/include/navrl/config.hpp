#pragma once

#include <cstdint>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "navrl/augment.hpp"
#include "navrl/curriculum.hpp"
#include "navrl/embedstore.hpp"
#include "navrl/environment.hpp"
#include "navrl/trainer.hpp"

namespace navrl {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Every training/deployment hyperparameter plus the design-decision knobs.
/// Defaults are the published values; unknown keys are rejected outright.
struct RunConfig {
  // Published hyperparameters.
  std::string optimiser = "adam";
  double learning_rate = 1e-4;
  double gamma = 0.99;
  double entropy_weight = 5e-4;
  std::int64_t workers = 128;
  std::int64_t rollout_len = 50;
  std::int64_t preprocessing_stride = 3;  // recorded for dataset parity only
  double node_spacing_m = 1.0;
  double turn_increment_deg = 90.0;
  std::int64_t num_actions = 10;
  std::int64_t rotations_per_image = 5;
  double max_rotation_deg = 8.0;
  double sigma_global = 0.01;
  double theta_global = 0.15;
  double sigma_local = 0.01;
  double p_stutter = 0.05;
  std::int64_t curriculum_levels = 100;
  double curriculum_threshold = 0.8;

  // Design-decision knobs.
  double value_loss_weight = 0.5;
  double probe_weight = 1.0;
  std::int64_t success_window = 100;
  std::int64_t horizon_min = 100;
  std::int64_t horizon_factor = 4;
  bool ou_reset_per_episode = true;
  bool goal_observation_noised = false;
  std::string precision = "f64";  // f64 | f32
  double goal_radius_m = 0.0;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_eps = 1e-8;
  std::int64_t embed_dim = 4096;
  double frames_per_edge = 30.0;
  std::int64_t metrics_interval = 10000;
  std::int64_t total_env_steps = 1000000;
  bool locked_updates = true;
  bool stop_after_final_level = false;
  std::int64_t steps_after_final_level = 0;
  std::int64_t network_width = 256;
  double eval_band_bucket_m = 10.0;
  double histogram_bucket_m = 10.0;
  std::int64_t seed = 0;
  std::string graph_path;
  std::string store_path;
};

namespace detail {

enum class FieldKind { Int, Real, Bool, Str };

struct FieldRef {
  FieldKind kind;
  std::int64_t RunConfig::* i = nullptr;
  double RunConfig::* r = nullptr;
  bool RunConfig::* b = nullptr;
  std::string RunConfig::* s = nullptr;
};

inline const std::map<std::string, FieldRef>& config_fields() {
  static const std::map<std::string, FieldRef> fields = [] {
    std::map<std::string, FieldRef> m;
    auto I = [&](const char* k, std::int64_t RunConfig::* p) {
      m[k] = FieldRef{FieldKind::Int, p, nullptr, nullptr, nullptr};
    };
    auto R = [&](const char* k, double RunConfig::* p) {
      m[k] = FieldRef{FieldKind::Real, nullptr, p, nullptr, nullptr};
    };
    auto B = [&](const char* k, bool RunConfig::* p) {
      m[k] = FieldRef{FieldKind::Bool, nullptr, nullptr, p, nullptr};
    };
    auto S = [&](const char* k, std::string RunConfig::* p) {
      m[k] = FieldRef{FieldKind::Str, nullptr, nullptr, nullptr, p};
    };
    S("optimiser", &RunConfig::optimiser);
    R("learning_rate", &RunConfig::learning_rate);
    R("gamma", &RunConfig::gamma);
    R("entropy_weight", &RunConfig::entropy_weight);
    I("workers", &RunConfig::workers);
    I("rollout_len", &RunConfig::rollout_len);
    I("preprocessing_stride", &RunConfig::preprocessing_stride);
    R("node_spacing_m", &RunConfig::node_spacing_m);
    R("turn_increment_deg", &RunConfig::turn_increment_deg);
    I("num_actions", &RunConfig::num_actions);
    I("rotations_per_image", &RunConfig::rotations_per_image);
    R("max_rotation_deg", &RunConfig::max_rotation_deg);
    R("sigma_global", &RunConfig::sigma_global);
    R("theta_global", &RunConfig::theta_global);
    R("sigma_local", &RunConfig::sigma_local);
    R("p_stutter", &RunConfig::p_stutter);
    I("curriculum_levels", &RunConfig::curriculum_levels);
    R("curriculum_threshold", &RunConfig::curriculum_threshold);
    R("value_loss_weight", &RunConfig::value_loss_weight);
    R("probe_weight", &RunConfig::probe_weight);
    I("success_window", &RunConfig::success_window);
    I("horizon_min", &RunConfig::horizon_min);
    I("horizon_factor", &RunConfig::horizon_factor);
    B("ou_reset_per_episode", &RunConfig::ou_reset_per_episode);
    B("goal_observation_noised", &RunConfig::goal_observation_noised);
    S("precision", &RunConfig::precision);
    R("goal_radius_m", &RunConfig::goal_radius_m);
    R("adam_beta1", &RunConfig::adam_beta1);
    R("adam_beta2", &RunConfig::adam_beta2);
    R("adam_eps", &RunConfig::adam_eps);
    I("embed_dim", &RunConfig::embed_dim);
    R("frames_per_edge", &RunConfig::frames_per_edge);
    I("metrics_interval", &RunConfig::metrics_interval);
    I("total_env_steps", &RunConfig::total_env_steps);
    B("locked_updates", &RunConfig::locked_updates);
    B("stop_after_final_level", &RunConfig::stop_after_final_level);
    I("steps_after_final_level", &RunConfig::steps_after_final_level);
    I("network_width", &RunConfig::network_width);
    R("eval_band_bucket_m", &RunConfig::eval_band_bucket_m);
    R("histogram_bucket_m", &RunConfig::histogram_bucket_m);
    I("seed", &RunConfig::seed);
    S("graph_path", &RunConfig::graph_path);
    S("store_path", &RunConfig::store_path);
    return m;
  }();
  return fields;
}

inline std::string trim(const std::string& s) {
  auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

}  // namespace detail

/// Applies one `key = value` assignment. Unknown keys and malformed values
/// are errors, not warnings.
inline void config_set(RunConfig& cfg, const std::string& key,
                       const std::string& raw_value) {
  const auto& fields = detail::config_fields();
  auto it = fields.find(key);
  if (it == fields.end())
    throw ConfigError("unknown config key '" + key + "'");
  const std::string value = detail::trim(raw_value);
  const auto& f = it->second;
  try {
    switch (f.kind) {
      case detail::FieldKind::Int: {
        std::size_t used = 0;
        std::int64_t v = std::stoll(value, &used);
        if (used != value.size()) throw std::invalid_argument(value);
        cfg.*(f.i) = v;
        break;
      }
      case detail::FieldKind::Real: {
        std::size_t used = 0;
        double v = std::stod(value, &used);
        if (used != value.size()) throw std::invalid_argument(value);
        cfg.*(f.r) = v;
        break;
      }
      case detail::FieldKind::Bool: {
        if (value == "true")
          cfg.*(f.b) = true;
        else if (value == "false")
          cfg.*(f.b) = false;
        else
          throw std::invalid_argument(value);
        break;
      }
      case detail::FieldKind::Str:
        cfg.*(f.s) = value;
        break;
    }
  } catch (const std::exception&) {
    throw ConfigError("malformed value '" + value + "' for config key '" +
                      key + "'");
  }
}

inline void validate_config(const RunConfig& cfg) {
  if (cfg.optimiser != "adam")
    throw ConfigError("unsupported optimiser '" + cfg.optimiser + "'");
  if (cfg.precision != "f64" && cfg.precision != "f32")
    throw ConfigError("precision must be f64 or f32, got '" + cfg.precision +
                      "'");
  NoiseConfig n{cfg.sigma_global, cfg.theta_global, cfg.sigma_local};
  try {
    n.validate();
  } catch (const std::exception& e) {
    throw ConfigError(e.what());
  }
  if (cfg.p_stutter < 0.0 || cfg.p_stutter > 1.0)
    throw ConfigError("p_stutter must lie in [0, 1]");
  if (cfg.workers < 1) throw ConfigError("workers must be >= 1");
  if (cfg.curriculum_levels < 1) throw ConfigError("curriculum_levels must be >= 1");
}

inline RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  RunConfig cfg;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = detail::trim(line);
    if (line.empty()) continue;
    auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError(path + ":" + std::to_string(line_no) +
                        ": expected 'key = value'");
    std::string key = detail::trim(line.substr(0, eq));
    std::string value = line.substr(eq + 1);
    try {
      config_set(cfg, key, value);
    } catch (const ConfigError& e) {
      throw ConfigError(path + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  return cfg;
}

/// Canonical text form (sorted keys), used for files and provenance hashes.
inline std::string serialize_config(const RunConfig& cfg) {
  std::ostringstream out;
  out.precision(17);
  for (const auto& [key, f] : detail::config_fields()) {
    out << key << " = ";
    switch (f.kind) {
      case detail::FieldKind::Int: out << cfg.*(f.i); break;
      case detail::FieldKind::Real: out << cfg.*(f.r); break;
      case detail::FieldKind::Bool: out << (cfg.*(f.b) ? "true" : "false"); break;
      case detail::FieldKind::Str: out << cfg.*(f.s); break;
    }
    out << "\n";
  }
  return out.str();
}

inline std::uint64_t config_hash(const RunConfig& cfg) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (char c : serialize_config(cfg)) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ull;
  }
  return h;
}

// Projections onto the module-level configs.

inline EnvConfig make_env_config(const RunConfig& cfg) {
  EnvConfig e;
  e.p_stutter = cfg.p_stutter;
  e.noise = NoiseConfig{cfg.sigma_global, cfg.theta_global, cfg.sigma_local};
  e.horizon = static_cast<int>(cfg.horizon_min);
  e.goal_radius_m = cfg.goal_radius_m;
  e.goal_observation_noised = cfg.goal_observation_noised;
  e.ou_reset_per_episode = cfg.ou_reset_per_episode;
  return e;
}

inline CurriculumConfig make_curriculum_config(const RunConfig& cfg) {
  CurriculumConfig c;
  c.levels = static_cast<int>(cfg.curriculum_levels);
  c.threshold = cfg.curriculum_threshold;
  c.window = static_cast<int>(cfg.success_window);
  c.horizon_min = static_cast<int>(cfg.horizon_min);
  c.horizon_factor = static_cast<int>(cfg.horizon_factor);
  return c;
}

inline TrainerConfig make_trainer_config(const RunConfig& cfg) {
  TrainerConfig t;
  t.gamma = cfg.gamma;
  t.rollout_len = static_cast<int>(cfg.rollout_len);
  t.entropy_weight = cfg.entropy_weight;
  t.value_loss_weight = cfg.value_loss_weight;
  t.probe_weight = cfg.probe_weight;
  t.workers = static_cast<int>(cfg.workers);
  t.width = static_cast<std::uint32_t>(cfg.network_width);
  t.adam = AdamConfig{cfg.learning_rate, cfg.adam_beta1, cfg.adam_beta2,
                      cfg.adam_eps};
  t.total_env_steps = static_cast<std::uint64_t>(cfg.total_env_steps);
  t.seed = static_cast<std::uint64_t>(cfg.seed);
  t.metrics_interval = static_cast<std::uint64_t>(cfg.metrics_interval);
  t.locked_updates = cfg.locked_updates;
  t.expected_actions = static_cast<int>(cfg.num_actions);
  t.stop_after_final_level = cfg.stop_after_final_level;
  t.steps_after_final_level =
      static_cast<std::uint64_t>(cfg.steps_after_final_level);
  return t;
}

inline PrecomputeParams make_precompute_params(const RunConfig& cfg) {
  PrecomputeParams p;
  p.dim = static_cast<std::uint32_t>(cfg.embed_dim);
  p.rotations_per_frame = static_cast<std::uint32_t>(cfg.rotations_per_image);
  p.max_rotation_deg = cfg.max_rotation_deg;
  p.frames_per_edge = cfg.frames_per_edge;
  p.seed = static_cast<std::uint64_t>(cfg.seed);
  return p;
}

}  // namespace navrl
