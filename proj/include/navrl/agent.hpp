#pragma once

// Goal-conditioned recurrent policy/value network with exact reverse-mode
// gradients, written out by hand so the gradient path is fully auditable
// against finite differences.
//
// Architecture: concat[phi(o), phi(g)] -> fully connected (width 256) ->
// ReLU -> concat with one-hot previous action -> LSTM (width 256) -> softmax
// policy head, linear value head, and a stop-gradient softmax localisation
// probe over graph nodes.

#include <array>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "navrl/linalg.hpp"
#include "navrl/rng.hpp"

namespace navrl {

struct AgentError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct AgentConfig {
  std::uint32_t embed_dim = 4096;  // D
  std::uint32_t num_actions = 10;  // N_a
  std::uint32_t num_nodes = 0;     // probe classes
  std::uint32_t width = 256;       // FC and LSTM width

  bool operator==(const AgentConfig&) const = default;
};

// LSTM gate blocks are stored in rows [i | f | g | o], each `width` tall.
template <typename S>
struct AgentParams {
  AgentConfig cfg;
  Matrix<S> w_fc;            // width x 2D
  std::vector<S> b_fc;       // width
  Matrix<S> w_x;             // 4*width x (width + N_a)
  Matrix<S> w_h;             // 4*width x width
  std::vector<S> b_gates;    // 4*width
  Matrix<S> w_pi;            // N_a x width
  std::vector<S> b_pi;       // N_a
  Matrix<S> w_v;             // 1 x width
  std::vector<S> b_v;        // 1
  Matrix<S> w_loc;           // N_nodes x width
  std::vector<S> b_loc;      // N_nodes

  AgentParams() = default;
  explicit AgentParams(const AgentConfig& c) : cfg(c) {
    const std::size_t d = c.embed_dim, na = c.num_actions, h = c.width,
                      nn = c.num_nodes;
    w_fc = Matrix<S>(h, 2 * d);
    b_fc.assign(h, S(0));
    w_x = Matrix<S>(4 * h, h + na);
    w_h = Matrix<S>(4 * h, h);
    b_gates.assign(4 * h, S(0));
    w_pi = Matrix<S>(na, h);
    b_pi.assign(na, S(0));
    w_v = Matrix<S>(1, h);
    b_v.assign(1, S(0));
    w_loc = Matrix<S>(nn, h);
    b_loc.assign(nn, S(0));
  }

  /// All parameter tensors in the fixed serialization order.
  std::array<std::vector<S>*, 11> tensors() {
    return {&w_fc.a, &b_fc, &w_x.a, &w_h.a, &b_gates, &w_pi.a,
            &b_pi,   &w_v.a, &b_v,  &w_loc.a, &b_loc};
  }
  std::array<const std::vector<S>*, 11> tensors() const {
    return {&w_fc.a, &b_fc, &w_x.a, &w_h.a, &b_gates, &w_pi.a,
            &b_pi,   &w_v.a, &b_v,  &w_loc.a, &b_loc};
  }

  std::size_t parameter_count() const {
    std::size_t n = 0;
    for (const auto* t : tensors()) n += t->size();
    return n;
  }

  void fill(S value) {
    for (auto* t : tensors()) std::fill(t->begin(), t->end(), value);
  }
};

template <typename S>
using AgentGrads = AgentParams<S>;

template <typename S>
struct RecurrentState {
  std::vector<S> hidden;
  std::vector<S> cell;

  RecurrentState() = default;
  explicit RecurrentState(std::uint32_t width)
      : hidden(width, S(0)), cell(width, S(0)) {}
  void zero() {
    std::fill(hidden.begin(), hidden.end(), S(0));
    std::fill(cell.begin(), cell.end(), S(0));
  }
  bool operator==(const RecurrentState&) const = default;
};

/// One forward step's outputs plus every activation the backward pass needs.
template <typename S>
struct StepCache {
  std::vector<S> input;     // [obs; goal], 2D
  std::vector<S> x_lstm;    // [relu(fc); prev action one-hot], width + N_a
  std::vector<S> h_prev, c_prev;
  std::vector<S> gate_i, gate_f, gate_g, gate_o;
  std::vector<S> c_new, tanh_c;
  std::vector<S> hidden;    // h_t
  std::vector<S> policy;    // softmax probabilities, N_a
  std::vector<S> loc_probs; // softmax probabilities, N_nodes
  S value = S(0);

  RecurrentState<S> new_state() const {
    RecurrentState<S> s;
    s.hidden = hidden;
    s.cell = c_new;
    return s;
  }
};

namespace detail {

template <typename S>
void softmax_inplace(std::span<S> z) {
  S max = z[0];
  for (S v : z) max = std::max(max, v);
  S sum = S(0);
  for (S& v : z) {
    v = std::exp(v - max);
    sum += v;
  }
  for (S& v : z) v /= sum;
}

template <typename S>
S sigmoid(S x) {
  return S(1) / (S(1) + std::exp(-x));
}

}  // namespace detail

template <typename S>
S policy_entropy(std::span<const S> probs) {
  S h = S(0);
  for (S p : probs)
    if (p > S(0)) h -= p * std::log(p);
  return h;
}

/// Forward pass. Pure function of (params, inputs, state); all activations
/// land in `cache`.
template <typename S>
void agent_forward(const AgentParams<S>& p, std::span<const S> obs,
                   std::span<const S> goal,
                   std::span<const S> prev_action_onehot,
                   const RecurrentState<S>& state, StepCache<S>& cache) {
  const std::size_t d = p.cfg.embed_dim, na = p.cfg.num_actions,
                    h = p.cfg.width, nn = p.cfg.num_nodes;
  if (obs.size() != d || goal.size() != d)
    throw AgentError("observation/goal dimension mismatch");
  if (prev_action_onehot.size() != na)
    throw AgentError("previous-action one-hot length mismatch");
  if (state.hidden.size() != h || state.cell.size() != h)
    throw AgentError("recurrent state width mismatch");

  cache.input.resize(2 * d);
  std::copy(obs.begin(), obs.end(), cache.input.begin());
  std::copy(goal.begin(), goal.end(), cache.input.begin() + d);

  cache.x_lstm.assign(h + na, S(0));
  matvec(p.w_fc, std::span<const S>(cache.input), std::span<S>(cache.x_lstm.data(), h));
  for (std::size_t k = 0; k < h; ++k) {
    S z = cache.x_lstm[k] + p.b_fc[k];
    cache.x_lstm[k] = z > S(0) ? z : S(0);  // ReLU
  }
  std::copy(prev_action_onehot.begin(), prev_action_onehot.end(),
            cache.x_lstm.begin() + h);

  cache.h_prev = state.hidden;
  cache.c_prev = state.cell;

  std::vector<S> z(4 * h);
  matvec(p.w_x, std::span<const S>(cache.x_lstm), std::span<S>(z));
  matvec_add(p.w_h, std::span<const S>(cache.h_prev), std::span<S>(z));
  for (std::size_t k = 0; k < 4 * h; ++k) z[k] += p.b_gates[k];

  cache.gate_i.resize(h);
  cache.gate_f.resize(h);
  cache.gate_g.resize(h);
  cache.gate_o.resize(h);
  cache.c_new.resize(h);
  cache.tanh_c.resize(h);
  cache.hidden.resize(h);
  for (std::size_t k = 0; k < h; ++k) {
    cache.gate_i[k] = detail::sigmoid(z[k]);
    cache.gate_f[k] = detail::sigmoid(z[h + k]);
    cache.gate_g[k] = std::tanh(z[2 * h + k]);
    cache.gate_o[k] = detail::sigmoid(z[3 * h + k]);
    cache.c_new[k] =
        cache.gate_f[k] * cache.c_prev[k] + cache.gate_i[k] * cache.gate_g[k];
    cache.tanh_c[k] = std::tanh(cache.c_new[k]);
    cache.hidden[k] = cache.gate_o[k] * cache.tanh_c[k];
  }

  cache.policy.resize(na);
  matvec(p.w_pi, std::span<const S>(cache.hidden), std::span<S>(cache.policy));
  for (std::size_t k = 0; k < na; ++k) cache.policy[k] += p.b_pi[k];
  detail::softmax_inplace(std::span<S>(cache.policy));

  std::vector<S> v(1);
  matvec(p.w_v, std::span<const S>(cache.hidden), std::span<S>(v));
  cache.value = v[0] + p.b_v[0];

  cache.loc_probs.resize(nn);
  matvec(p.w_loc, std::span<const S>(cache.hidden), std::span<S>(cache.loc_probs));
  for (std::size_t k = 0; k < nn; ++k) cache.loc_probs[k] += p.b_loc[k];
  detail::softmax_inplace(std::span<S>(cache.loc_probs));
}

/// Loss gradients at the three heads for one timestep, taken at the head
/// pre-activations (logits for the softmax heads).
template <typename S>
struct HeadGrads {
  std::vector<S> d_policy_logits;  // N_a
  S d_value = S(0);
  std::vector<S> d_loc_logits;     // N_nodes (stop-gradient at the hidden state)
};

/// Exact reverse-mode pass over a rollout of cached forwards. Probe-head
/// gradients reach only w_loc/b_loc; nothing flows back into the recurrent
/// network from the probe.
///
/// The recurrent sweep records the per-step pre-activation gradients; each
/// parameter matrix is then accumulated in one batched pass over the rollout,
/// so the large gradient buffers are streamed once per rollout rather than
/// once per step.
template <typename S>
void agent_backward(const AgentParams<S>& p,
                    std::span<const StepCache<S>> steps,
                    std::span<const HeadGrads<S>> head_grads,
                    AgentGrads<S>& out) {
  if (steps.empty()) throw AgentError("backward over an empty rollout");
  if (steps.size() != head_grads.size())
    throw AgentError("rollout/head-gradient length mismatch");
  const std::size_t d = p.cfg.embed_dim, na = p.cfg.num_actions,
                    h = p.cfg.width;
  const std::size_t T = steps.size();
  if (out.cfg != p.cfg)
    out = AgentGrads<S>(p.cfg);
  else
    out.fill(S(0));

  std::vector<S> dh(h, S(0));  // dL/dh_t flowing backward
  std::vector<S> dc(h, S(0));  // dL/dc_t flowing backward
  std::vector<S> dx(h + na);
  Matrix<S> all_dz(T, 4 * h);
  Matrix<S> all_dfc(T, h);

  for (std::size_t t = T; t-- > 0;) {
    const StepCache<S>& s = steps[t];
    const HeadGrads<S>& g = head_grads[t];
    if (s.hidden.size() != h || s.input.size() != 2 * d)
      throw AgentError("forward cache missing or inconsistent at step " +
                       std::to_string(t));

    // Heads feed dh; their parameter gradients are batched below. The probe
    // head contributes nothing here (stop-gradient).
    if (!g.d_policy_logits.empty())
      matvec_transposed_add(p.w_pi, std::span<const S>(g.d_policy_logits),
                            std::span<S>(dh));
    if (g.d_value != S(0))
      for (std::size_t k = 0; k < h; ++k) dh[k] += p.w_v.a[k] * g.d_value;

    // LSTM cell.
    S* dz = all_dz.row(t);
    for (std::size_t k = 0; k < h; ++k) {
      S do_ = dh[k] * s.tanh_c[k];
      S dct = dc[k] + dh[k] * s.gate_o[k] * (S(1) - s.tanh_c[k] * s.tanh_c[k]);
      S di = dct * s.gate_g[k];
      S df = dct * s.c_prev[k];
      S dg = dct * s.gate_i[k];
      dc[k] = dct * s.gate_f[k];  // flows to step t-1
      dz[k] = di * s.gate_i[k] * (S(1) - s.gate_i[k]);
      dz[h + k] = df * s.gate_f[k] * (S(1) - s.gate_f[k]);
      dz[2 * h + k] = dg * (S(1) - s.gate_g[k] * s.gate_g[k]);
      dz[3 * h + k] = do_ * s.gate_o[k] * (S(1) - s.gate_o[k]);
    }

    std::fill(dx.begin(), dx.end(), S(0));
    matvec_transposed_add(p.w_x, std::span<const S>(dz, 4 * h),
                          std::span<S>(dx));
    std::fill(dh.begin(), dh.end(), S(0));
    matvec_transposed_add(p.w_h, std::span<const S>(dz, 4 * h),
                          std::span<S>(dh));

    // Through the ReLU; the one-hot slice of dx is an input gradient,
    // discarded.
    S* dfc = all_dfc.row(t);
    for (std::size_t k = 0; k < h; ++k)
      dfc[k] = s.x_lstm[k] > S(0) ? dx[k] : S(0);
  }

  // Batched parameter accumulation, one pass per matrix.
  for (std::size_t r = 0; r < 4 * h; ++r) {
    S* wx_row = out.w_x.row(r);
    S* wh_row = out.w_h.row(r);
    S db = S(0);
    for (std::size_t t = 0; t < T; ++t) {
      const S dzr = all_dz.at(t, r);
      if (dzr == S(0)) continue;
      db += dzr;
      const S* x = steps[t].x_lstm.data();
      for (std::size_t c = 0; c < h + na; ++c) wx_row[c] += dzr * x[c];
      const S* hp = steps[t].h_prev.data();
      for (std::size_t c = 0; c < h; ++c) wh_row[c] += dzr * hp[c];
    }
    out.b_gates[r] += db;
  }
  for (std::size_t r = 0; r < h; ++r) {
    S* fc_row = out.w_fc.row(r);
    S db = S(0);
    for (std::size_t t = 0; t < T; ++t) {
      const S dfcr = all_dfc.at(t, r);
      if (dfcr == S(0)) continue;
      db += dfcr;
      const S* in = steps[t].input.data();
      for (std::size_t c = 0; c < 2 * d; ++c) fc_row[c] += dfcr * in[c];
    }
    out.b_fc[r] += db;
  }
  for (std::size_t r = 0; r < na; ++r) {
    S* row = out.w_pi.row(r);
    S db = S(0);
    for (std::size_t t = 0; t < T; ++t) {
      if (head_grads[t].d_policy_logits.empty()) continue;
      const S v = head_grads[t].d_policy_logits[r];
      if (v == S(0)) continue;
      db += v;
      const S* hid = steps[t].hidden.data();
      for (std::size_t c = 0; c < h; ++c) row[c] += v * hid[c];
    }
    out.b_pi[r] += db;
  }
  for (std::size_t t = 0; t < T; ++t) {
    const S v = head_grads[t].d_value;
    if (v == S(0)) continue;
    const S* hid = steps[t].hidden.data();
    for (std::size_t k = 0; k < h; ++k) out.w_v.a[k] += v * hid[k];
    out.b_v[0] += v;
  }
  for (std::size_t r = 0; r < p.cfg.num_nodes; ++r) {
    S* row = out.w_loc.row(r);
    S db = S(0);
    for (std::size_t t = 0; t < T; ++t) {
      if (head_grads[t].d_loc_logits.empty()) continue;
      const S v = head_grads[t].d_loc_logits[r];
      if (v == S(0)) continue;
      db += v;
      const S* hid = steps[t].hidden.data();
      for (std::size_t c = 0; c < h; ++c) row[c] += v * hid[c];
    }
    out.b_loc[r] += db;
  }
}

/// Xavier-uniform weights, zero biases, forget-gate bias +1.
template <typename S>
AgentParams<S> init_params(const AgentConfig& cfg, std::uint64_t seed) {
  AgentParams<S> p(cfg);
  Rng rng = make_rng(seed, 0xa9);
  auto init_matrix = [&](Matrix<S>& m) {
    double a = std::sqrt(6.0 / static_cast<double>(m.rows + m.cols));
    for (S& w : m.a) w = static_cast<S>(uniform_real(rng, -a, a));
  };
  init_matrix(p.w_fc);
  init_matrix(p.w_x);
  init_matrix(p.w_h);
  init_matrix(p.w_pi);
  init_matrix(p.w_v);
  init_matrix(p.w_loc);
  for (std::size_t k = 0; k < cfg.width; ++k)
    p.b_gates[cfg.width + k] = S(1);  // forget gate
  return p;
}

// ---------------------------------------------------------------------------
// Adam
// ---------------------------------------------------------------------------

template <typename S>
struct AdamState {
  std::uint64_t t = 0;
  AgentParams<S> m;
  AgentParams<S> v;

  AdamState() = default;
  explicit AdamState(const AgentConfig& cfg) : m(cfg), v(cfg) {}
};

struct AdamConfig {
  double lr = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

template <typename S>
void adam_update(AgentParams<S>& params, const AgentGrads<S>& grads,
                 AdamState<S>& opt, const AdamConfig& cfg) {
  if (params.cfg != grads.cfg) throw AgentError("gradient shape mismatch");
  if (opt.m.cfg != params.cfg) opt = AdamState<S>(params.cfg);
  ++opt.t;
  const S b1 = static_cast<S>(cfg.beta1);
  const S b2 = static_cast<S>(cfg.beta2);
  const S bc1 = static_cast<S>(1.0 - std::pow(cfg.beta1, static_cast<double>(opt.t)));
  const S bc2 = static_cast<S>(1.0 - std::pow(cfg.beta2, static_cast<double>(opt.t)));
  const S lr = static_cast<S>(cfg.lr);
  const S eps = static_cast<S>(cfg.eps);

  auto pt = params.tensors();
  auto gt = grads.tensors();
  auto mt = opt.m.tensors();
  auto vt = opt.v.tensors();
  for (std::size_t i = 0; i < pt.size(); ++i) {
    auto& pv = *pt[i];
    const auto& gv = *gt[i];
    auto& mv = *mt[i];
    auto& vv = *vt[i];
    if (gv.size() != pv.size()) throw AgentError("gradient shape mismatch");
    for (std::size_t k = 0; k < pv.size(); ++k) {
      mv[k] = b1 * mv[k] + (S(1) - b1) * gv[k];
      vv[k] = b2 * vv[k] + (S(1) - b2) * gv[k] * gv[k];
      S mhat = mv[k] / bc1;
      S vhat = vv[k] / bc2;
      pv[k] -= lr * mhat / (std::sqrt(vhat) + eps);
    }
  }
}

// ---------------------------------------------------------------------------
// Checkpoint file: magic 'AGNT', u32 version=1, config echo (u32 dim,
// num_actions, num_nodes, width), u8 has_adam, u64 adam_t, then every tensor
// as little-endian f64 in the fixed tensors() order (params, then Adam m and
// v when present).
// ---------------------------------------------------------------------------

namespace detail {

template <typename S>
void write_tensor_f64(std::ofstream& out, const std::vector<S>& t) {
  for (S v : t) {
    double d = static_cast<double>(v);
    out.write(reinterpret_cast<const char*>(&d), sizeof(double));
  }
}

template <typename S>
void read_tensor_f64(std::ifstream& in, std::vector<S>& t) {
  for (S& v : t) {
    double d;
    in.read(reinterpret_cast<char*>(&d), sizeof(double));
    v = static_cast<S>(d);
  }
  if (!in) throw AgentError("truncated checkpoint");
}

}  // namespace detail

template <typename S>
void save_checkpoint(const AgentParams<S>& params, const AdamState<S>* adam,
                     const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw AgentError("cannot open '" + path + "' for writing");
  out.write("AGNT", 4);
  auto put_u32 = [&](std::uint32_t v) {
    out.write(reinterpret_cast<const char*>(&v), sizeof v);
  };
  put_u32(1);
  put_u32(params.cfg.embed_dim);
  put_u32(params.cfg.num_actions);
  put_u32(params.cfg.num_nodes);
  put_u32(params.cfg.width);
  std::uint8_t has_adam = adam != nullptr;
  out.write(reinterpret_cast<const char*>(&has_adam), 1);
  std::uint64_t t = adam ? adam->t : 0;
  out.write(reinterpret_cast<const char*>(&t), sizeof t);
  for (const auto* tensor : params.tensors())
    detail::write_tensor_f64(out, *tensor);
  if (adam) {
    for (const auto* tensor : adam->m.tensors())
      detail::write_tensor_f64(out, *tensor);
    for (const auto* tensor : adam->v.tensors())
      detail::write_tensor_f64(out, *tensor);
  }
  if (!out) throw AgentError("write failure on '" + path + "'");
}

template <typename S>
AgentParams<S> load_checkpoint(const std::string& path,
                               AdamState<S>* adam = nullptr) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw AgentError("cannot open '" + path + "'");
  char magic[4] = {};
  in.read(magic, 4);
  if (!in || std::memcmp(magic, "AGNT", 4) != 0)
    throw AgentError("'" + path + "' is not an agent checkpoint (bad magic)");
  auto get_u32 = [&]() {
    std::uint32_t v;
    in.read(reinterpret_cast<char*>(&v), sizeof v);
    if (!in) throw AgentError("truncated checkpoint");
    return v;
  };
  if (get_u32() != 1) throw AgentError("unsupported checkpoint version");
  AgentConfig cfg;
  cfg.embed_dim = get_u32();
  cfg.num_actions = get_u32();
  cfg.num_nodes = get_u32();
  cfg.width = get_u32();
  std::uint8_t has_adam = 0;
  in.read(reinterpret_cast<char*>(&has_adam), 1);
  std::uint64_t t = 0;
  in.read(reinterpret_cast<char*>(&t), sizeof t);
  if (!in) throw AgentError("truncated checkpoint");
  AgentParams<S> params(cfg);
  for (auto* tensor : params.tensors()) detail::read_tensor_f64(in, *tensor);
  if (adam) {
    *adam = AdamState<S>(cfg);
    if (has_adam) {
      adam->t = t;
      for (auto* tensor : adam->m.tensors()) detail::read_tensor_f64(in, *tensor);
      for (auto* tensor : adam->v.tensors()) detail::read_tensor_f64(in, *tensor);
    }
  }
  return params;
}

}  // namespace navrl
