#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "navrl/navgraph.hpp"
#include "navrl/rng.hpp"

namespace navrl {

struct EmbedError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

using FrameId = std::uint32_t;

// Frames more than this far from every node belong to no observation pool.
inline constexpr double kPoolRadiusM = 0.5;

struct Pose {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;
  double yaw_deg = 0.0;
};

/// Desk-scale stand-in for a frozen pretrained visual encoder: a fixed
/// seeded random projection of [x, y, z, cos yaw, sin yaw, brightness]
/// through two layers of sinusoidal nonlinearities. Smooth in pose and
/// brightness, deterministic, and distinct poses decorrelate within a
/// couple of meters.
class SynthEncoder {
 public:
  SynthEncoder(std::uint32_t dim, std::uint64_t seed) : dim_(dim) {
    if (dim < 1) throw EmbedError("embedding dimension must be >= 1");
    Rng rng = make_rng(seed, 0x5e);
    w1_.resize(kHidden * kInputs);
    b1_.resize(kHidden);
    w2_.resize(static_cast<std::size_t>(dim) * kHidden);
    b2_.resize(dim);
    // First-layer frequencies span [0.1, 2.0] rad per meter, random sign.
    for (auto& w : w1_) {
      double mag = uniform_real(rng, 0.1, 2.0);
      w = uniform01(rng) < 0.5 ? -mag : mag;
    }
    for (auto& b : b1_) b = uniform_real(rng, 0.0, 2.0 * std::numbers::pi);
    const double scale2 = 1.5 / std::sqrt(static_cast<double>(kHidden));
    for (auto& w : w2_) w = uniform_real(rng, -scale2, scale2);
    for (auto& b : b2_) b = uniform_real(rng, 0.0, 2.0 * std::numbers::pi);
  }

  std::uint32_t dim() const { return dim_; }

  void encode(const Pose& pose, double brightness,
              std::vector<double>& out) const {
    const double yaw = pose.yaw_deg * std::numbers::pi / 180.0;
    const std::array<double, kInputs> u = {pose.x,          pose.y,
                                           pose.z,          std::cos(yaw),
                                           std::sin(yaw),   brightness};
    std::array<double, kHidden> h;
    for (std::size_t k = 0; k < kHidden; ++k) {
      double acc = b1_[k];
      for (std::size_t j = 0; j < kInputs; ++j) acc += w1_[k * kInputs + j] * u[j];
      h[k] = std::sin(acc);
    }
    out.resize(dim_);
    for (std::size_t i = 0; i < dim_; ++i) {
      double acc = b2_[i];
      const double* row = &w2_[i * kHidden];
      for (std::size_t k = 0; k < kHidden; ++k) acc += row[k] * h[k];
      out[i] = std::sin(acc);
    }
  }

  std::vector<double> encode(const Pose& pose, double brightness) const {
    std::vector<double> out;
    encode(pose, brightness, out);
    return out;
  }

 private:
  static constexpr std::size_t kInputs = 6;
  static constexpr std::size_t kHidden = 64;
  std::uint32_t dim_;
  std::vector<double> w1_, b1_, w2_, b2_;
};

inline std::vector<double> synth_encode(const Pose& pose, double brightness,
                                        std::uint32_t dim, std::uint64_t seed) {
  return SynthEncoder(dim, seed).encode(pose, brightness);
}

/// Central finite difference of an embedding with respect to a global
/// brightness shift: (phi(b+delta) - phi(b-delta)) / (2 delta) per feature.
template <typename EncodeFn>
std::vector<double> brightness_jacobian(const EncodeFn& encode_at_brightness,
                                        double brightness, double delta) {
  if (!(delta > 0.0)) throw EmbedError("jacobian step must be positive");
  std::vector<double> up = encode_at_brightness(brightness + delta);
  std::vector<double> down = encode_at_brightness(brightness - delta);
  if (up.size() != down.size())
    throw EmbedError("encoder returned inconsistent dimensions");
  std::vector<double> jac(up.size());
  for (std::size_t i = 0; i < up.size(); ++i)
    jac[i] = (up[i] - down[i]) / (2.0 * delta);
  return jac;
}

struct FrameMeta {
  FrameId frame = 0;
  NodeId anchor_node = 0;
  float offset_m = 0.0f;  // signed along-path offset from the anchor, along yaw
  float yaw_deg = 0.0f;   // [0, 360)
};

/// Precomputed per-frame embeddings phi and brightness Jacobians J, with R
/// rotation variants per frame. Immutable once finalized; concurrent reads
/// are safe.
class EmbeddingStore {
 public:
  EmbeddingStore() = default;
  EmbeddingStore(std::uint32_t dim, std::uint32_t rotations_per_frame)
      : dim_(dim), rotations_(rotations_per_frame) {
    if (dim < 1) throw EmbedError("embedding dimension must be >= 1");
    if (rotations_per_frame < 1) throw EmbedError("rotations per frame must be >= 1");
  }

  std::uint32_t dim() const { return dim_; }
  std::uint32_t rotations_per_frame() const { return rotations_; }
  std::uint32_t frame_count() const { return static_cast<std::uint32_t>(meta_.size()); }
  const std::vector<FrameMeta>& frame_meta() const { return meta_; }

  std::span<const float> phi(FrameId frame, std::uint32_t variant) const {
    return {&data_[record_offset(frame, variant)], dim_};
  }
  std::span<const float> jac(FrameId frame, std::uint32_t variant) const {
    return {&data_[record_offset(frame, variant) + dim_], dim_};
  }

  /// Frames within kPoolRadiusM path distance of the node. Empty for node
  /// ids beyond any anchor.
  const std::vector<FrameId>& node_pool(NodeId node) const {
    static const std::vector<FrameId> kEmpty;
    return node < pools_.size() ? pools_[node] : kEmpty;
  }

  std::size_t pool_node_count() const { return pools_.size(); }

  /// Reserves storage and metadata slots; records are filled via
  /// write_record. Used by the precompute pipeline.
  void allocate(std::vector<FrameMeta> meta) {
    meta_ = std::move(meta);
    data_.assign(static_cast<std::size_t>(meta_.size()) * rotations_ * 2 * dim_,
                 0.0f);
  }

  void write_record(FrameId frame, std::uint32_t variant,
                    std::span<const double> phi_values,
                    std::span<const double> jac_values) {
    if (phi_values.size() != dim_ || jac_values.size() != dim_)
      throw EmbedError("record dimension mismatch");
    float* dst = &data_[record_offset(frame, variant)];
    for (std::size_t i = 0; i < dim_; ++i) dst[i] = static_cast<float>(phi_values[i]);
    for (std::size_t i = 0; i < dim_; ++i)
      dst[dim_ + i] = static_cast<float>(jac_values[i]);
  }

  /// Builds node pools from frame metadata and checks the pool invariants:
  /// every frame lands in exactly its anchor's pool (|offset| <= 0.5 m), and
  /// all entries are finite.
  void finalize() {
    NodeId max_anchor = 0;
    for (const FrameMeta& m : meta_) max_anchor = std::max(max_anchor, m.anchor_node);
    pools_.assign(meta_.empty() ? 0 : max_anchor + 1, {});
    for (const FrameMeta& m : meta_) {
      if (std::fabs(m.offset_m) > kPoolRadiusM + 1e-6f)
        throw EmbedError("frame " + std::to_string(m.frame) +
                         " lies in no node pool (offset " +
                         std::to_string(m.offset_m) + " m)");
      pools_[m.anchor_node].push_back(m.frame);
    }
    for (float v : data_)
      if (!std::isfinite(v)) throw EmbedError("non-finite embedding value");
  }

  bool operator==(const EmbeddingStore& other) const {
    return dim_ == other.dim_ && rotations_ == other.rotations_ &&
           meta_.size() == other.meta_.size() &&
           std::memcmp(meta_.data(), other.meta_.data(),
                       meta_.size() * sizeof(FrameMeta)) == 0 &&
           data_ == other.data_;
  }

 private:
  std::size_t record_offset(FrameId frame, std::uint32_t variant) const {
    return (static_cast<std::size_t>(frame) * rotations_ + variant) * 2 * dim_;
  }

  friend EmbeddingStore load_store(const std::string&);
  friend void save_store(const EmbeddingStore&, const std::string&);

  std::uint32_t dim_ = 0;
  std::uint32_t rotations_ = 0;
  std::vector<FrameMeta> meta_;
  std::vector<float> data_;  // (frame-major, variant-minor): phi then jac
  std::vector<std::vector<FrameId>> pools_;
};

struct PrecomputeParams {
  std::uint32_t dim = 4096;
  std::uint32_t rotations_per_frame = 5;
  double max_rotation_deg = 8.0;
  double frames_per_edge = 30.0;  // synthetic frame density per Move edge
  double base_brightness = 0.5;
  double jacobian_delta = 1e-3;
  std::uint64_t seed = 0;
  unsigned threads = 1;
};

namespace detail {

inline Pose frame_pose(const NavGraph& graph, const FrameMeta& meta) {
  const Node& anchor = graph.node(meta.anchor_node);
  const double yaw = meta.yaw_deg * std::numbers::pi / 180.0;
  Pose p;
  p.x = anchor.position[0] + meta.offset_m * std::cos(yaw);
  p.y = anchor.position[1] + meta.offset_m * std::sin(yaw);
  p.z = anchor.position[2];
  p.yaw_deg = meta.yaw_deg;
  return p;
}

}  // namespace detail

/// Computes phi and J for every (frame, rotation variant). Variant 0 sits at
/// yaw offset 0; the rest draw offsets uniformly in [-max_rotation_deg,
/// +max_rotation_deg]. Per-frame seeding makes the output independent of the
/// worker count.
inline EmbeddingStore precompute(const NavGraph& graph,
                                 std::vector<FrameMeta> frames,
                                 const PrecomputeParams& params) {
  if (frames.empty()) throw EmbedError("no frames to precompute");
  for (std::size_t i = 0; i < frames.size(); ++i) {
    frames[i].frame = static_cast<FrameId>(i);
    if (frames[i].anchor_node >= graph.size())
      throw EmbedError("frame anchored at unknown node " +
                       std::to_string(frames[i].anchor_node));
    if (std::fabs(frames[i].offset_m) > graph.node_spacing_m())
      throw EmbedError("frame offset exceeds node spacing");
  }

  EmbeddingStore store(params.dim, params.rotations_per_frame);
  store.allocate(std::move(frames));
  const SynthEncoder encoder(params.dim, params.seed);

  auto encode_frame = [&](FrameId f) {
    Rng rng = make_rng(params.seed, 0xf00d + f);
    const Pose base = detail::frame_pose(graph, store.frame_meta()[f]);
    std::vector<double> phi, up, down, jac(params.dim);
    for (std::uint32_t r = 0; r < params.rotations_per_frame; ++r) {
      double yaw_off = r == 0 ? 0.0
                              : uniform_real(rng, -params.max_rotation_deg,
                                             params.max_rotation_deg);
      Pose p = base;
      p.yaw_deg = base.yaw_deg + yaw_off;
      encoder.encode(p, params.base_brightness, phi);
      encoder.encode(p, params.base_brightness + params.jacobian_delta, up);
      encoder.encode(p, params.base_brightness - params.jacobian_delta, down);
      for (std::size_t i = 0; i < params.dim; ++i)
        jac[i] = (up[i] - down[i]) / (2.0 * params.jacobian_delta);
      store.write_record(f, r, phi, jac);
    }
  };

  const unsigned workers = std::max(1u, params.threads);
  if (workers == 1) {
    for (FrameId f = 0; f < store.frame_count(); ++f) encode_frame(f);
  } else {
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < workers; ++w) {
      pool.emplace_back([&, w] {
        for (FrameId f = w; f < store.frame_count(); f += workers)
          encode_frame(f);
      });
    }
    for (auto& t : pool) t.join();
  }

  store.finalize();
  return store;
}

/// Synthetic traversal: ~frames_per_edge camera frames along every mutual
/// Move-edge pair, each anchored to its nearest node. Matches the recorded
/// data's one-pass frame density.
inline std::vector<FrameMeta> synthetic_traversal_frames(const NavGraph& graph,
                                                         double frames_per_edge) {
  if (frames_per_edge < 1.0)
    throw EmbedError("frames per edge must be at least 1");
  std::vector<FrameMeta> frames;
  const double spacing = graph.node_spacing_m();
  const int per_edge = static_cast<int>(std::llround(frames_per_edge));
  for (NodeId u = 0; u < graph.size(); ++u) {
    for (const Edge& e : graph.edges_from(u)) {
      if (e.kind != EdgeKind::Move || e.from > e.to) continue;  // one pass
      for (int i = 0; i < per_edge; ++i) {
        double t = (i + 0.5) / per_edge * spacing;
        FrameMeta m;
        m.yaw_deg = static_cast<float>(e.bearing_deg);
        if (t <= spacing / 2.0) {
          m.anchor_node = e.from;
          m.offset_m = static_cast<float>(t);
        } else {
          m.anchor_node = e.to;
          m.offset_m = static_cast<float>(t - spacing);
        }
        if (std::fabs(m.offset_m) > kPoolRadiusM) continue;  // spacing > 1 m
        frames.push_back(m);
      }
    }
  }
  return frames;
}

inline EmbeddingStore precompute_synthetic(const NavGraph& graph,
                                           const PrecomputeParams& params) {
  return precompute(graph, synthetic_traversal_frames(graph, params.frames_per_edge),
                    params);
}

// ---------------------------------------------------------------------------
// Binary store file.
//   magic 'EMBS', u32 version=1, u32 frame_count, u32 rotations_per_frame,
//   u32 dim, frame-meta table (u32 anchor, f32 offset_m, f32 yaw_deg per
//   frame), then records as little-endian f32 arrays in (frame-major,
//   variant-minor) order: phi then jac per record.
// ---------------------------------------------------------------------------

namespace detail {

template <typename T>
void write_pod(std::ofstream& out, const T& value) {
  out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <typename T>
void read_pod(std::ifstream& in, T& value, const std::string& what) {
  in.read(reinterpret_cast<char*>(&value), sizeof(T));
  if (!in) throw EmbedError("truncated store file (while reading " + what + ")");
}

}  // namespace detail

inline void save_store(const EmbeddingStore& store, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw EmbedError("cannot open '" + path + "' for writing");
  out.write("EMBS", 4);
  detail::write_pod(out, std::uint32_t{1});
  detail::write_pod(out, store.frame_count());
  detail::write_pod(out, store.rotations_per_frame());
  detail::write_pod(out, store.dim());
  for (const FrameMeta& m : store.frame_meta()) {
    detail::write_pod(out, m.anchor_node);
    detail::write_pod(out, m.offset_m);
    detail::write_pod(out, m.yaw_deg);
  }
  out.write(reinterpret_cast<const char*>(store.data_.data()),
            static_cast<std::streamsize>(store.data_.size() * sizeof(float)));
  if (!out) throw EmbedError("write failure on '" + path + "'");
}

inline EmbeddingStore load_store(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw EmbedError("cannot open '" + path + "'");
  char magic[4] = {};
  in.read(magic, 4);
  if (!in || std::memcmp(magic, "EMBS", 4) != 0)
    throw EmbedError("'" + path + "' is not an EMBS store (bad magic)");
  std::uint32_t version, frame_count, rotations, dim;
  detail::read_pod(in, version, "version");
  if (version != 1)
    throw EmbedError("unsupported store version " + std::to_string(version));
  detail::read_pod(in, frame_count, "frame count");
  detail::read_pod(in, rotations, "rotation count");
  detail::read_pod(in, dim, "dimension");
  EmbeddingStore store(dim, rotations);
  std::vector<FrameMeta> meta(frame_count);
  for (std::uint32_t f = 0; f < frame_count; ++f) {
    meta[f].frame = f;
    detail::read_pod(in, meta[f].anchor_node, "frame meta");
    detail::read_pod(in, meta[f].offset_m, "frame meta");
    detail::read_pod(in, meta[f].yaw_deg, "frame meta");
  }
  store.meta_ = std::move(meta);
  store.data_.resize(static_cast<std::size_t>(frame_count) * rotations * 2 * dim);
  in.read(reinterpret_cast<char*>(store.data_.data()),
          static_cast<std::streamsize>(store.data_.size() * sizeof(float)));
  if (!in) throw EmbedError("truncated store file (while reading records)");
  store.finalize();
  return store;
}

}  // namespace navrl
