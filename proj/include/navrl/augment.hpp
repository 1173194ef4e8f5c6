#pragma once

#include <cmath>
#include <span>
#include <stdexcept>
#include <vector>

#include "navrl/rng.hpp"

namespace navrl {

struct AugmentError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct NoiseConfig {
  double sigma_global = 0.01;
  double theta_global = 0.15;
  double sigma_local = 0.01;

  void validate() const {
    if (sigma_global < 0.0 || sigma_local < 0.0)
      throw AugmentError("noise sigmas must be non-negative");
    if (theta_global < 0.0 || theta_global > 1.0)
      throw AugmentError("theta_global must lie in [0, 1]");
  }
};

/// Temporally correlated brightness noise: one scalar per environment
/// instance, reset to zero at episode start.
struct OuState {
  double xi = 0.0;
  double sigma = 0.01;
  double theta = 0.15;
};

inline OuState make_ou(const NoiseConfig& cfg) {
  return OuState{0.0, cfg.sigma_global, cfg.theta_global};
}

inline void ou_reset(OuState& state) { state.xi = 0.0; }

/// Discrete unit-timestep update: xi <- xi - theta*xi + sigma*eps.
inline OuState ou_step(OuState state, Rng& rng) {
  state.xi += -state.theta * state.xi + state.sigma * normal(rng);
  return state;
}

/// output_j = phi_j + xi*jac_j + n_j with n_j ~ Normal(0, (sigma_local*|jac_j|)^2),
/// drawn independently per feature per call.
inline void apply_noise(std::span<const float> phi, std::span<const float> jac,
                        const OuState& ou, const NoiseConfig& cfg, Rng& rng,
                        std::vector<double>& out) {
  if (phi.size() != jac.size())
    throw AugmentError("phi/jac length mismatch");
  out.resize(phi.size());
  const double xi = ou.xi;
  if (cfg.sigma_local > 0.0) {
    for (std::size_t j = 0; j < phi.size(); ++j)
      out[j] = phi[j] + xi * static_cast<double>(jac[j]) +
               cfg.sigma_local * std::fabs(static_cast<double>(jac[j])) * normal(rng);
  } else {
    for (std::size_t j = 0; j < phi.size(); ++j)
      out[j] = phi[j] + xi * static_cast<double>(jac[j]);
  }
}

inline std::vector<double> apply_noise(std::span<const float> phi,
                                       std::span<const float> jac,
                                       const OuState& ou, const NoiseConfig& cfg,
                                       Rng& rng) {
  std::vector<double> out;
  apply_noise(phi, jac, ou, cfg, rng, out);
  return out;
}

}  // namespace navrl
