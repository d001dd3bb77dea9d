#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>

#include "fastface/rng.hpp"

namespace fastface {

/// Learning-rate-responsive synthetic loss process.
///
/// The loss relaxes geometrically toward a floor that itself depends on the
/// current learning rate:
///
///   plateau(lr) = l_inf + floor_slope * lr
///   L_{t+1} = plateau + (L_t - plateau) * (1 - decay_gain * lr)
///             + noise_scale * lr * xi,   xi ~ N(0, 1)
///
/// clamped at 0. Large lr converges fast but stalls on a high plateau;
/// halving lr both lowers the attainable floor and shrinks the noise — the
/// trade-off an adaptive schedule is supposed to exploit.
struct SyntheticProcessConfig {
  double l0 = 30.0;           ///< initial loss
  double l_inf = 1.0;         ///< plateau floor at lr -> 0
  double floor_slope = 100.0; ///< plateau rise per unit lr
  double decay_gain = 0.5;    ///< contraction per unit lr (decay_gain*lr < 1)
  double noise_scale = 0.2;   ///< noise amplitude per unit lr
  std::uint64_t seed = 42;

  double plateau(double lr) const { return l_inf + floor_slope * lr; }

  void validate() const {
    if (!(l0 > 0.0)) throw std::invalid_argument("sim: l0 must be positive");
    if (!(l_inf >= 0.0)) throw std::invalid_argument("sim: l_inf must be non-negative");
    if (!(floor_slope >= 0.0)) {
      throw std::invalid_argument("sim: floor_slope must be non-negative");
    }
    if (!(decay_gain > 0.0)) {
      throw std::invalid_argument("sim: decay_gain must be positive");
    }
    if (!(noise_scale >= 0.0)) {
      throw std::invalid_argument("sim: noise_scale must be non-negative");
    }
  }
};

/// Mutable side of the process: current loss plus the owned variate stream.
struct SimState {
  double loss;
  Rng rng;
  std::uint64_t step_count = 0;

  explicit SimState(const SyntheticProcessConfig& cfg) : loss(cfg.l0), rng(cfg.seed) {
    cfg.validate();
  }
};

/// Advances the process one step under the given learning rate and returns
/// the new loss. The contraction requirement decay_gain*lr < 1 is enforced
/// on every call; a normal variate is drawn even when noise_scale == 0 so
/// the stream position depends only on the step count.
inline double sim_step(SimState& st, const SyntheticProcessConfig& cfg, double lr) {
  if (!(lr > 0.0) || !std::isfinite(lr)) {
    throw std::invalid_argument("sim: learning rate must be positive and finite");
  }
  if (!(cfg.decay_gain * lr < 1.0)) {
    throw std::invalid_argument("sim: contraction violated (decay_gain * lr >= 1)");
  }
  const double p = cfg.plateau(lr);
  double next = p + (st.loss - p) * (1.0 - cfg.decay_gain * lr) +
                cfg.noise_scale * lr * st.rng.next_normal();
  next = std::max(next, 0.0);
  st.loss = next;
  ++st.step_count;
  return next;
}

}  // namespace fastface
