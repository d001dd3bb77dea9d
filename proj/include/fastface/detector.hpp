#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string_view>
#include <type_traits>

#include "fastface/ema.hpp"

namespace fastface {

/// Per-step verdict of the plateau policy.
enum class Event : std::uint8_t {
  None,     ///< loss still moving (or policy not consulted this step)
  Counted,  ///< stationary step accumulated toward the tolerance
  Halved,   ///< tolerance exhausted: learning rate was cut
};

inline std::string_view to_string(Event e) {
  switch (e) {
    case Event::Counted: return "counted";
    case Event::Halved: return "halved";
    default: return "none";
  }
}

/// What the detector saw and did at one step.
struct DetectorSignal {
  double de = 0.0;              ///< smoothed loss-difference estimate
  bool below_threshold = false; ///< de < lambda (strictly)
  double lr = 0.0;              ///< learning rate after this step's decision
  Event event = Event::None;
};

/// The lambda/tau/delta tolerance machine shared by every adaptive policy.
///
/// A step is stationary when the difference estimate sits strictly below
/// lambda. tau consecutive stationary steps are tolerated (counted); the
/// next one divides the learning rate by delta (clamped at lr_min) and the
/// count restarts. A non-stationary step resets the count unless
/// reset_on_high is false, in which case stationary steps accumulate even
/// across interruptions.
struct LrGate {
  double lambda = 5e-5;
  std::uint64_t tau = 1;
  double delta = 2.0;
  double lr_min = 0.0;
  bool reset_on_high = true;

  double lr = 0.0;
  std::uint64_t c = 0;

  DetectorSignal apply(double de) {
    DetectorSignal sig;
    sig.de = de;
    sig.below_threshold = de < lambda;
    if (sig.below_threshold) {
      if (c < tau) {
        ++c;
        sig.event = Event::Counted;
      } else {
        lr = std::max(lr / delta, lr_min);
        c = 0;
        sig.event = Event::Halved;
      }
    } else if (reset_on_high) {
      c = 0;
    }
    sig.lr = lr;
    return sig;
  }
};

/// Hyper-parameters of the reduced plateau detector.
struct FastFaceParams {
  double gamma0 = 0.02;   ///< initial learning rate
  double alpha = 0.001;   ///< loss-smoothing factor
  double beta = 0.001;    ///< difference-smoothing factor
  double lambda = 5e-5;   ///< stationarity threshold
  std::uint64_t tau = 1;  ///< tolerated consecutive stationary steps
  double delta = 2.0;     ///< learning-rate divisor
  double lr_min = 0.0;    ///< learning-rate floor
  bool reset_on_high = true;
};

/// Streaming plateau detector + learning-rate policy in O(1) state.
///
/// Collapses the two-stage smoothing chain (EMA of the loss, then EMA of
/// its one-step differences) into a single second-order recursion on the
/// difference estimate:
///
///   de_0 = 0
///   de_1 = alpha * (loss_0 - loss_1)
///   de_t = omega1*de_{t-1} - omega2*de_{t-2} + omega3*(loss_{t-1} - loss_t)
///
/// with omega1 = (1-alpha)+(1-beta), omega2 = (1-alpha)(1-beta),
/// omega3 = alpha*beta. Seeded differently from the two-stage chain, so
/// the two disagree during a startup transient, but the gap obeys the
/// homogeneous part of the recursion and dies off geometrically (roots
/// 1-alpha and 1-beta); after the transient they agree to rounding noise.
///
/// Plain trivially-copyable value type: a handful of doubles, no heap,
/// per-step cost independent of how long the stream runs.
struct FastFaceState {
  double alpha = 0.001;
  double beta = 0.001;
  double omega1 = 0.0;
  double omega2 = 0.0;
  double omega3 = 0.0;

  double de_prev = 0.0;
  double de_prev2 = 0.0;
  double loss_prev = 0.0;
  std::uint64_t t = 0;

  LrGate gate;

  FastFaceState() : FastFaceState(FastFaceParams{}) {}

  explicit FastFaceState(const FastFaceParams& p) : alpha(p.alpha), beta(p.beta) {
    if (!(p.gamma0 > 0.0)) {
      throw std::invalid_argument("detector: gamma0 must be positive");
    }
    if (!(p.alpha >= 0.0 && p.alpha <= 1.0) || !(p.beta >= 0.0 && p.beta <= 1.0)) {
      throw std::invalid_argument("detector: smoothing factors must be in [0, 1]");
    }
    if (!(p.lambda > 0.0)) {
      throw std::invalid_argument("detector: lambda must be positive");
    }
    if (p.tau < 1) {
      throw std::invalid_argument("detector: tau must be at least 1");
    }
    if (!(p.delta > 1.0)) {
      throw std::invalid_argument("detector: delta must exceed 1");
    }
    if (!(p.lr_min >= 0.0 && p.lr_min <= p.gamma0)) {
      throw std::invalid_argument("detector: lr_min must lie in [0, gamma0]");
    }
    omega1 = (1.0 - p.alpha) + (1.0 - p.beta);
    omega2 = (1.0 - p.alpha) * (1.0 - p.beta);
    omega3 = p.alpha * p.beta;
    gate.lambda = p.lambda;
    gate.tau = p.tau;
    gate.delta = p.delta;
    gate.lr_min = p.lr_min;
    gate.reset_on_high = p.reset_on_high;
    gate.lr = p.gamma0;
  }

  double lr() const { return gate.lr; }

  /// Advances the difference estimate by one loss observation.
  double update_de(double loss) {
    if (!std::isfinite(loss)) {
      throw std::invalid_argument("detector: non-finite loss");
    }
    double de = 0.0;
    if (t == 1) {
      de = alpha * (loss_prev - loss);
    } else if (t > 1) {
      de = omega1 * de_prev - omega2 * de_prev2 + omega3 * (loss_prev - loss);
    }
    de_prev2 = de_prev;
    de_prev = de;
    loss_prev = loss;
    ++t;
    return de;
  }

  /// One full step: update the estimate, then run the tolerance machine.
  DetectorSignal step(double loss) { return gate.apply(update_de(loss)); }
};

static_assert(std::is_trivially_copyable_v<FastFaceState>,
              "detector state must stay a flat value type");

inline double fastface_de_update(FastFaceState& state, double loss) {
  return state.update_de(loss);
}

inline DetectorSignal fastface_step(FastFaceState& state, double loss) {
  return state.step(loss);
}

/// One step of the literal two-stage chain: smooth the loss, difference the
/// smoothed values, smooth the differences. Requires a seeded loss EMA so
/// prev_smoothed holds the previous smoothed value.
inline double naive_pipeline_update(EmaState& ema_loss, EmaState& ema_diff,
                                    double& prev_smoothed, double x) {
  if (!ema_loss.initialized) {
    throw std::invalid_argument(
        "naive pipeline: loss EMA must be seeded before differencing");
  }
  const double smoothed = ema_loss.update(x);
  const double diff = prev_smoothed - smoothed;
  prev_smoothed = smoothed;
  return ema_diff.update(diff);
}

/// Convenience wrapper running the two-stage chain from t = 0 on the same
/// timeline as FastFaceState: the first observation seeds the loss EMA and
/// reports 0 (no difference exists yet). Reference implementation used to
/// cross-check the reduced recursion.
struct NaivePipeline {
  EmaState loss_ema;
  EmaState diff_ema;
  double prev_smoothed = 0.0;
  std::uint64_t t = 0;

  NaivePipeline(double alpha, double beta) : loss_ema(alpha), diff_ema(beta) {}

  double update(double x) {
    if (t++ == 0) {
      prev_smoothed = loss_ema.update(x);
      return 0.0;
    }
    return naive_pipeline_update(loss_ema, diff_ema, prev_smoothed, x);
  }
};

}  // namespace fastface
