#pragma once

#include <cmath>
#include <stdexcept>
#include <string>

namespace fastface {

/// Exponential moving average with the first observation as base case:
/// v_0 = x_0, then v_t = a*x_t + (1-a)*v_{t-1}.
///
/// The update is computed in incremental form v += a*(x - v), which keeps
/// the smoothed value inside [min(x_i), max(x_i)] of everything seen so far
/// even under rounding: for a < 1 the correction is strictly smaller in
/// magnitude than the gap to x, and for a == 1 we assign x directly.
struct EmaState {
  double alpha = 0.0;
  double value = 0.0;
  bool initialized = false;

  EmaState() = default;

  explicit EmaState(double a) : alpha(a) {
    if (!(a >= 0.0 && a <= 1.0)) {
      throw std::invalid_argument("ema: smoothing factor must be in [0, 1], got " +
                                  std::to_string(a));
    }
  }

  /// Folds one observation in and returns the new smoothed value.
  /// Non-finite input is rejected before any state changes.
  double update(double x) {
    if (!std::isfinite(x)) {
      throw std::invalid_argument("ema: non-finite observation");
    }
    if (!initialized) {
      value = x;
      initialized = true;
    } else if (alpha == 1.0) {
      value = x;
    } else {
      value += alpha * (x - value);
    }
    return value;
  }
};

inline double ema_update(EmaState& state, double x) { return state.update(x); }

}  // namespace fastface
