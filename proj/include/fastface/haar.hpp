#pragma once

#include <cmath>
#include <cstddef>
#include <deque>
#include <numeric>
#include <optional>
#include <stdexcept>

namespace fastface {

/// Sliding Haar step-edge detector over a smoothed-loss stream.
///
/// Keeps the last 2s values; once the window is full each push yields
///   response = sum(older half) - sum(newer half),
/// which is positive when the signal has dropped across the window (the
/// orientation a plateau detector wants: recent values lower than older
/// ones). With s == 1 the response is exactly the one-step difference
/// v_{t-1} - v_t, bit for bit.
class HaarDetector {
 public:
  explicit HaarDetector(std::size_t half_size) : half_size_(half_size) {
    if (half_size == 0) {
      throw std::invalid_argument("haar: half_size must be a positive integer");
    }
  }

  std::size_t half_size() const { return half_size_; }

  /// Number of values currently buffered (never exceeds 2*half_size).
  std::size_t fill() const { return window_.size(); }

  /// Pushes one smoothed value. Returns the window response once 2s values
  /// are buffered (evicting the oldest), nothing during the fill phase.
  std::optional<double> push(double smoothed) {
    if (!std::isfinite(smoothed)) {
      throw std::invalid_argument("haar: non-finite observation");
    }
    window_.push_back(smoothed);
    if (window_.size() < 2 * half_size_) {
      return std::nullopt;
    }
    const auto mid = window_.begin() + static_cast<std::ptrdiff_t>(half_size_);
    const double older = std::accumulate(window_.begin(), mid, 0.0);
    const double newer = std::accumulate(mid, window_.end(), 0.0);
    window_.pop_front();
    return older - newer;
  }

 private:
  std::size_t half_size_;
  std::deque<double> window_;
};

inline std::optional<double> haar_response(HaarDetector& det, double smoothed) {
  return det.push(smoothed);
}

}  // namespace fastface
