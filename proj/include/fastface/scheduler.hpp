#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "fastface/detector.hpp"
#include "fastface/ema.hpp"
#include "fastface/errors.hpp"
#include "fastface/haar.hpp"

namespace fastface {

enum class SchedulerKind : std::uint8_t {
  FastFace,  ///< reduced second-order plateau detector
  EmaHck,    ///< EMA smoothing + windowed Haar edge detector
  LinLr,     ///< linear decay gamma0 * (1 - t/T)
  MsLr,      ///< multiplicative drops at fixed milestone fractions
  CosLr,     ///< half-cosine decay gamma0 * (1 + cos(pi t/T)) / 2
  Constant,  ///< gamma0 forever
};

inline std::string_view to_string(SchedulerKind k) {
  switch (k) {
    case SchedulerKind::FastFace: return "fastface";
    case SchedulerKind::EmaHck: return "ema_hck";
    case SchedulerKind::LinLr: return "linlr";
    case SchedulerKind::MsLr: return "mslr";
    case SchedulerKind::CosLr: return "coslr";
    case SchedulerKind::Constant: return "constant";
  }
  return "?";
}

inline SchedulerKind scheduler_kind_from(std::string_view name) {
  if (name == "fastface") return SchedulerKind::FastFace;
  if (name == "ema_hck") return SchedulerKind::EmaHck;
  if (name == "linlr") return SchedulerKind::LinLr;
  if (name == "mslr") return SchedulerKind::MsLr;
  if (name == "coslr") return SchedulerKind::CosLr;
  if (name == "constant") return SchedulerKind::Constant;
  throw ConfigError("unknown scheduler kind '" + std::string(name) +
                    "' (expected fastface, ema_hck, linlr, mslr, coslr or constant)");
}

/// One multiplicative learning-rate drop. Exact for power-of-two divisors.
inline double multistep_next(double lr, double delta) {
  if (!(delta > 1.0)) {
    throw ConfigError("multistep_next: delta must exceed 1");
  }
  return lr / delta;
}

/// Full parameter set for any scheduler kind; unused fields are ignored by
/// kinds that do not read them. `tau` is a dual-encoded tolerance: values
/// below 1 mean a fraction of total_iters, values >= 1 an absolute count.
struct SchedulerConfig {
  SchedulerKind kind = SchedulerKind::FastFace;
  double gamma0 = 0.02;
  std::optional<std::uint64_t> total_iters;
  double alpha = 0.001;
  double beta = 0.001;
  double lambda = 5e-5;
  double tau = 0.05;
  double delta = 2.0;
  double lr_min = 0.0;
  std::size_t half_size = 1;
  std::vector<double> milestones = {0.2, 0.4, 0.5, 0.6, 0.8};
  bool consecutive = true;  ///< false: stationary counts survive interruptions
  std::string label;        ///< report name; defaults to the kind name

  bool needs_horizon() const {
    switch (kind) {
      case SchedulerKind::LinLr:
      case SchedulerKind::MsLr:
      case SchedulerKind::CosLr:
        return true;
      case SchedulerKind::FastFace:
      case SchedulerKind::EmaHck:
        return tau < 1.0;  // fractional tolerance needs T to resolve
      default:
        return false;
    }
  }

  /// Tolerance in absolute steps. Fractions resolve against total_iters.
  std::uint64_t resolved_tau() const {
    if (tau < 1.0) {
      if (!(tau > 0.0)) throw ConfigError("tau must be positive");
      if (!total_iters) {
        throw ConfigError("fractional tau requires total_iters to resolve against");
      }
      return std::max<std::uint64_t>(
          1, static_cast<std::uint64_t>(std::llround(tau * static_cast<double>(*total_iters))));
    }
    const double rounded = std::round(tau);
    if (rounded != tau) {
      throw ConfigError("tau >= 1 must be an integral step count");
    }
    return static_cast<std::uint64_t>(rounded);
  }

  void validate() const {
    if (!(gamma0 > 0.0) || !std::isfinite(gamma0)) {
      throw ConfigError("gamma0 must be positive and finite");
    }
    if (total_iters && *total_iters == 0) {
      throw ConfigError("total_iters must be positive");
    }
    if (needs_horizon() && !total_iters) {
      throw ConfigError("scheduler kind '" + std::string(to_string(kind)) +
                        "' requires total_iters");
    }
    switch (kind) {
      case SchedulerKind::FastFace:
      case SchedulerKind::EmaHck:
        if (!(alpha >= 0.0 && alpha <= 1.0)) throw ConfigError("alpha must be in [0, 1]");
        if (!(beta >= 0.0 && beta <= 1.0)) throw ConfigError("beta must be in [0, 1]");
        if (!(lambda > 0.0)) throw ConfigError("lambda must be positive");
        if (!(delta > 1.0)) throw ConfigError("delta must exceed 1");
        if (!(lr_min >= 0.0 && lr_min <= gamma0)) {
          throw ConfigError("lr_min must lie in [0, gamma0]");
        }
        resolved_tau();
        if (kind == SchedulerKind::EmaHck && half_size == 0) {
          throw ConfigError("half_size must be a positive integer");
        }
        break;
      case SchedulerKind::MsLr: {
        if (!(delta > 1.0)) throw ConfigError("delta must exceed 1");
        if (milestones.empty()) throw ConfigError("mslr needs at least one milestone");
        double prev = 0.0;
        for (double m : milestones) {
          if (!(m > prev && m < 1.0)) {
            throw ConfigError("milestones must be strictly increasing fractions in (0, 1)");
          }
          prev = m;
        }
        break;
      }
      default:
        break;
    }
  }

  std::string display_name() const {
    return label.empty() ? std::string(to_string(kind)) : label;
  }
};

/// Learning rate plus, for the adaptive kinds, the detector's view of the
/// step. Closed-form kinds carry no signal; so does ema_hck while its
/// window is still filling.
struct StepResult {
  double lr = 0.0;
  std::optional<DetectorSignal> signal;
};

/// Uniform stepping interface over every kind. Call step(t, loss) with
/// t = 0, 1, 2, ... exactly once per iteration; out-of-order steps are a
/// caller bug and are rejected. Closed-form kinds ignore the loss.
class Scheduler {
 public:
  explicit Scheduler(SchedulerConfig cfg) : cfg_(std::move(cfg)) {
    cfg_.validate();
    switch (cfg_.kind) {
      case SchedulerKind::FastFace: {
        FastFaceParams p;
        p.gamma0 = cfg_.gamma0;
        p.alpha = cfg_.alpha;
        p.beta = cfg_.beta;
        p.lambda = cfg_.lambda;
        p.tau = cfg_.resolved_tau();
        p.delta = cfg_.delta;
        p.lr_min = cfg_.lr_min;
        p.reset_on_high = cfg_.consecutive;
        state_ = FastFaceState(p);
        break;
      }
      case SchedulerKind::EmaHck: {
        EmaHckState s{EmaState(cfg_.alpha), HaarDetector(cfg_.half_size), LrGate{}};
        s.gate.lambda = cfg_.lambda;
        s.gate.tau = cfg_.resolved_tau();
        s.gate.delta = cfg_.delta;
        s.gate.lr_min = cfg_.lr_min;
        s.gate.reset_on_high = cfg_.consecutive;
        s.gate.lr = cfg_.gamma0;
        state_ = std::move(s);
        break;
      }
      case SchedulerKind::MsLr: {
        MilestoneState s;
        const double T = static_cast<double>(*cfg_.total_iters);
        for (double frac : cfg_.milestones) {
          s.iters.push_back(std::max<std::uint64_t>(
              1, static_cast<std::uint64_t>(std::llround(frac * T))));
        }
        s.lr = cfg_.gamma0;
        state_ = std::move(s);
        break;
      }
      default:
        break;  // linlr/coslr/constant are closed-form in t
    }
  }

  const SchedulerConfig& config() const { return cfg_; }
  std::uint64_t steps_taken() const { return next_t_; }

  StepResult step(std::uint64_t t, double loss) {
    if (t != next_t_) {
      throw std::invalid_argument("scheduler: steps must be sequential (expected t=" +
                                  std::to_string(next_t_) + ", got " + std::to_string(t) +
                                  ")");
    }
    ++next_t_;
    switch (cfg_.kind) {
      case SchedulerKind::FastFace: {
        auto& st = std::get<FastFaceState>(state_);
        const DetectorSignal sig = st.step(loss);
        return {sig.lr, sig};
      }
      case SchedulerKind::EmaHck: {
        auto& st = std::get<EmaHckState>(state_);
        const double smoothed = st.ema.update(loss);
        const auto response = st.haar.push(smoothed);
        if (!response) {
          return {st.gate.lr, std::nullopt};  // window still filling
        }
        const double de = *response / static_cast<double>(cfg_.half_size);
        const DetectorSignal sig = st.gate.apply(de);
        return {sig.lr, sig};
      }
      case SchedulerKind::LinLr: {
        const double T = static_cast<double>(*cfg_.total_iters);
        const double lr =
            cfg_.gamma0 * std::max(0.0, 1.0 - static_cast<double>(t) / T);
        return {lr, std::nullopt};
      }
      case SchedulerKind::MsLr: {
        auto& st = std::get<MilestoneState>(state_);
        while (st.next < st.iters.size() && t >= st.iters[st.next]) {
          st.lr = multistep_next(st.lr, cfg_.delta);
          ++st.next;
        }
        return {st.lr, std::nullopt};
      }
      case SchedulerKind::CosLr: {
        const double T = static_cast<double>(*cfg_.total_iters);
        const double phase = std::min(1.0, static_cast<double>(t) / T);
        const double lr =
            cfg_.gamma0 * (1.0 + std::cos(std::numbers::pi * phase)) / 2.0;
        return {lr, std::nullopt};
      }
      default:
        return {cfg_.gamma0, std::nullopt};
    }
  }

 private:
  struct EmaHckState {
    EmaState ema;
    HaarDetector haar;
    LrGate gate;
  };
  struct MilestoneState {
    std::vector<std::uint64_t> iters;  // resolved drop points, ascending
    std::size_t next = 0;
    double lr = 0.0;
  };

  SchedulerConfig cfg_;
  std::uint64_t next_t_ = 0;
  std::variant<std::monostate, FastFaceState, EmaHckState, MilestoneState> state_;
};

inline StepResult scheduler_step(Scheduler& s, std::uint64_t t, double loss) {
  return s.step(t, loss);
}

}  // namespace fastface
