#pragma once

#include <chrono>
#include <cstdint>
#include <cstdio>
#include <optional>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "fastface/config.hpp"
#include "fastface/detector.hpp"
#include "fastface/errors.hpp"
#include "fastface/rng.hpp"
#include "fastface/scheduler.hpp"
#include "fastface/sim.hpp"
#include "fastface/trace.hpp"

namespace fastface {

/// Both sides of a closed-loop run. loss.losses[t] is the process output
/// of step t; lr.records[t] is what the scheduler observed and emitted at
/// step t (it observes the previous step's output, l0 at t = 0).
struct ClosedLoopResult {
  LossTrace loss;
  LrTrace lr;
};

/// Drives scheduler and process against each other for `iters` steps: the
/// loss produced at step t is what the scheduler sees at step t+1.
inline ClosedLoopResult run_closed_loop(Scheduler& sched,
                                        const SyntheticProcessConfig& process,
                                        std::uint64_t iters) {
  if (iters == 0) {
    throw ConfigError("closed loop needs at least one iteration");
  }
  if (sched.steps_taken() != 0) {
    throw std::invalid_argument("closed loop: scheduler has already been stepped");
  }
  if (!(process.decay_gain * sched.config().gamma0 < 1.0)) {
    throw ConfigError("contraction violated: decay_gain * gamma0 must stay below 1");
  }
  SimState sim(process);
  ClosedLoopResult out;
  out.loss.losses.reserve(iters);
  out.lr.records.reserve(iters);
  for (std::uint64_t t = 0; t < iters; ++t) {
    const double observed = sim.loss;
    const StepResult res = sched.step(t, observed);
    LrRecord rec;
    rec.loss = observed;
    rec.lr = res.lr;
    if (res.signal) {
      rec.de = res.signal->de;
      rec.event = res.signal->event;
    }
    out.lr.records.push_back(rec);
    out.loss.losses.push_back(sim_step(sim, process, res.lr));
  }
  return out;
}

/// Outcome of one scheduler's closed-loop run inside a comparison.
struct SchedulerMetrics {
  std::string label;
  SchedulerKind kind = SchedulerKind::FastFace;
  double final_loss = 0.0;
  double loss_area = 0.0;  ///< sum of per-step losses
  std::optional<std::uint64_t> iters_to_target;
  std::uint64_t drops = 0;  ///< steps where the emitted lr decreased
  double ns_per_step = 0.0;
};

struct ComparisonReport {
  std::uint64_t total_iters = 0;
  std::uint64_t seed = 0;
  std::optional<double> target;
  std::vector<SchedulerMetrics> entries;
};

/// Runs every configured scheduler on an identically seeded process (each
/// gets a fresh variate stream from the same seed) and collects the
/// comparison metrics. Runs are sequential so the per-step wall time is
/// not distorted by core contention.
inline ComparisonReport run_compare(
    const HarnessConfig& cfg,
    std::vector<ClosedLoopResult>* traces_out = nullptr) {
  if (cfg.schedulers.size() < 2) {
    throw ConfigError("compare needs at least two schedulers (repeat the 'kind' key)");
  }
  if (!cfg.total_iters) {
    throw ConfigError("compare requires total_iters");
  }
  cfg.process.validate();

  ComparisonReport report;
  report.total_iters = *cfg.total_iters;
  report.seed = cfg.process.seed;
  report.target = cfg.target;

  for (const SchedulerConfig& sc : cfg.schedulers) {
    Scheduler sched(sc);
    const auto start = std::chrono::steady_clock::now();
    ClosedLoopResult run = run_closed_loop(sched, cfg.process, *cfg.total_iters);
    const auto stop = std::chrono::steady_clock::now();

    SchedulerMetrics m;
    m.label = sc.display_name();
    m.kind = sc.kind;
    m.final_loss = run.loss.losses.back();
    for (double l : run.loss.losses) m.loss_area += l;
    if (cfg.target) {
      for (std::size_t t = 0; t < run.loss.losses.size(); ++t) {
        if (run.loss.losses[t] <= *cfg.target) {
          m.iters_to_target = t;
          break;
        }
      }
    }
    for (std::size_t t = 1; t < run.lr.records.size(); ++t) {
      if (run.lr.records[t].lr < run.lr.records[t - 1].lr) ++m.drops;
    }
    m.ns_per_step =
        std::chrono::duration<double, std::nano>(stop - start).count() /
        static_cast<double>(*cfg.total_iters);
    report.entries.push_back(std::move(m));
    if (traces_out) traces_out->push_back(std::move(run));
  }

  // Disambiguate repeated display names so report rows stay addressable.
  for (std::size_t i = 0; i < report.entries.size(); ++i) {
    std::size_t ordinal = 1;
    for (std::size_t j = 0; j < i; ++j) {
      if (report.entries[j].label == report.entries[i].label) ++ordinal;
    }
    if (ordinal > 1) {
      report.entries[i].label += "#" + std::to_string(ordinal);
    }
  }
  return report;
}

/// Machine-readable `key: value` form of a comparison.
inline void write_compare_report(const ComparisonReport& r, std::ostream& out) {
  out << "total_iters: " << r.total_iters << '\n';
  out << "seed: " << r.seed << '\n';
  if (r.target) out << "target: " << detail::render_double(*r.target) << '\n';
  out << "schedulers: " << r.entries.size() << '\n';
  for (std::size_t i = 0; i < r.entries.size(); ++i) {
    const SchedulerMetrics& m = r.entries[i];
    const std::string p = "scheduler." + std::to_string(i) + ".";
    out << p << "label: " << m.label << '\n';
    out << p << "kind: " << to_string(m.kind) << '\n';
    out << p << "final_loss: " << detail::render_double(m.final_loss) << '\n';
    out << p << "loss_area: " << detail::render_double(m.loss_area) << '\n';
    out << p << "iters_to_target: "
        << (m.iters_to_target ? std::to_string(*m.iters_to_target) : "none") << '\n';
    out << p << "drops: " << m.drops << '\n';
    out << p << "ns_per_step: " << detail::render_double(m.ns_per_step) << '\n';
  }
}

namespace detail {

inline std::string fixed6(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

}  // namespace detail

/// Human-readable comparison table.
inline void write_compare_table(const ComparisonReport& r, std::ostream& out) {
  out << "closed-loop comparison: " << r.total_iters << " iters, seed " << r.seed;
  if (r.target) out << ", target " << detail::fixed6(*r.target);
  out << '\n';
  char buf[160];
  std::snprintf(buf, sizeof buf, "%-14s %12s %14s %12s %7s %10s\n", "scheduler",
                "final_loss", "loss_area", "to_target", "drops", "ns/step");
  out << buf;
  for (const SchedulerMetrics& m : r.entries) {
    std::snprintf(buf, sizeof buf, "%-14s %12s %14s %12s %7llu %10s\n",
                  m.label.c_str(), detail::fixed6(m.final_loss).c_str(),
                  detail::fixed6(m.loss_area).c_str(),
                  m.iters_to_target ? std::to_string(*m.iters_to_target).c_str() : "-",
                  static_cast<unsigned long long>(m.drops),
                  detail::fixed6(m.ns_per_step).c_str());
    out << buf;
  }
}

/// One named curve for the long-format plotting CSV.
struct PlotSeries {
  std::string name;
  std::vector<double> values;
};

/// `iter,series,value` rows, grouped by series, ready for any long-format
/// plotting tool.
inline void write_plot_csv(const std::vector<PlotSeries>& series, std::ostream& out) {
  out << "iter,series,value\n";
  for (const PlotSeries& s : series) {
    for (std::size_t i = 0; i < s.values.size(); ++i) {
      out << i << ',' << s.name << ',' << detail::render_double(s.values[i]) << '\n';
    }
  }
}

/// Per-step cost measurement of the streaming detector.
struct BenchReport {
  std::uint64_t iters = 0;
  double first_decile_ns = 0.0;
  double last_decile_ns = 0.0;
  double mean_ns = 0.0;
  std::size_t state_bytes = sizeof(FastFaceState);
  double checksum = 0.0;  ///< folds every output in so the loop cannot be elided
};

/// Streams `iters` synthetic losses through one detector, timing each
/// decile separately: constant per-step cost shows up as a flat decile
/// profile. The same pre-generated loss buffer is replayed every decile so
/// all ten measure identical work.
inline BenchReport run_bench(std::uint64_t iters) {
  if (iters < 10000) {
    throw ConfigError("bench needs at least 10000 iterations");
  }
  FastFaceParams p;
  p.tau = 1000;
  p.lr_min = 1e-12;  // keep lr out of subnormal territory on long runs
  FastFaceState state(p);

  const std::size_t chunk = static_cast<std::size_t>(iters / 10);
  std::vector<double> losses(chunk);
  Rng rng(12345);
  for (double& x : losses) x = 10.0 * rng.next_unit();

  BenchReport report;
  report.iters = static_cast<std::uint64_t>(chunk) * 10;
  double acc = 0.0;
  double total_ns = 0.0;
  for (int decile = 0; decile < 10; ++decile) {
    const auto start = std::chrono::steady_clock::now();
    for (const double x : losses) {
      const DetectorSignal sig = state.step(x);
      acc += sig.de + sig.lr;
    }
    const auto stop = std::chrono::steady_clock::now();
    const double ns = std::chrono::duration<double, std::nano>(stop - start).count() /
                      static_cast<double>(chunk);
    total_ns += ns;
    if (decile == 0) report.first_decile_ns = ns;
    if (decile == 9) report.last_decile_ns = ns;
  }
  report.mean_ns = total_ns / 10.0;
  report.checksum = acc;
  return report;
}

/// Machine-readable `key: value` form of a bench run.
inline void write_bench_report(const BenchReport& r, std::ostream& out) {
  out << "iters: " << r.iters << '\n';
  out << "first_decile_ns_per_step: " << detail::render_double(r.first_decile_ns) << '\n';
  out << "last_decile_ns_per_step: " << detail::render_double(r.last_decile_ns) << '\n';
  out << "mean_ns_per_step: " << detail::render_double(r.mean_ns) << '\n';
  out << "state_bytes: " << r.state_bytes << '\n';
  out << "state_trivially_copyable: "
      << (std::is_trivially_copyable_v<FastFaceState> ? "true" : "false") << '\n';
  out << "checksum: " << detail::render_double(r.checksum) << '\n';
}

}  // namespace fastface
