// Acceptance suite for the streaming scheduler library. Each criterion
// prints exactly one [PASS]/[FAIL] line; the process exits 0 only if every
// criterion passed. Needs the built CLI and the bundled data directory:
//
//   acceptance --cli <path-to-fastface-binary> --data <repo>/data --tmp <scratch>

#include <sys/wait.h>

#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "fastface/fastface.hpp"

namespace {

using namespace fastface;
using Clock = std::chrono::steady_clock;

struct CheckFailure {
  std::string what;
};

void require(bool cond, const std::string& what) {
  if (!cond) throw CheckFailure{what};
}

std::string num(double v) {
  std::ostringstream os;
  os.precision(3);
  os << v;
  return os.str();
}

/// Two computation routes may differ by rounding; accept a tiny absolute
/// or a tiny relative gap, and report the values on failure.
void require_close(const std::string& name, double a, double b, double tol) {
  const double diff = std::abs(a - b);
  if (diff <= tol || diff <= tol * std::max(std::abs(a), std::abs(b))) return;
  std::ostringstream os;
  os.precision(17);
  os << name << ": " << a << " vs " << b << " differ by " << diff;
  throw CheckFailure{os.str()};
}

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string g_cli;
std::string g_data;
std::string g_tmp;

int run_command(const std::string& cmd) {
  const int status = std::system(cmd.c_str());
  if (status == -1) return -1;
  if (WIFEXITED(status)) return WEXITSTATUS(status);
  return -1;
}

std::string read_bytes(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  require(static_cast<bool>(in), "cannot open " + path);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

std::string first_difference(const std::string& a, const std::string& b) {
  const std::size_t n = std::min(a.size(), b.size());
  std::size_t i = 0;
  std::size_t line = 1;
  for (; i < n && a[i] == b[i]; ++i) {
    if (a[i] == '\n') ++line;
  }
  if (i == n && a.size() == b.size()) return "identical";
  return "first difference at byte " + std::to_string(i) + " (line " +
         std::to_string(line) + "), sizes " + std::to_string(a.size()) + " vs " +
         std::to_string(b.size());
}

// ---------------------------------------------------------------------------

std::string ac1_recursion_matches_oracle() {
  const auto start = Clock::now();
  const int n = 100000;
  Rng rng(20240817);
  std::vector<double> losses(n);
  for (double& x : losses) x = 10.0 * rng.next_unit();

  NaivePipeline oracle(0.001, 0.001);
  std::vector<double> expected(n);
  for (int t = 0; t < n; ++t) expected[t] = oracle.update(losses[t]);

  FastFaceParams p;  // alpha = beta = 0.001
  FastFaceState st(p);
  st.de_prev = expected[2];
  st.de_prev2 = expected[1];
  st.loss_prev = losses[2];
  st.t = 3;

  double max_gap = 0.0;
  for (int t = 3; t < n; ++t) {
    const double got = st.update_de(losses[t]);
    require_close("step " + std::to_string(t), got, expected[t], 1e-12);
    max_gap = std::max(max_gap, std::abs(got - expected[t]));
  }
  const double elapsed = seconds_since(start);
  require(elapsed < 1.0, "took " + num(elapsed) + " s, budget is 1 s");
  return "seeded recursion tracks the two-stage chain over " + std::to_string(n) +
         " random losses (max gap " + num(max_gap) + ", " + num(elapsed) + " s)";
}

std::string ac2_transient_decays() {
  const auto start = Clock::now();
  const int n = 100000;
  Rng rng(20240817);
  NaivePipeline oracle(0.001, 0.001);
  FastFaceState st{};  // fresh start: different base cases than the chain
  double max_late_gap = 0.0;
  double peak_gap = 0.0;
  for (int t = 0; t < n; ++t) {
    const double x = 10.0 * rng.next_unit();
    const double gap = std::abs(st.update_de(x) - oracle.update(x));
    peak_gap = std::max(peak_gap, gap);
    if (t >= 50000) max_late_gap = std::max(max_late_gap, gap);
  }
  require(max_late_gap < 1e-10, "gap after 50k steps is " + num(max_late_gap));
  const double elapsed = seconds_since(start);
  require(elapsed < 1.0, "took " + num(elapsed) + " s, budget is 1 s");
  return "fresh-start gap decays from " + num(peak_gap) + " to " + num(max_late_gap) +
         " past step 50000 (" + num(elapsed) + " s)";
}

std::string ac3_haar_degenerates_to_difference() {
  Rng rng(3);
  for (int i = 0; i < 10000; ++i) {
    const double a = 10.0 * rng.next_unit();
    const double b = 10.0 * rng.next_unit();
    HaarDetector det(1);
    require(!det.push(a).has_value(), "response before the window was full");
    const auto r = det.push(b);
    require(r.has_value(), "no response from a full window");
    require(*r == a - b, "pair response differs from the one-step difference");
  }
  // and along a sliding stream, not just isolated pairs
  HaarDetector det(1);
  double prev = 10.0 * rng.next_unit();
  det.push(prev);
  for (int i = 0; i < 10000; ++i) {
    const double x = 10.0 * rng.next_unit();
    const auto r = det.push(x);
    require(r.has_value() && *r == prev - x,
            "sliding response differs from the one-step difference");
    prev = x;
  }
  return "half-size-1 window responses equal one-step differences bit for bit "
         "(20000 checks)";
}

std::string ac4_quarter_budget_beats_milestones() {
  const auto start = Clock::now();
  const std::uint64_t T = 400000;
  const double allowance = 0.05 * 29.0;  // 5% of the l0 -> l_inf drop
  std::string detail;
  for (const std::uint64_t seed : {42ull, 43ull, 44ull}) {
    SyntheticProcessConfig process;
    process.seed = seed;

    SchedulerConfig ff;
    ff.kind = SchedulerKind::FastFace;
    ff.total_iters = T / 4;  // trains on a quarter of the budget
    Scheduler ff_sched(ff);
    const double ff_loss =
        run_closed_loop(ff_sched, process, T / 4).loss.losses.back();

    SchedulerConfig ms;
    ms.kind = SchedulerKind::MsLr;
    ms.total_iters = T;
    Scheduler ms_sched(ms);
    const double ms_loss = run_closed_loop(ms_sched, process, T).loss.losses.back();

    require(ff_loss <= ms_loss + allowance,
            "seed " + std::to_string(seed) + ": quarter-budget loss " + num(ff_loss) +
                " vs full-budget milestones " + num(ms_loss) + " + " + num(allowance));
    if (!detail.empty()) detail += ", ";
    detail += "seed " + std::to_string(seed) + ": " + num(ff_loss) + " vs " +
              num(ms_loss);
  }
  const double elapsed = seconds_since(start);
  require(elapsed < 30.0, "took " + num(elapsed) + " s, budget is 30 s");
  return "quarter-budget adaptive run matches full-budget milestones (" + detail +
         "; " + num(elapsed) + " s)";
}

std::string ac5_plateau_drop_spikes_the_estimate() {
  FastFaceState st{};  // alpha = beta = 0.001
  double pre_max = 0.0;
  for (int t = 0; t < 10000; ++t) {
    const double de = st.update_de(5.0);
    if (t >= 9000) pre_max = std::max(pre_max, std::abs(de));
  }
  double post_max = 0.0;
  double last = 0.0;
  for (int t = 0; t < 10000; ++t) {
    last = st.update_de(3.0);
    post_max = std::max(post_max, last);
  }
  require(post_max > 0.0, "estimate never rose after the drop");
  require(post_max > 10.0 * pre_max,
          "post-drop peak " + num(post_max) + " is not 10x the plateau level " +
              num(pre_max));
  require(last < post_max / 2.0,
          "estimate did not decay after the spike (peak " + num(post_max) +
              ", final " + num(last) + ")");
  return "level drop spikes the estimate from " + num(pre_max) + " to " +
         num(post_max) + ", then it decays to " + num(last);
}

std::string ac6_tolerance_machine_schedule() {
  // Part 1: an unbroken stationary stream halves on the 4th, 8th, 12th...
  // stationary step with a tolerance of 3.
  FastFaceParams p;
  p.tau = 3;
  FastFaceState st(p);
  for (int t = 0; t < 40; ++t) {
    const Event got = st.step(2.0).event;
    const Event want = (t % 4 == 3) ? Event::Halved : Event::Counted;
    require(got == want, "step " + std::to_string(t) + ": unexpected event");
  }

  // Part 2: one non-stationary step in the middle restarts the tolerance
  // count. Large smoothing factors make the estimate controllable step by
  // step: a small drop sends it far above the threshold for two steps.
  FastFaceParams fast;
  fast.alpha = 0.9;
  fast.beta = 0.9;
  fast.tau = 3;
  const std::vector<double> stream = {10.0, 10.0, 10.0,  10.0,  10.0,  10.0,
                                      9.998, 9.998, 9.998, 9.998, 9.998, 9.998};
  const std::vector<Event> with_reset = {
      Event::Counted, Event::Counted, Event::Counted, Event::Halved,
      Event::Counted, Event::Counted, Event::None,    Event::None,
      Event::Counted, Event::Counted, Event::Counted, Event::Halved};
  FastFaceState a(fast);
  for (std::size_t t = 0; t < stream.size(); ++t) {
    require(a.step(stream[t]).event == with_reset[t],
            "consecutive mode, step " + std::to_string(t) + ": unexpected event");
  }

  fast.reset_on_high = false;
  const std::vector<Event> without_reset = {
      Event::Counted, Event::Counted, Event::Counted, Event::Halved,
      Event::Counted, Event::Counted, Event::None,    Event::None,
      Event::Counted, Event::Halved,  Event::Counted, Event::Counted};
  FastFaceState b(fast);
  for (std::size_t t = 0; t < stream.size(); ++t) {
    require(b.step(stream[t]).event == without_reset[t],
            "non-consecutive mode, step " + std::to_string(t) + ": unexpected event");
  }
  return "halvings land on the 4th/8th/12th stationary steps; an interruption "
         "restarts the count (and does not when consecutive mode is off)";
}

std::string ac7_constant_per_step_cost() {
  static_assert(std::is_trivially_copyable_v<FastFaceState>,
                "detector state must be a flat value type");
  require(sizeof(FastFaceState) <= 128,
          "state grew beyond a handful of scalars: " +
              std::to_string(sizeof(FastFaceState)) + " bytes");

  const BenchReport report = run_bench(10000000);
  require(report.last_decile_ns <= 2.0 * report.first_decile_ns,
          "last decile " + num(report.last_decile_ns) + " ns vs first decile " +
              num(report.first_decile_ns) + " ns");
  return "10M steps: first decile " + num(report.first_decile_ns) +
         " ns/step, last decile " + num(report.last_decile_ns) + " ns/step, state " +
         std::to_string(sizeof(FastFaceState)) + " bytes";
}

std::string ac8_golden_traces() {
  namespace fs = std::filesystem;
  fs::create_directories(g_tmp);
  const std::string sim_out = g_tmp + "/sim.csv";
  const std::string replay_out = g_tmp + "/replay.csv";

  const std::string sim_cmd = "'" + g_cli + "' simulate --config '" + g_data +
                              "/simulate_default.cfg' --out '" + sim_out +
                              "' 2>/dev/null";
  require(run_command(sim_cmd) == 0, "simulate exited non-zero: " + sim_cmd);
  const std::string sim_diff =
      first_difference(read_bytes(sim_out), read_bytes(g_data + "/golden_simulate.csv"));
  require(sim_diff == "identical", "simulate trace vs golden: " + sim_diff);

  const std::string replay_cmd = "'" + g_cli + "' replay --kind fastface --in '" +
                                 g_data + "/sample_loss.csv' --out '" + replay_out +
                                 "' 2>/dev/null";
  require(run_command(replay_cmd) == 0, "replay exited non-zero: " + replay_cmd);
  const std::string replay_diff = first_difference(
      read_bytes(replay_out), read_bytes(g_data + "/golden_replay.csv"));
  require(replay_diff == "identical", "replay trace vs golden: " + replay_diff);

  return "simulate and replay reproduce the committed traces byte for byte";
}

std::string ac9_invariants_hold_everywhere() {
  // Learning-rate monotonicity on every sequence the suite emits, with
  // adaptive drops being exact divisions (or the configured floor).
  struct Run {
    std::string name;
    std::vector<double> lrs;
    bool adaptive;
    double delta;
    double lr_min;
  };
  std::vector<Run> runs;

  SyntheticProcessConfig process;
  for (const SchedulerKind kind :
       {SchedulerKind::FastFace, SchedulerKind::EmaHck, SchedulerKind::LinLr,
        SchedulerKind::MsLr, SchedulerKind::CosLr, SchedulerKind::Constant}) {
    SchedulerConfig cfg;
    cfg.kind = kind;
    cfg.total_iters = 10000;
    if (kind == SchedulerKind::EmaHck) {
      cfg.tau = 50;
      cfg.half_size = 5;
    }
    Scheduler sched(cfg);
    const ClosedLoopResult run = run_closed_loop(sched, process, 10000);
    Run r;
    r.name = std::string(to_string(kind));
    for (const LrRecord& rec : run.lr.records) r.lrs.push_back(rec.lr);
    r.adaptive = kind == SchedulerKind::FastFace || kind == SchedulerKind::EmaHck;
    r.delta = cfg.delta;
    r.lr_min = cfg.lr_min;
    runs.push_back(std::move(r));
  }
  {
    // replay over a flat recorded curve, with a floor in play
    SchedulerConfig cfg;
    cfg.kind = SchedulerKind::FastFace;
    cfg.tau = 100;
    cfg.lr_min = 1e-4;
    LossTrace flat;
    flat.losses.assign(5000, 4.0);
    Scheduler sched(cfg);
    const LrTrace lr = replay(sched, flat);
    Run r;
    r.name = "replay";
    for (const LrRecord& rec : lr.records) r.lrs.push_back(rec.lr);
    r.adaptive = true;
    r.delta = cfg.delta;
    r.lr_min = cfg.lr_min;
    runs.push_back(std::move(r));
  }

  std::size_t checked = 0;
  for (const Run& r : runs) {
    for (std::size_t t = 1; t < r.lrs.size(); ++t) {
      require(r.lrs[t] <= r.lrs[t - 1], r.name + ": lr rose at step " + std::to_string(t));
      if (r.adaptive && r.lrs[t] < r.lrs[t - 1]) {
        require(r.lrs[t] == r.lrs[t - 1] / r.delta || r.lrs[t] == r.lr_min,
                r.name + ": drop at step " + std::to_string(t) +
                    " is not an exact division or the floor");
      }
      ++checked;
    }
  }

  // Smoothed values stay inside the observed range, rounding included.
  Rng rng(20240817);
  EmaState ema(0.001);
  double lo = 1e308;
  double hi = -1e308;
  for (int t = 0; t < 100000; ++t) {
    const double x = 10.0 * rng.next_unit();
    lo = std::min(lo, x);
    hi = std::max(hi, x);
    const double v = ema.update(x);
    require(v >= lo && v <= hi, "smoothed value escaped the observed range");
  }
  return "lr monotone across " + std::to_string(runs.size()) + " runs (" +
         std::to_string(checked) + " steps), drops exact, smoothed values bounded";
}

// ---------------------------------------------------------------------------

struct Criterion {
  const char* id;
  std::function<std::string()> fn;
};

}  // namespace

int main(int argc, char** argv) {
  for (int i = 1; i + 1 < argc; i += 2) {
    const std::string flag = argv[i];
    if (flag == "--cli") {
      g_cli = argv[i + 1];
    } else if (flag == "--data") {
      g_data = argv[i + 1];
    } else if (flag == "--tmp") {
      g_tmp = argv[i + 1];
    } else {
      std::cerr << "unknown flag " << flag << "\n";
      return 2;
    }
  }
  if (g_cli.empty() || g_data.empty() || g_tmp.empty()) {
    std::cerr << "usage: acceptance --cli <fastface-binary> --data <data-dir> "
                 "--tmp <scratch-dir>\n";
    return 2;
  }

  const std::vector<Criterion> criteria = {
      {"AC1", ac1_recursion_matches_oracle},
      {"AC2", ac2_transient_decays},
      {"AC3", ac3_haar_degenerates_to_difference},
      {"AC4", ac4_quarter_budget_beats_milestones},
      {"AC5", ac5_plateau_drop_spikes_the_estimate},
      {"AC6", ac6_tolerance_machine_schedule},
      {"AC7", ac7_constant_per_step_cost},
      {"AC8", ac8_golden_traces},
      {"AC9", ac9_invariants_hold_everywhere},
  };

  int failures = 0;
  for (const Criterion& c : criteria) {
    try {
      const std::string detail = c.fn();
      std::cout << "[PASS] " << c.id << " " << detail << "\n";
    } catch (const CheckFailure& f) {
      std::cout << "[FAIL] " << c.id << " " << f.what << "\n";
      ++failures;
    } catch (const std::exception& e) {
      std::cout << "[FAIL] " << c.id << " unexpected error: " << e.what() << "\n";
      ++failures;
    }
  }
  std::cout << (criteria.size() - failures) << "/" << criteria.size()
            << " criteria passed\n";
  return failures == 0 ? 0 : 1;
}
