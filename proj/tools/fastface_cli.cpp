// Command-line harness: closed-loop simulation, trace replay, scheduler
// comparison and detector micro-benchmarks on top of the fastface headers.
//
// Exit codes: 0 success, 1 I/O or trace-data error, 2 configuration error.

#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "fastface/fastface.hpp"

namespace {

using namespace fastface;

/// Scheduler overrides shared by simulate and replay; every flag mirrors a
/// config-file key and wins over the file when both are given.
struct SchedulerFlags {
  std::optional<std::string> kind;
  std::optional<double> gamma0;
  std::optional<double> alpha;
  std::optional<double> beta;
  std::optional<double> lambda;
  std::optional<double> tau;
  std::optional<double> delta;
  std::optional<double> lr_min;
  std::optional<std::uint64_t> half_size;
  std::optional<std::string> milestones;
  bool no_consecutive = false;

  void add_to(CLI::App& cmd) {
    cmd.add_option("--kind", kind,
                   "scheduler kind: fastface, ema_hck, linlr, mslr, coslr, constant");
    cmd.add_option("--gamma0", gamma0, "initial learning rate");
    cmd.add_option("--alpha", alpha, "loss-smoothing factor");
    cmd.add_option("--beta", beta, "difference-smoothing factor");
    cmd.add_option("--lambda", lambda, "stationarity threshold");
    cmd.add_option("--tau", tau,
                   "stationary-step tolerance (<1: fraction of total_iters, >=1: steps)");
    cmd.add_option("--delta", delta, "learning-rate divisor per drop");
    cmd.add_option("--lr_min", lr_min, "learning-rate floor");
    cmd.add_option("--half_size", half_size, "window half size for ema_hck");
    cmd.add_option("--milestones", milestones,
                   "comma-separated drop fractions for mslr, e.g. 0.2,0.4,0.5");
    cmd.add_flag("--no-consecutive", no_consecutive,
                 "let stationary counts survive non-stationary interruptions");
  }

  void apply(SchedulerConfig& sc) const {
    if (kind) sc.kind = scheduler_kind_from(*kind);
    if (gamma0) sc.gamma0 = *gamma0;
    if (alpha) sc.alpha = *alpha;
    if (beta) sc.beta = *beta;
    if (lambda) sc.lambda = *lambda;
    if (tau) sc.tau = *tau;
    if (delta) sc.delta = *delta;
    if (lr_min) sc.lr_min = *lr_min;
    if (half_size) sc.half_size = static_cast<std::size_t>(*half_size);
    if (milestones) sc.milestones = detail::config_fractions(*milestones, 0, "milestones");
    if (no_consecutive) sc.consecutive = false;
  }
};

struct CommonFlags {
  std::optional<std::string> config_path;
  std::optional<std::string> out_path;
  std::optional<std::string> plot_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::uint64_t> total_iters;
  SchedulerFlags sched;
};

HarnessConfig load_config(const CommonFlags& flags) {
  HarnessConfig cfg;
  if (flags.config_path) {
    cfg = parse_config_file(*flags.config_path);
  }
  if (flags.seed) cfg.process.seed = *flags.seed;
  if (flags.total_iters) cfg.total_iters = *flags.total_iters;
  for (SchedulerConfig& sc : cfg.schedulers) sc.total_iters = cfg.total_iters;
  return cfg;
}

/// Collapses config + flags to the single scheduler simulate/replay need.
SchedulerConfig& single_scheduler(HarnessConfig& cfg, const CommonFlags& flags) {
  if (cfg.schedulers.empty()) {
    if (!flags.sched.kind) {
      throw ConfigError(
          "missing required key 'kind': set it in the config file or pass --kind");
    }
    cfg.schedulers.emplace_back();
  }
  if (cfg.schedulers.size() > 1) {
    throw ConfigError("this command takes exactly one scheduler, config defines " +
                      std::to_string(cfg.schedulers.size()));
  }
  SchedulerConfig& sc = cfg.schedulers.front();
  flags.sched.apply(sc);
  sc.total_iters = cfg.total_iters;
  return sc;
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw IoError("cannot open '" + path + "' for writing");
  }
  out << text;
  out.flush();
  if (!out) {
    throw IoError("failed writing '" + path + "'");
  }
}

void emit_lr_trace(const LrTrace& trace, const std::optional<std::string>& path) {
  if (path) {
    write_lr_trace_file(trace, *path);
  } else {
    write_lr_trace(trace, std::cout);
  }
}

std::uint64_t count_halvings(const LrTrace& trace) {
  std::uint64_t n = 0;
  for (const LrRecord& r : trace.records) {
    if (r.event == Event::Halved) ++n;
  }
  return n;
}

std::vector<double> column(const LrTrace& trace, double LrRecord::* field) {
  std::vector<double> out;
  out.reserve(trace.size());
  for (const LrRecord& r : trace.records) out.push_back(r.*field);
  return out;
}

void emit_plot(const std::vector<PlotSeries>& series, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw IoError("cannot open '" + path + "' for writing");
  }
  write_plot_csv(series, out);
}

int cmd_simulate(const CommonFlags& flags, const std::optional<std::string>& loss_out) {
  HarnessConfig cfg = load_config(flags);
  const SchedulerConfig& sc = single_scheduler(cfg, flags);
  if (!cfg.total_iters) {
    throw ConfigError("simulate requires total_iters (config key or --total_iters)");
  }
  Scheduler sched(sc);
  ClosedLoopResult run = run_closed_loop(sched, cfg.process, *cfg.total_iters);
  emit_lr_trace(run.lr, flags.out_path);
  if (loss_out) {
    write_loss_trace_file(run.loss, *loss_out);
  }
  if (flags.plot_path) {
    emit_plot({{"loss", run.loss.losses},
               {"lr", column(run.lr, &LrRecord::lr)},
               {"de", column(run.lr, &LrRecord::de)}},
              *flags.plot_path);
  }
  std::cerr << "simulated " << *cfg.total_iters << " iters with " << sc.display_name()
            << ": " << count_halvings(run.lr) << " halvings, final lr "
            << run.lr.records.back().lr << ", final loss " << run.loss.losses.back()
            << "\n";
  return 0;
}

int cmd_replay(const CommonFlags& flags, const std::string& in_path) {
  const LossTrace trace = read_loss_trace_file(in_path);
  HarnessConfig cfg = load_config(flags);
  SchedulerConfig& sc = single_scheduler(cfg, flags);
  if (!sc.total_iters) {
    sc.total_iters = trace.size();  // the recorded horizon
  }
  Scheduler sched(sc);
  const LrTrace lr = replay(sched, trace);
  emit_lr_trace(lr, flags.out_path);
  if (flags.plot_path) {
    emit_plot({{"loss", trace.losses},
               {"lr", column(lr, &LrRecord::lr)},
               {"de", column(lr, &LrRecord::de)}},
              *flags.plot_path);
  }
  std::cerr << "replayed " << trace.size() << " records with " << sc.display_name()
            << ": " << count_halvings(lr) << " halvings, final lr "
            << lr.records.back().lr << "\n";
  return 0;
}

int cmd_compare(const CommonFlags& flags, const std::optional<double>& target) {
  if (!flags.config_path) {
    throw ConfigError("compare requires --config");
  }
  HarnessConfig cfg = load_config(flags);
  if (target) cfg.target = *target;
  std::vector<ClosedLoopResult> traces;
  const ComparisonReport report =
      run_compare(cfg, flags.plot_path ? &traces : nullptr);
  write_compare_table(report, std::cout);
  if (flags.out_path) {
    std::ostringstream os;
    write_compare_report(report, os);
    write_text_file(*flags.out_path, os.str());
  }
  if (flags.plot_path) {
    std::vector<PlotSeries> series;
    for (std::size_t i = 0; i < traces.size(); ++i) {
      series.push_back({report.entries[i].label + ".loss", traces[i].loss.losses});
      series.push_back({report.entries[i].label + ".lr",
                        column(traces[i].lr, &LrRecord::lr)});
    }
    emit_plot(series, *flags.plot_path);
  }
  return 0;
}

int cmd_bench(std::uint64_t iters, const std::optional<std::string>& out_path) {
  const BenchReport report = run_bench(iters);
  std::ostringstream os;
  write_bench_report(report, os);
  std::cout << os.str();
  if (out_path) {
    write_text_file(*out_path, os.str());
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"fastface: streaming plateau detection and learning-rate scheduling"};
  app.require_subcommand(1);

  CommonFlags sim_flags;
  std::optional<std::string> sim_loss_out;
  CLI::App* simulate = app.add_subcommand(
      "simulate", "run a scheduler closed-loop on the synthetic loss process");
  simulate->add_option("--config", sim_flags.config_path, "config file");
  simulate->add_option("--out", sim_flags.out_path, "output trace CSV (default stdout)");
  simulate->add_option("--loss-out", sim_loss_out, "also write the iter,loss curve here");
  simulate->add_option("--plot", sim_flags.plot_path, "long-format plotting CSV");
  simulate->add_option("--seed", sim_flags.seed, "process seed override");
  simulate->add_option("--total_iters", sim_flags.total_iters, "iterations to run");
  sim_flags.sched.add_to(*simulate);

  CommonFlags rep_flags;
  std::string rep_in;
  CLI::App* replay_cmd =
      app.add_subcommand("replay", "replay a scheduler over a recorded loss CSV");
  replay_cmd->add_option("--in", rep_in, "input iter,loss CSV")->required();
  replay_cmd->add_option("--config", rep_flags.config_path, "config file");
  replay_cmd->add_option("--out", rep_flags.out_path, "output trace CSV (default stdout)");
  replay_cmd->add_option("--plot", rep_flags.plot_path, "long-format plotting CSV");
  replay_cmd->add_option("--total_iters", rep_flags.total_iters,
                         "horizon for fractional tau (default: trace length)");
  rep_flags.sched.add_to(*replay_cmd);

  CommonFlags cmp_flags;
  std::optional<double> cmp_target;
  CLI::App* compare = app.add_subcommand(
      "compare", "run every configured scheduler on an identically seeded process");
  compare->add_option("--config", cmp_flags.config_path, "config file")->required();
  compare->add_option("--out", cmp_flags.out_path, "machine-readable report file");
  compare->add_option("--plot", cmp_flags.plot_path, "long-format plotting CSV");
  compare->add_option("--seed", cmp_flags.seed, "process seed override");
  compare->add_option("--total_iters", cmp_flags.total_iters, "iterations per scheduler");
  compare->add_option("--target", cmp_target, "loss level for the to-target metric");

  std::uint64_t bench_iters = 0;
  std::optional<std::string> bench_out;
  CLI::App* bench =
      app.add_subcommand("bench", "measure detector per-step cost (decile profile)");
  bench->add_option("--iters", bench_iters, "total detector steps (>= 10000)")->required();
  bench->add_option("--out", bench_out, "machine-readable report file");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (simulate->parsed()) return cmd_simulate(sim_flags, sim_loss_out);
    if (replay_cmd->parsed()) return cmd_replay(rep_flags, rep_in);
    if (compare->parsed()) return cmd_compare(cmp_flags, cmp_target);
    if (bench->parsed()) return cmd_bench(bench_iters, bench_out);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const TraceError& e) {
    std::cerr << "trace error: " << e.what() << "\n";
    return 1;
  } catch (const IoError& e) {
    std::cerr << "io error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
