#pragma once

#include <charconv>
#include <cstdint>
#include <fstream>
#include <istream>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "fastface/errors.hpp"
#include "fastface/scheduler.hpp"
#include "fastface/sim.hpp"

namespace fastface {

/// Everything a harness run needs: the synthetic process, one scheduler per
/// `kind:` line, and the global run keys.
struct HarnessConfig {
  SyntheticProcessConfig process;
  std::vector<SchedulerConfig> schedulers;
  std::optional<std::uint64_t> total_iters;
  std::optional<double> target;
};

namespace detail {

inline std::string_view trim(std::string_view sv) {
  while (!sv.empty() && (sv.front() == ' ' || sv.front() == '\t')) sv.remove_prefix(1);
  while (!sv.empty() && (sv.back() == ' ' || sv.back() == '\t')) sv.remove_suffix(1);
  return sv;
}

inline double config_double(std::string_view value, std::size_t line_no,
                            std::string_view key) {
  double v = 0.0;
  const auto res = std::from_chars(value.data(), value.data() + value.size(), v);
  if (res.ec != std::errc{} || res.ptr != value.data() + value.size()) {
    throw ConfigError("line " + std::to_string(line_no) + ": key '" +
                      std::string(key) + "' needs a number, got '" +
                      std::string(value) + "'");
  }
  return v;
}

inline std::uint64_t config_uint(std::string_view value, std::size_t line_no,
                                 std::string_view key) {
  std::uint64_t v = 0;
  const auto res = std::from_chars(value.data(), value.data() + value.size(), v);
  if (res.ec != std::errc{} || res.ptr != value.data() + value.size()) {
    throw ConfigError("line " + std::to_string(line_no) + ": key '" +
                      std::string(key) + "' needs a non-negative integer, got '" +
                      std::string(value) + "'");
  }
  return v;
}

inline bool config_bool(std::string_view value, std::size_t line_no,
                        std::string_view key) {
  if (value == "true") return true;
  if (value == "false") return false;
  throw ConfigError("line " + std::to_string(line_no) + ": key '" + std::string(key) +
                    "' needs true or false, got '" + std::string(value) + "'");
}

inline std::vector<double> config_fractions(std::string_view value, std::size_t line_no,
                                            std::string_view key) {
  std::vector<double> out;
  std::size_t pos = 0;
  while (pos <= value.size()) {
    const auto comma = value.find(',', pos);
    const auto end = comma == std::string_view::npos ? value.size() : comma;
    out.push_back(config_double(trim(value.substr(pos, end - pos)), line_no, key));
    if (comma == std::string_view::npos) break;
    pos = comma + 1;
  }
  return out;
}

}  // namespace detail

/// Parses the flat `key: value` format. `#` starts a comment, blank lines
/// are skipped, LF/CRLF both work. Each `kind:` line opens a scheduler
/// entry that the scheduler keys after it configure; process and run keys
/// are global and may appear anywhere. Unknown keys are errors.
inline HarnessConfig parse_config(std::istream& in) {
  HarnessConfig cfg;
  SchedulerConfig* current = nullptr;
  std::string line;
  std::size_t line_no = 0;

  auto scheduler_entry = [&](std::string_view key) -> SchedulerConfig& {
    if (!current) {
      throw ConfigError("line " + std::to_string(line_no) + ": key '" +
                        std::string(key) + "' appears before any 'kind'");
    }
    return *current;
  };

  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::string_view sv = line;
    if (line_no == 1 && sv.substr(0, 3) == "\xEF\xBB\xBF") sv.remove_prefix(3);
    const auto hash = sv.find('#');
    if (hash != std::string_view::npos) sv = sv.substr(0, hash);
    sv = detail::trim(sv);
    if (sv.empty()) continue;

    const auto colon = sv.find(':');
    if (colon == std::string_view::npos) {
      throw ConfigError("line " + std::to_string(line_no) +
                        ": expected 'key: value', got '" + std::string(sv) + "'");
    }
    const std::string_view key = detail::trim(sv.substr(0, colon));
    const std::string_view value = detail::trim(sv.substr(colon + 1));
    if (key.empty()) {
      throw ConfigError("line " + std::to_string(line_no) + ": empty key");
    }
    if (value.empty()) {
      throw ConfigError("line " + std::to_string(line_no) + ": key '" +
                        std::string(key) + "' has no value");
    }

    if (key == "kind") {
      SchedulerConfig sc;
      sc.kind = scheduler_kind_from(value);
      cfg.schedulers.push_back(std::move(sc));
      current = &cfg.schedulers.back();
    } else if (key == "l0") {
      cfg.process.l0 = detail::config_double(value, line_no, key);
    } else if (key == "l_inf") {
      cfg.process.l_inf = detail::config_double(value, line_no, key);
    } else if (key == "floor_slope") {
      cfg.process.floor_slope = detail::config_double(value, line_no, key);
    } else if (key == "decay_gain") {
      cfg.process.decay_gain = detail::config_double(value, line_no, key);
    } else if (key == "noise_scale") {
      cfg.process.noise_scale = detail::config_double(value, line_no, key);
    } else if (key == "seed") {
      cfg.process.seed = detail::config_uint(value, line_no, key);
    } else if (key == "total_iters") {
      cfg.total_iters = detail::config_uint(value, line_no, key);
    } else if (key == "target") {
      cfg.target = detail::config_double(value, line_no, key);
    } else if (key == "gamma0") {
      scheduler_entry(key).gamma0 = detail::config_double(value, line_no, key);
    } else if (key == "alpha") {
      scheduler_entry(key).alpha = detail::config_double(value, line_no, key);
    } else if (key == "beta") {
      scheduler_entry(key).beta = detail::config_double(value, line_no, key);
    } else if (key == "lambda") {
      scheduler_entry(key).lambda = detail::config_double(value, line_no, key);
    } else if (key == "tau") {
      scheduler_entry(key).tau = detail::config_double(value, line_no, key);
    } else if (key == "delta") {
      scheduler_entry(key).delta = detail::config_double(value, line_no, key);
    } else if (key == "lr_min") {
      scheduler_entry(key).lr_min = detail::config_double(value, line_no, key);
    } else if (key == "half_size") {
      scheduler_entry(key).half_size =
          static_cast<std::size_t>(detail::config_uint(value, line_no, key));
    } else if (key == "milestones") {
      scheduler_entry(key).milestones = detail::config_fractions(value, line_no, key);
    } else if (key == "consecutive") {
      scheduler_entry(key).consecutive = detail::config_bool(value, line_no, key);
    } else if (key == "label") {
      scheduler_entry(key).label = std::string(value);
    } else {
      throw ConfigError("line " + std::to_string(line_no) + ": unknown key '" +
                        std::string(key) + "'");
    }
  }

  for (SchedulerConfig& sc : cfg.schedulers) {
    sc.total_iters = cfg.total_iters;
  }
  return cfg;
}

inline HarnessConfig parse_config(std::string_view text) {
  std::istringstream in{std::string(text)};
  return parse_config(in);
}

inline HarnessConfig parse_config_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw IoError("cannot open config '" + path + "' for reading");
  }
  return parse_config(in);
}

}  // namespace fastface
