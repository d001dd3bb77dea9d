#pragma once

#include <array>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <istream>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "fastface/detector.hpp"
#include "fastface/errors.hpp"
#include "fastface/scheduler.hpp"

namespace fastface {

/// Recorded loss curve; the iteration index is the vector index.
struct LossTrace {
  std::vector<double> losses;

  std::size_t size() const { return losses.size(); }
  bool empty() const { return losses.empty(); }
};

/// Per-step scheduler record: the loss it observed, the learning rate it
/// emitted and the detector's verdict (de = 0, event = none for kinds or
/// phases without a signal).
struct LrRecord {
  double loss = 0.0;
  double lr = 0.0;
  double de = 0.0;
  Event event = Event::None;
};

struct LrTrace {
  std::vector<LrRecord> records;

  std::size_t size() const { return records.size(); }
  bool empty() const { return records.empty(); }
};

namespace detail {

/// Shortest decimal form that parses back to the same double, so traces
/// round-trip exactly and goldens do not depend on stream formatting state.
inline std::string render_double(double v) {
  std::array<char, 32> buf;
  const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), res.ptr);
}

inline double parse_double_field(std::string_view field, std::size_t line_no,
                                 std::string_view what) {
  double v = 0.0;
  const auto res = std::from_chars(field.data(), field.data() + field.size(), v);
  if (res.ec != std::errc{} || res.ptr != field.data() + field.size()) {
    throw TraceError("line " + std::to_string(line_no) + ": malformed " +
                     std::string(what) + " '" + std::string(field) + "'");
  }
  return v;
}

inline std::uint64_t parse_iter_field(std::string_view field, std::size_t line_no) {
  std::uint64_t v = 0;
  const auto res = std::from_chars(field.data(), field.data() + field.size(), v);
  if (res.ec != std::errc{} || res.ptr != field.data() + field.size()) {
    throw TraceError("line " + std::to_string(line_no) + ": malformed iter '" +
                     std::string(field) + "'");
  }
  return v;
}

}  // namespace detail

/// Parses an `iter,loss` CSV. Iterations must run 0, 1, 2, ... without
/// gaps, duplicates or reordering; every loss must be finite. LF and CRLF
/// endings both work; a leading UTF-8 BOM is tolerated. Errors carry the
/// offending 1-based line number.
inline LossTrace read_loss_trace(std::istream& in) {
  LossTrace trace;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::string_view sv = line;
    if (line_no == 1) {
      if (sv.substr(0, 3) == "\xEF\xBB\xBF") sv.remove_prefix(3);
      if (sv != "iter,loss") {
        throw TraceError("line 1: expected header 'iter,loss', got '" +
                         std::string(sv) + "'");
      }
      continue;
    }
    if (sv.empty()) {
      throw TraceError("line " + std::to_string(line_no) + ": empty line");
    }
    const auto comma = sv.find(',');
    if (comma == std::string_view::npos) {
      throw TraceError("line " + std::to_string(line_no) +
                       ": expected 'iter,loss', got '" + std::string(sv) + "'");
    }
    const std::uint64_t iter = detail::parse_iter_field(sv.substr(0, comma), line_no);
    const std::uint64_t expected = trace.losses.size();
    if (iter != expected) {
      throw TraceError("line " + std::to_string(line_no) +
                       (iter < expected ? ": duplicate or non-monotonic iter "
                                        : ": iter gap ") +
                       "(expected " + std::to_string(expected) + ", got " +
                       std::to_string(iter) + ")");
    }
    const double loss =
        detail::parse_double_field(sv.substr(comma + 1), line_no, "loss");
    if (!std::isfinite(loss)) {
      throw TraceError("line " + std::to_string(line_no) + ": non-finite loss '" +
                       std::string(sv.substr(comma + 1)) + "'");
    }
    trace.losses.push_back(loss);
  }
  if (line_no == 0) {
    throw TraceError("empty input: expected header 'iter,loss'");
  }
  return trace;
}

inline LossTrace read_loss_trace_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw TraceError("cannot open loss trace '" + path + "' for reading");
  }
  return read_loss_trace(in);
}

/// Writes `iter,loss,lr,de,event` rows, one per record, LF endings, floats
/// in shortest round-trip form.
inline void write_lr_trace(const LrTrace& trace, std::ostream& out) {
  out << "iter,loss,lr,de,event\n";
  for (std::size_t i = 0; i < trace.records.size(); ++i) {
    const LrRecord& r = trace.records[i];
    out << i << ',' << detail::render_double(r.loss) << ','
        << detail::render_double(r.lr) << ',' << detail::render_double(r.de) << ','
        << to_string(r.event) << '\n';
  }
}

inline void write_lr_trace_file(const LrTrace& trace, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw TraceError("cannot open '" + path + "' for writing");
  }
  write_lr_trace(trace, out);
  out.flush();
  if (!out) {
    throw TraceError("failed writing '" + path + "'");
  }
}

/// Writes the `iter,loss` form read back by read_loss_trace.
inline void write_loss_trace(const LossTrace& trace, std::ostream& out) {
  out << "iter,loss\n";
  for (std::size_t i = 0; i < trace.losses.size(); ++i) {
    out << i << ',' << detail::render_double(trace.losses[i]) << '\n';
  }
}

inline void write_loss_trace_file(const LossTrace& trace, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw TraceError("cannot open '" + path + "' for writing");
  }
  write_loss_trace(trace, out);
  out.flush();
  if (!out) {
    throw TraceError("failed writing '" + path + "'");
  }
}

/// Runs a fresh scheduler over a recorded curve, producing one LrRecord per
/// input loss. Open loop: the learning rates influence nothing, since the
/// losses were recorded under whatever schedule produced the trace.
inline LrTrace replay(Scheduler& sched, const LossTrace& trace) {
  if (trace.empty()) {
    throw TraceError("replay: loss trace is empty");
  }
  if (sched.steps_taken() != 0) {
    throw std::invalid_argument("replay: scheduler has already been stepped");
  }
  LrTrace out;
  out.records.reserve(trace.size());
  for (std::size_t t = 0; t < trace.losses.size(); ++t) {
    const double loss = trace.losses[t];
    const StepResult res = sched.step(t, loss);
    LrRecord rec;
    rec.loss = loss;
    rec.lr = res.lr;
    if (res.signal) {
      rec.de = res.signal->de;
      rec.event = res.signal->event;
    }
    out.records.push_back(rec);
  }
  return out;
}

}  // namespace fastface
