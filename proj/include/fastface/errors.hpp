#pragma once

#include <stdexcept>
#include <string>

namespace fastface {

/// Bad configuration: unknown keys, out-of-range parameters, missing
/// required fields. CLI maps this family to exit code 2.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

/// Unreadable or unwritable paths and failed stream operations.
/// CLI maps this family to exit code 1.
class IoError : public std::runtime_error {
 public:
  explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

/// Malformed trace data: bad header, iteration gaps, non-finite losses.
/// CLI maps this family (together with unreadable paths) to exit code 1.
class TraceError : public std::runtime_error {
 public:
  explicit TraceError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace fastface
