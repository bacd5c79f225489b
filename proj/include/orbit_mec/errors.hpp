#pragma once

#include <stdexcept>
#include <string>

namespace orbit_mec {

/// A numeric argument is non-finite, out of range, or missing.
class InvalidParameter : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// An offload was requested over a link whose rate is zero.
class InfeasibleLink : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An offload target was requested in a region with no usable channel.
class IllegalAction : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Scenario or configuration rejected at construction time. `path` names the
/// offending field (JSON-pointer style) when known.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string path, const std::string& what)
      : std::runtime_error(path.empty() ? what : path + ": " + what), path_(std::move(path)) {}
  explicit ConfigError(const std::string& what) : ConfigError(std::string{}, what) {}

  const std::string& path() const noexcept { return path_; }

 private:
  std::string path_;
};

/// The exact solver found no decision satisfying the named constraint.
class InfeasibleInstance : public std::runtime_error {
 public:
  InfeasibleInstance(std::string constraint, const std::string& what)
      : std::runtime_error(what), constraint_(std::move(constraint)) {}

  const std::string& constraint() const noexcept { return constraint_; }

 private:
  std::string constraint_;
};

}  // namespace orbit_mec
