#pragma once

#include <stdexcept>
#include <string>

namespace sdotflow {

/// Base of every error thrown by the library. `kind()` is a short
/// machine-readable tag used by the CLI diagnostics.
class Error : public std::runtime_error {
 public:
  Error(std::string kind, const std::string& message)
      : std::runtime_error(message), kind_(std::move(kind)) {}

  const std::string& kind() const noexcept { return kind_; }

 private:
  std::string kind_;
};

// Malformed or inconsistent inputs (missing positions, negative edge weights...).
class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& message) : Error("config", message) {}
};

class ParameterError : public Error {
 public:
  explicit ParameterError(const std::string& message) : Error("parameter", message) {}
};

// Scenario failed validate_scenario; message lists the violations.
class ValidationError : public Error {
 public:
  explicit ValidationError(const std::string& message) : Error("validation", message) {}
};

// Every endpoint has a forbidden cost for this point.
class InfeasiblePointError : public Error {
 public:
  InfeasiblePointError(int point_id, const std::string& message)
      : Error("infeasible_point", message), point_id_(point_id) {}

  int point_id() const noexcept { return point_id_; }

 private:
  int point_id_;
};

class NumericError : public Error {
 public:
  explicit NumericError(const std::string& message) : Error("numeric", message) {}
};

class InstanceTooLargeError : public Error {
 public:
  explicit InstanceTooLargeError(const std::string& message)
      : Error("instance_too_large", message) {}
};

class InfeasibleInstanceError : public Error {
 public:
  explicit InfeasibleInstanceError(const std::string& message)
      : Error("infeasible_instance", message) {}
};

class TransportFault : public Error {
 public:
  explicit TransportFault(const std::string& message) : Error("transport", message) {}
};

class IoError : public Error {
 public:
  explicit IoError(const std::string& message) : Error("io", message) {}
};

}  // namespace sdotflow
