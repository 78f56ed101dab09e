#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace poroflow {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class MeshError : public Error {
 public:
  using Error::Error;
};

/// Permeability positivity or Kozeny-Carman singularity violation.
class PhysicsError : public Error {
 public:
  using Error::Error;
};

class SolverError : public Error {
 public:
  SolverError(const std::string& what, std::vector<double> history = {})
      : Error(what), history_(std::move(history)) {}

  /// Residual history up to the failure (empty for linear failures).
  const std::vector<double>& history() const noexcept { return history_; }

 private:
  std::vector<double> history_;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace poroflow
