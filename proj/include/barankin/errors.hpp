#pragma once

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace barankin {

// Base class for everything this library throws on purpose.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// Malformed values: non-finite entries, dimension mismatches, asymmetry.
class InvalidInputError : public Error {
 public:
  using Error::Error;
};

// Parameter point outside the model's declared admissible box.
class DomainError : public Error {
 public:
  using Error::Error;
};

// Operation requested in a moment mode the model does not support.
class ModeError : public Error {
 public:
  using Error::Error;
};

// det(A B A^T) (or det B) vanished within rank tolerance.
class RankDeficiencyError : public Error {
 public:
  using Error::Error;
};

// The second-moment postulate failed: E[pi(t1) pi(t2)] is infinite.
// Carries the offending pair so callers (e.g. the search) can prune.
class PostulateViolationError : public Error {
 public:
  PostulateViolationError(const std::string& what, std::vector<double> theta1,
                          std::vector<double> theta2)
      : Error(what), theta1_(std::move(theta1)), theta2_(std::move(theta2)) {}

  const std::vector<double>& theta1() const { return theta1_; }
  const std::vector<double>& theta2() const { return theta2_; }

 private:
  std::vector<double> theta1_;
  std::vector<double> theta2_;
};

// Bad run configuration (CLI config file, MC settings, ...).
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Monte Carlo produced something unusable (e.g. a Gram estimate far outside
// the PSD cone relative to its own standard errors).
class DiagnosticsError : public Error {
 public:
  using Error::Error;
};

}  // namespace barankin
