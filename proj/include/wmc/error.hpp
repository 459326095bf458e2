#pragma once

#include <stdexcept>
#include <string>

namespace wmc {

enum class ErrorKind {
  InvalidArgument,
  ConfigError,
  Singularity,
  NonPositiveMean,
  InsufficientPoints,
  SingularDesign,
  IllConditioned,
  NoStableWindow,
  SignMixture,
  SingularPotentialOnGrid,
  NoConvergence,
  PolesOnRange,
  DegenerateNodes,
};

const char* to_string(ErrorKind kind) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message);
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

// Thrown by the eigensolver; keeps the best Ritz estimate it had.
class NoConvergenceError : public Error {
 public:
  NoConvergenceError(const std::string& message, double estimate, double residual, int iterations);
  double estimate() const noexcept { return estimate_; }
  double residual() const noexcept { return residual_; }
  int iterations() const noexcept { return iterations_; }

 private:
  double estimate_;
  double residual_;
  int iterations_;
};

[[noreturn]] void fail(ErrorKind kind, const std::string& message);

inline void require(bool condition, const std::string& message) {
  if (!condition) fail(ErrorKind::InvalidArgument, message);
}

}  // namespace wmc
