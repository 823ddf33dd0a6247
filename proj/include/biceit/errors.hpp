#pragma once

#include <complex>
#include <stdexcept>
#include <string>
#include <vector>

namespace biceit {

// Base class for everything thrown by this library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Rejected input. Carries the full list of violations, not just the first.
class ValidationError : public Error {
 public:
  explicit ValidationError(std::vector<std::string> issues)
      : Error(join(issues)), issues_(std::move(issues)) {}
  explicit ValidationError(const std::string& issue)
      : ValidationError(std::vector<std::string>{issue}) {}

  const std::vector<std::string>& issues() const { return issues_; }

 private:
  static std::string join(const std::vector<std::string>& issues) {
    std::string msg = "invalid input";
    for (const auto& s : issues) {
      msg += "\n  - ";
      msg += s;
    }
    return msg;
  }

  std::vector<std::string> issues_;
};

// Numerical failure inside a solver (singular system, non-convergence, ...).
class SolverError : public Error {
 public:
  using Error::Error;
};

// Iteration hit its cap. Keeps the last two iterates for diagnostics.
class ConvergenceError : public SolverError {
 public:
  ConvergenceError(const std::string& msg, std::complex<double> last,
                   std::complex<double> previous)
      : SolverError(msg), last_iterate(last), previous_iterate(previous) {}

  std::complex<double> last_iterate;
  std::complex<double> previous_iterate;
};

// Filesystem / parse trouble.
class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace biceit
