#pragma once

#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace lime {

/// Failure classes surfaced by the library. The numeric values double as
/// CLI exit codes.
enum class ErrorCategory : int {
  Config = 2,
  Solver = 3,
  Invariant = 4,
};

std::string_view to_string(ErrorCategory category) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorCategory category, const std::string& message)
      : std::runtime_error(message), category_(category) {}

  ErrorCategory category() const noexcept { return category_; }
  int exit_code() const noexcept { return static_cast<int>(category_); }

 private:
  ErrorCategory category_;
};

/// Invalid input or configuration. Carries every problem found, not just the
/// first, so callers can report them together.
class ConfigError : public Error {
 public:
  explicit ConfigError(std::vector<std::string> problems);
  explicit ConfigError(const std::string& problem)
      : ConfigError(std::vector<std::string>{problem}) {}

  const std::vector<std::string>& problems() const noexcept { return problems_; }

 private:
  std::vector<std::string> problems_;
};

/// A nonlinear or linear solve did not reach its tolerance.
class SolverError : public Error {
 public:
  SolverError(const std::string& message, double last_residual, int iterations)
      : Error(ErrorCategory::Solver, message),
        last_residual_(last_residual),
        iterations_(iterations) {}

  double last_residual() const noexcept { return last_residual_; }
  int iterations() const noexcept { return iterations_; }

 private:
  double last_residual_;
  int iterations_;
};

class InvariantError : public Error {
 public:
  explicit InvariantError(const std::string& message)
      : Error(ErrorCategory::Invariant, message) {}
};

}  // namespace lime
