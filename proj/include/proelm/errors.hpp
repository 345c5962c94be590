#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace proelm {

// Base of every error thrown by this library. `kind()` is a stable
// machine-readable tag; the CLI maps it to exit codes and error JSON.
class Error : public std::runtime_error {
 public:
  Error(std::string kind, const std::string& what)
      : std::runtime_error(what), kind_(std::move(kind)) {}

  const std::string& kind() const noexcept { return kind_; }

 private:
  std::string kind_;
};

struct InvalidArgumentError : Error {
  explicit InvalidArgumentError(const std::string& what)
      : Error("invalid-argument", what) {}
};

// Dimension mismatch; the message carries both expected and actual shapes.
struct ShapeError : Error {
  explicit ShapeError(const std::string& what) : Error("shape", what) {}
};

struct SingularMatrixError : Error {
  explicit SingularMatrixError(const std::string& what)
      : Error("singular-matrix", what) {}
};

struct ConflictError : Error {
  explicit ConflictError(const std::string& what) : Error("conflict", what) {}
};

struct NumericError : Error {
  explicit NumericError(const std::string& what) : Error("numeric", what) {}
};

struct ParseError : Error {
  ParseError(const std::string& what, long line)
      : Error("parse", what + " (line " + std::to_string(line) + ")"),
        line_(line) {}
  explicit ParseError(const std::string& what) : Error("parse", what), line_(0) {}

  long line() const noexcept { return line_; }

 private:
  long line_;
};

struct InvalidPatternError : Error {
  explicit InvalidPatternError(const std::string& what)
      : Error("invalid-pattern", what) {}
};

// Stream plan cannot be built; reports the largest initial block that would work.
struct InfeasiblePlanError : Error {
  InfeasiblePlanError(const std::string& what, long max_feasible_n0)
      : Error("infeasible", what), max_feasible_n0_(max_feasible_n0) {}

  long max_feasible_n0() const noexcept { return max_feasible_n0_; }

 private:
  long max_feasible_n0_;
};

struct IoError : Error {
  explicit IoError(const std::string& what) : Error("io", what) {}
};

}  // namespace proelm
