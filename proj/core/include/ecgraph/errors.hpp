#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace ecgraph {

// Input violates a documented precondition or invariant.
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Malformed text input; carries the 1-based line number of the offending line.
class ParseError : public ValidationError {
 public:
  ParseError(std::size_t line, const std::string& message)
      : ValidationError("line " + std::to_string(line) + ": " + message),
        line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

// Solver non-convergence and other floating-point failures.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// An iterative optimizer blew up; usually fixed by a smaller learning rate.
class DivergedError : public NumericError {
 public:
  using NumericError::NumericError;
};

}  // namespace ecgraph
