#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace mradlab {

// Precondition violations (bad arguments, out-of-range parameters).
class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Problems with input data: unreadable files, degenerate samples, empty series.
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A malformed row in a CSV input. Line and column are 1-based; column is the
// field index within the row.
class ParseError : public DataError {
 public:
  ParseError(std::size_t line, std::size_t column, const std::string& what)
      : DataError("line " + std::to_string(line) + ", column " +
                  std::to_string(column) + ": " + what),
        line_(line),
        column_(column) {}

  std::size_t line() const noexcept { return line_; }
  std::size_t column() const noexcept { return column_; }

 private:
  std::size_t line_;
  std::size_t column_;
};

// An iterative solver or optimizer failed to reach its tolerance.
class ConvergenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace mradlab
