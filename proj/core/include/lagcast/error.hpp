#pragma once

#include <stdexcept>
#include <string>

namespace lagcast {

/// Base class for every recoverable error raised by the library: bad input
/// files, invalid configurations, degenerate data. The CLI maps these to exit
/// status 1.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed text input. Carries the 1-based line number when known (0 otherwise).
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t line)
      : Error(line ? "line " + std::to_string(line) + ": " + what : what), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

class ValidationError : public Error {
 public:
  using Error::Error;
};

class AlignmentError : public Error {
 public:
  using Error::Error;
};

class SplitError : public Error {
 public:
  using Error::Error;
};

/// Zero-variance column or input where a nonconstant one is required.
class DegenerateError : public Error {
 public:
  using Error::Error;
};

class InputError : public Error {
 public:
  using Error::Error;
};

/// Rank-deficient least-squares design.
class RankError : public Error {
 public:
  RankError(const std::string& what, std::string column)
      : Error(what), column_(std::move(column)) {}
  const std::string& column() const noexcept { return column_; }

 private:
  std::string column_;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Invalid synthetic-generator specification.
class SpecError : public Error {
 public:
  using Error::Error;
};

/// An internal invariant failed (e.g. the LASSO objective increased). Not an
/// input problem; the CLI maps it to exit status 2.
class InvariantError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

}  // namespace lagcast
