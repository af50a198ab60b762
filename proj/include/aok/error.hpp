#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace aok {

/// Base of every error the toolkit raises on bad input. Anything else that
/// escapes (std::bad_alloc, logic errors) is an internal failure.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A domain invariant does not hold (bad geometry, bad label, empty class...).
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// Input file could not be parsed. `line` is 1-based, 0 when not applicable.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t line = 0)
      : Error(line ? what + " (line " + std::to_string(line) + ")" : what), line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

/// Run configuration refers to something that does not exist or is malformed.
class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace aok
