#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace probe {

// Base of every error raised by the library. The CLI maps subclasses onto
// exit codes: InputError family -> 1, IoError -> 2.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed or out-of-contract user input (bad values, bad config).
class InputError : public Error {
 public:
  using Error::Error;
};

// A text file could not be parsed. Carries the 1-based line number.
class ParseError : public InputError {
 public:
  ParseError(const std::string& source, std::size_t line, const std::string& what)
      : InputError(source + ":" + std::to_string(line) + ": " + what), line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

// A value violated a documented range (rank < 1, alpha <= 0 in affine mode, ...).
class DomainError : public InputError {
 public:
  using InputError::InputError;
};

// Invalid configuration (epsilon <= 0, non-ascending edges, ...).
class ConfigError : public InputError {
 public:
  using InputError::InputError;
};

// A caller broke a precondition that the data itself cannot cause.
class ContractError : public InputError {
 public:
  using InputError::InputError;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace probe
