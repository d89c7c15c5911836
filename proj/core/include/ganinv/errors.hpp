#pragma once

#include <stdexcept>
#include <string>

namespace ganinv {

/// Base of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Caller passed data that violates an operation's preconditions
/// (dimension mismatch, non-finite input, bad shape).
class InputError : public Error {
 public:
  using Error::Error;
};

/// A configuration or generator spec is internally inconsistent.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// An object was used outside its contract, e.g. a tape replayed
/// against a different network.
class ContractError : public Error {
 public:
  using Error::Error;
};

/// A persisted file could not be parsed. `field()` names the offending
/// header field or payload section.
class FormatError : public Error {
 public:
  FormatError(std::string field, const std::string& what)
      : Error(field + ": " + what), field_(std::move(field)) {}

  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

/// Optimization produced a non-finite loss or gradient.
class NumericalError : public Error {
 public:
  NumericalError(long iteration, const std::string& what)
      : Error("iteration " + std::to_string(iteration) + ": " + what),
        iteration_(iteration) {}

  long iteration() const noexcept { return iteration_; }

  /// Same error with `context` (e.g. a trial index) prepended to the message.
  NumericalError with_context(const std::string& context) const {
    return NumericalError(iteration_, context + ": " + what(), Raw{});
  }

 private:
  struct Raw {};
  NumericalError(long iteration, const std::string& message, Raw)
      : Error(message), iteration_(iteration) {}

  long iteration_;
};

}  // namespace ganinv
