#pragma once

#include <stdexcept>
#include <string>

namespace hvac {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Vector arguments whose length disagrees with the zone count.
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// Argument outside the domain of a formula (e.g. Z_i equal to the supply temperature).
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Invalid parameters or scenario configuration. `assumption()` names the
/// validator that rejected the input, when one did.
class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& what, std::string assumption = {})
      : Error(what), assumption_(std::move(assumption)) {}
  const std::string& assumption() const noexcept { return assumption_; }

 private:
  std::string assumption_;
};

/// Scenario file that cannot be parsed. Carries the 1-based line when known.
class ParseError : public ConfigError {
 public:
  ParseError(const std::string& what, int line = -1)
      : ConfigError(line > 0 ? "line " + std::to_string(line) + ": " + what : what),
        line_(line) {}
  int line() const noexcept { return line_; }

 private:
  int line_;
};

/// Non-finite state or a singular system encountered during computation.
class NumericalError : public Error {
 public:
  using Error::Error;
};

}  // namespace hvac
