#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace rwheel {

/// Malformed input text (dataset, schema sidecar or observation).
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, std::size_t line = 0)
      : std::runtime_error(line ? "line " + std::to_string(line) + ": " + what : what), line_(line) {}

  /// 1-based line number, or 0 when the error is not tied to a line.
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

/// A precondition on a domain operation was violated.
class DomainError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Invalid WheelConfig or CLI override.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Observation whose shape or value types do not match the model schema.
class SchemaError : public std::invalid_argument {
 public:
  SchemaError(const std::string& what, std::string attribute = {})
      : std::invalid_argument(what), attribute_(std::move(attribute)) {}

  const std::string& attribute() const noexcept { return attribute_; }

 private:
  std::string attribute_;
};

/// No factor in the table can be evaluated for the observation.
class UnclassifiableError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A persisted model that fails to load or validate.
class ModelFormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace rwheel
