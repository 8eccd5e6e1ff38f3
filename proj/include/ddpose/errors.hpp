#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace ddpose {

/// Root of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Degenerate or singular geometry (coincident points, parallel state vectors,
/// ill-conditioned normal equations).
class GeometryError : public Error {
 public:
  using Error::Error;
};

class PropagationError : public Error {
 public:
  using Error::Error;
};

/// Text input that failed to parse. Line and column are 1-based; 0 means unknown.
class ParseError : public Error {
 public:
  ParseError(std::string source, std::size_t line, std::size_t column, const std::string& message)
      : Error(format(source, line, column, message)),
        source_(std::move(source)),
        line_(line),
        column_(column) {}

  const std::string& source() const noexcept { return source_; }
  std::size_t line() const noexcept { return line_; }
  std::size_t column() const noexcept { return column_; }

 private:
  static std::string format(const std::string& source, std::size_t line, std::size_t column,
                            const std::string& message) {
    std::string out = source.empty() ? std::string("<input>") : source;
    if (line > 0) out += ":" + std::to_string(line);
    if (column > 0) out += ":" + std::to_string(column);
    return out + ": " + message;
  }

  std::string source_;
  std::size_t line_;
  std::size_t column_;
};

/// A configuration value that parsed but is out of its valid domain.
class ConfigError : public Error {
 public:
  ConfigError(std::string field, const std::string& message)
      : Error(field + ": " + message), field_(std::move(field)) {}

  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

class InsufficientSatellites : public Error {
 public:
  InsufficientSatellites(std::size_t available, std::size_t required)
      : Error("insufficient satellites: " + std::to_string(available) + " available, " +
              std::to_string(required) + " required"),
        available_(available),
        required_(required) {}

  std::size_t available() const noexcept { return available_; }
  std::size_t required() const noexcept { return required_; }

 private:
  std::size_t available_;
  std::size_t required_;
};

}  // namespace ddpose
