#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>

namespace onmf {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Negative input where a nonnegative quantity is required.
class DomainError : public Error {
 public:
  using Error::Error;
};

class DimensionError : public Error {
 public:
  using Error::Error;
};

class WindowTooLongError : public Error {
 public:
  WindowTooLongError(std::size_t window, std::size_t available)
      : Error("window too long: k=" + std::to_string(window) + " exceeds " +
              std::to_string(available) + " available columns"),
        window_(window),
        available_(available) {}

  std::size_t window() const { return window_; }
  std::size_t available() const { return available_; }

 private:
  std::size_t window_;
  std::size_t available_;
};

class IndexError : public Error {
 public:
  using Error::Error;
};

// CSV parse failure. Row and column are 1-based file coordinates; 0 means
// "not applicable".
class ParseError : public Error {
 public:
  ParseError(const std::string& source, std::size_t row, std::size_t column,
             const std::string& what)
      : Error(source + ":" + std::to_string(row) + ":" + std::to_string(column) +
              ": " + what),
        row_(row),
        column_(column) {}

  std::size_t row() const { return row_; }
  std::size_t column() const { return column_; }

 private:
  std::size_t row_;
  std::size_t column_;
};

// Invalid configuration value; field() is a dotted path such as
// "learner.k".
class ConfigError : public Error {
 public:
  ConfigError(std::string field, std::string message)
      : Error(field + ": " + message), field_(std::move(field)), message_(std::move(message)) {}

  const std::string& field() const { return field_; }
  const std::string& message() const { return message_; }

 private:
  std::string field_;
  std::string message_;
};

}  // namespace onmf
