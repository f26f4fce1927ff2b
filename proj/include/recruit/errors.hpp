#pragma once

#include <stdexcept>
#include <string>

namespace recruit {

/// Argument outside the mathematical domain of an operation.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Input data cannot support the requested computation.
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InsufficientData : public DataError {
 public:
  using DataError::DataError;
};

/// A CSV row that cannot be ingested. `line()` is 1-based and counts the header.
class RowError : public DataError {
 public:
  RowError(const std::string& kind, std::size_t line, const std::string& detail)
      : DataError(kind + " at line " + std::to_string(line) + ": " + detail),
        kind_(kind),
        line_(line) {}
  const std::string& kind() const noexcept { return kind_; }
  std::size_t line() const noexcept { return line_; }

 private:
  std::string kind_;
  std::size_t line_;
};

class TooFewCentres : public DataError {
 public:
  using DataError::DataError;
};

/// Invalid run configuration (unknown table id, bad option combination, ...).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace recruit
