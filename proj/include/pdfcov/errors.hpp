/**
 * @file errors.hpp
 * @brief Exception types shared by every pdfcov module.
 *
 * ArgumentError     - a caller passed a value outside an operation's domain.
 * ConfigurationError - a model/weight/noise configuration is internally invalid
 *                      (non-PSD correlation, non-PSD weight, price overflow).
 * InputError        - malformed external input (CSV/JSON); carries the row.
 */
#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace pdfcov {

class ArgumentError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class ConfigurationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InputError : public std::runtime_error {
 public:
  InputError(const std::string& source, std::size_t row, const std::string& what)
      : std::runtime_error(source + ":" + std::to_string(row) + ": " + what),
        source_(source),
        row_(row) {}

  explicit InputError(const std::string& what) : std::runtime_error(what) {}

  const std::string& source() const noexcept { return source_; }
  /// 1-based line number in the offending file, 0 when not applicable.
  std::size_t row() const noexcept { return row_; }

 private:
  std::string source_;
  std::size_t row_ = 0;
};

}  // namespace pdfcov
