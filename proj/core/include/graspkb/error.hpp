#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace graspkb {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// Malformed text input. Carries a 1-based line/column position.
class ParseError : public Error {
  public:
    ParseError(std::string message, std::size_t line, std::size_t column)
        : Error(format(message, line, column)), line_(line), column_(column)
    {}

    [[nodiscard]] std::size_t line() const noexcept { return line_; }
    [[nodiscard]] std::size_t column() const noexcept { return column_; }

  private:
    static std::string format(std::string const& message, std::size_t line, std::size_t column)
    {
        return std::to_string(line) + ":" + std::to_string(column) + ": " + message;
    }

    std::size_t line_;
    std::size_t column_;
};

/// Input that parses but violates a data or model constraint.
class ValidationError : public Error {
  public:
    using Error::Error;
};

/// Optimization or sampling produced unusable numbers.
class NumericError : public Error {
  public:
    using Error::Error;
};

/// Weight learning ran away (typically separable data without a prior).
class DivergenceError : public NumericError {
  public:
    using NumericError::NumericError;
};

} // namespace graspkb
