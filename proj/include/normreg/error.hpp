#pragma once

#include <stdexcept>
#include <string>

namespace normreg {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Argument outside the mathematical domain of an operation.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Mismatched lengths or matrix shapes.
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// A normalization produced a zero scale factor for some column.
class ZeroScaleError : public Error {
 public:
  ZeroScaleError(std::size_t column, const std::string& name)
      : Error("column " + std::to_string(column) +
              (name.empty() ? std::string{} : " (" + name + ")") +
              " has zero scale; constant columns cannot be normalized"),
        column_(column) {}
  std::size_t column() const noexcept { return column_; }

 private:
  std::size_t column_;
};

/// A binary-only normalization was requested for a continuous column.
class KindMismatchError : public Error {
 public:
  using Error::Error;
};

/// Malformed input file.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t line, std::size_t column = 0)
      : Error(format(what, line, column)), line_(line), column_(column) {}
  std::size_t line() const noexcept { return line_; }
  std::size_t column() const noexcept { return column_; }

 private:
  static std::string format(const std::string& what, std::size_t line,
                            std::size_t column) {
    std::string where = "line " + std::to_string(line);
    if (column > 0) where += ", column " + std::to_string(column);
    return where + ": " + what;
  }
  std::size_t line_;
  std::size_t column_;
};

/// Parameter combination not covered by any closed-form result.
class UnsupportedError : public Error {
 public:
  using Error::Error;
};

}  // namespace normreg
