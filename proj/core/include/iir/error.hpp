#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace iir {

/// Raised when a caller breaks an operation's precondition (shapes, ranges).
class ContractViolation : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Raised by the dataset readers. Carries the 1-based line (and column when
/// known, else 0) of the offending input.
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, std::size_t line, std::size_t column = 0)
      : std::runtime_error(what), line_(line), column_(column) {}

  std::size_t line() const noexcept { return line_; }
  std::size_t column() const noexcept { return column_; }

 private:
  std::size_t line_;
  std::size_t column_;
};

namespace detail {
inline void require(bool condition, const std::string& message) {
  if (!condition) throw ContractViolation(message);
}
}  // namespace detail

}  // namespace iir
