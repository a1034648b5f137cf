#ifndef SOR_ERRORS_HPP
#define SOR_ERRORS_HPP

#include <cstddef>
#include <stdexcept>
#include <string>

namespace sor {

/// A system row violates the splitting preconditions (missing or zero
/// diagonal, unsorted columns).
class InvalidSystem : public std::invalid_argument {
public:
  InvalidSystem(std::size_t row, const std::string& what)
      : std::invalid_argument("row " + std::to_string(row) + ": " + what),
        row_(row) {}

  std::size_t row() const noexcept { return row_; }

private:
  std::size_t row_;
};

/// An iterate component overflowed to inf/nan. For mesh sweeps `col` is
/// set; for vector iterates only `row` (the component index) is meaningful.
class NonFiniteError : public std::runtime_error {
public:
  explicit NonFiniteError(std::size_t index)
      : std::runtime_error("non-finite value at component " +
                           std::to_string(index)),
        row_(index), col_(0) {}
  NonFiniteError(std::size_t row, std::size_t col)
      : std::runtime_error("non-finite value at cell (" + std::to_string(row) +
                           ", " + std::to_string(col) + ")"),
        row_(row), col_(col) {}

  std::size_t row() const noexcept { return row_; }
  std::size_t col() const noexcept { return col_; }

private:
  std::size_t row_;
  std::size_t col_;
};

class ConvergenceError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

} // namespace sor

#endif
