#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace tpdo {

/// Bad input: malformed expressions, out-of-range parameters, inconsistent grids.
/// The CLI maps these to exit status 1.
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A computation that was well posed but could not be carried out
/// (size guards, non-convergence, unresolved symbols). CLI exit status 2.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ParseError : public ValidationError {
 public:
  ParseError(const std::string& what, std::size_t position)
      : ValidationError(what + " at offset " + std::to_string(position)), position_(position) {}
  std::size_t position() const noexcept { return position_; }

 private:
  std::size_t position_;
};

/// Division by zero, log of zero or a non-finite result while evaluating a symbol.
class DomainError : public NumericalError {
 public:
  DomainError(const std::string& what, std::size_t position)
      : NumericalError(what + " at offset " + std::to_string(position)), position_(position) {}
  std::size_t position() const noexcept { return position_; }

 private:
  std::size_t position_;
};

class DegenerateBallError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class GuardError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class SpectralTailError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class OutOfTableError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class NonConvergenceError : public NumericalError {
 public:
  NonConvergenceError(const std::string& what, double gap)
      : NumericalError(what + " (final relative gap " + std::to_string(gap) + ")"), gap_(gap) {}
  double gap() const noexcept { return gap_; }

 private:
  double gap_;
};

}  // namespace tpdo
