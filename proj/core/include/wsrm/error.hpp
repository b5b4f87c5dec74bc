#pragma once

#include <stdexcept>
#include <string>

namespace wsrm {

// Base of every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed input: bad dimensions, invalid values, unparsable files.
class InputError : public Error {
 public:
  using Error::Error;
};

class DimensionError : public InputError {
 public:
  using InputError::InputError;
};

// Channel matrix does not have full column rank (zero-forcing infeasible).
class RankDeficientError : public InputError {
 public:
  using InputError::InputError;
};

// A point left the open domain of a barrier function.
class DomainError : public Error {
 public:
  using Error::Error;
};

class SingularMatrixError : public Error {
 public:
  using Error::Error;
};

// Iterative solver hit its iteration cap before meeting its tolerance.
class ConvergenceError : public Error {
 public:
  using Error::Error;
};

// Backtracking step size underflowed.
class LineSearchError : public ConvergenceError {
 public:
  using ConvergenceError::ConvergenceError;
};

class InfeasibleError : public Error {
 public:
  using Error::Error;
};

}  // namespace wsrm
