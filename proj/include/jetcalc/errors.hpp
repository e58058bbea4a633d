#pragma once

#include <stdexcept>
#include <string>

namespace jetcalc {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed or inconsistent input data (shapes, symmetry, file contents).
class InputError : public Error {
 public:
  using Error::Error;
};

/// A value outside the domain where an operation is defined.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Leading reparametrization coefficient is zero.
class SingularJetError : public DomainError {
 public:
  using DomainError::DomainError;
};

/// An integer count does not fit the result type.
class OverflowError : public DomainError {
 public:
  using DomainError::DomainError;
};

/// Weighted-degree precondition violated (non-homogeneous or degree zero).
class DegreeError : public InputError {
 public:
  using InputError::InputError;
};

/// A jet order exceeds the declared budget.
class OrderOverflowError : public InputError {
 public:
  using InputError::InputError;
};

}  // namespace jetcalc
