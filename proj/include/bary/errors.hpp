#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace bary {

/// Base of every error raised by the toolkit.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Precondition violated by the caller (bad dimension, index, grammar, ...).
class ArgumentError : public Error {
 public:
  using Error::Error;
};

/// A symmetric operator failed the semidefiniteness certificate an
/// operation requires.
class DefinitenessError : public Error {
 public:
  using Error::Error;
};

/// Operation is only defined on pure hyperbolic spaces.
class UnsupportedSpaceError : public Error {
 public:
  using Error::Error;
};

/// Non-finite or otherwise unusable floating point value.
class NumericError : public Error {
 public:
  using Error::Error;
};

/// Ill-conditioned Hessian during a Newton solve.
class ConditioningError : public Error {
 public:
  using Error::Error;
};

/// An iterative method hit its iteration cap.
class ConvergenceError : public Error {
 public:
  using Error::Error;
};

/// ConvergenceError that also hands back the best iterate found.
template <class Iterate>
class ConvergenceErrorWith : public ConvergenceError {
 public:
  ConvergenceErrorWith(const std::string& what, Iterate best)
      : ConvergenceError(what), best_(std::move(best)) {}

  const Iterate& best() const { return best_; }

 private:
  Iterate best_;
};

/// A checked property (inequality, identity) failed on some sample.
/// `sample` holds a serialized record sufficient to reproduce it.
class PropertyFailure : public Error {
 public:
  PropertyFailure(const std::string& what, std::string sample)
      : Error(what), sample_(std::move(sample)) {}

  const std::string& sample() const { return sample_; }

 private:
  std::string sample_;
};

}  // namespace bary
