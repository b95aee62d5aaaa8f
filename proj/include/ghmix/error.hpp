#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace ghmix {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An argument lies outside the domain of a function (non-positive scale,
/// non-finite order, ...).
class DomainError : public Error {
 public:
  using Error::Error;
};

/// A scale matrix could not be factorized as symmetric positive-definite.
class SingularMatrixError : public Error {
 public:
  using Error::Error;
};

/// A density or likelihood evaluated to a non-finite value.
class NonFiniteError : public Error {
 public:
  NonFiniteError(const std::string& what, std::size_t observation, std::size_t component)
      : Error(what), observation_(observation), component_(component) {}
  explicit NonFiniteError(const std::string& what) : Error(what) {}

  std::size_t observation() const { return observation_; }
  std::size_t component() const { return component_; }

 private:
  std::size_t observation_ = static_cast<std::size_t>(-1);
  std::size_t component_ = static_cast<std::size_t>(-1);
};

/// The joint location/skewness update has a vanishing denominator.
class DegenerateDenominatorError : public Error {
 public:
  DegenerateDenominatorError(const std::string& what, std::size_t component)
      : Error(what), component_(component) {}
  std::size_t component() const { return component_; }

 private:
  std::size_t component_;
};

/// A component's expected membership fell below the configured minimum.
class EmptyComponentError : public Error {
 public:
  EmptyComponentError(const std::string& what, std::size_t component)
      : Error(what), component_(component) {}
  std::size_t component() const { return component_; }

 private:
  std::size_t component_;
};

/// Malformed input file.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t line) : Error(what), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

}  // namespace ghmix
