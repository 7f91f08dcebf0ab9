#pragma once

#include <stdexcept>
#include <string>

namespace survmax {

/// Argument outside the mathematical domain of an operation.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Adaptive quadrature ran out of subdivisions before meeting its tolerance.
class QuadratureError : public std::runtime_error {
 public:
  QuadratureError(const std::string& what, double best_estimate, double achieved_error)
      : std::runtime_error(what), best_estimate_(best_estimate), achieved_error_(achieved_error) {}

  double best_estimate() const noexcept { return best_estimate_; }
  double achieved_error() const noexcept { return achieved_error_; }

 private:
  double best_estimate_;
  double achieved_error_;
};

/// Root finding was asked for a target the bracket does not enclose.
class BracketError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// The model puts (numerically) zero mass on an event a formula divides by.
class DegenerateModelError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Too few Monte Carlo replications satisfied a conditioning event.
class InsufficientDataError : public std::runtime_error {
 public:
  InsufficientDataError(const std::string& what, long achieved)
      : std::runtime_error(what), achieved_(achieved) {}
  long achieved() const noexcept { return achieved_; }

 private:
  long achieved_;
};

/// Malformed input file. `line` is 1-based and counts the header.
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, long line) : std::runtime_error(what), line_(line) {}
  long line() const noexcept { return line_; }

 private:
  long line_;
};

/// A caller asked for something the method does not support, e.g. a null
/// model that is not a member of the null hypothesis.
class MisuseError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

}  // namespace survmax
