#ifndef RACO_ERRORS_HPP
#define RACO_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace raco {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// A ProblemInstance field is out of its physical range.
class InvalidInstance : public Error {
public:
  using Error::Error;
};

/// A positive load has to be carried over a zero rate (or zero CPU speed).
class DegenerateInput : public Error {
public:
  using Error::Error;
};

/// No strictly feasible starting point could be constructed.
class InfeasibleInstance : public Error {
public:
  using Error::Error;
};

/// The dense barrier solver ran out of Newton iterations.
class InnerSolverStall : public Error {
public:
  using Error::Error;
};

/// Malformed configuration text. Carries the 1-based line number (0 when the
/// error is not tied to a line, e.g. a missing key).
class ParseError : public Error {
public:
  ParseError(const std::string& what, int line)
      : Error(line > 0 ? "line " + std::to_string(line) + ": " + what : what),
        line_(line) {}
  int line() const noexcept { return line_; }

private:
  int line_;
};

/// A value carried a unit suffix that is unknown or wrong for its quantity.
class UnitError : public ParseError {
public:
  using ParseError::ParseError;
};

} // namespace raco

#endif // RACO_ERRORS_HPP
