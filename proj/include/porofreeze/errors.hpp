#pragma once

#include <stdexcept>
#include <string>

namespace porofreeze {

/// Base class of every exception thrown by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A parameter is outside its admissible range (negative radius, non-monotone map, ...).
class InvalidParameter : public Error {
public:
    using Error::Error;
};

/// Two objects that must agree (bank vs. grid, field vs. mesh) do not.
class InvalidState : public Error {
public:
    using Error::Error;
};

/// A problem setup that cannot be solved (e.g. elasticity without Dirichlet support).
class InvalidSetup : public Error {
public:
    using Error::Error;
};

/// A discrete scheme produced a value contradicting one of its structural guarantees.
class SchemeViolation : public Error {
public:
    using Error::Error;
};

/// Plastic flow direction with infinite dissipation (trace flow on an unbounded cylinder).
class FlaggedInconsistency : public Error {
public:
    using Error::Error;
};

/// A nonlinear sub-solve did not converge; the stepper may retry with a smaller step.
class StepFailure : public Error {
public:
    using Error::Error;
};

/// Malformed configuration text; line and column are 1-based (0 when unknown).
class ParseError : public Error {
public:
    ParseError(const std::string& what, int line = 0, int column = 0)
        : Error(line > 0 ? std::to_string(line) + ":" + std::to_string(column) + ": " + what : what),
          line_(line),
          column_(column)
    {
    }

    int line() const { return line_; }
    int column() const { return column_; }

private:
    int line_;
    int column_;
};

class InternalError : public Error {
public:
    using Error::Error;
};

}  // namespace porofreeze
