#pragma once

#include <stdexcept>
#include <string>

namespace odecert {

// Base class for all library errors.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// Shape mismatch between operands (non-square input, incompatible dimensions).
class DimensionError : public Error {
public:
    using Error::Error;
};

// An iterative method exhausted its iteration budget or failed a residual check.
class ConvergenceError : public Error {
public:
    using Error::Error;
};

// A documented precondition of an operation was violated by the caller.
class ContractError : public Error {
public:
    using Error::Error;
};

// The requested certificate cannot be built for this input (e.g. F not Hurwitz).
// This is an expected analysis outcome, not a bug.
class NotApplicableError : public Error {
public:
    using Error::Error;
};

// Expression evaluation left the domain of a primitive (division by zero,
// sqrt of a negative number, overflow to non-finite).
class DomainError : public Error {
public:
    using Error::Error;
};

// Malformed user input (degenerate box, bad resolution, unreadable file).
class InputError : public Error {
public:
    using Error::Error;
};

// Syntax or semantic error in a system-definition document.
class ParseError : public Error {
public:
    ParseError(const std::string& what, int line, int column)
        : Error(what + " (line " + std::to_string(line) + ", column " +
                std::to_string(column) + ")"),
          line_(line),
          column_(column) {}

    int line() const { return line_; }
    int column() const { return column_; }

private:
    int line_;
    int column_;
};

// The parsed system violates the standing hypothesis f(0) = 0.
class EquilibriumError : public Error {
public:
    using Error::Error;
};

} // namespace odecert
