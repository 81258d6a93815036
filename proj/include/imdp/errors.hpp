#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace imdp {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Syntax or semantic error in a model, spec, strategy or LP document.
class ParseError : public Error {
public:
    ParseError(const std::string& message, std::size_t line, std::size_t column)
        : Error(std::to_string(line) + ":" + std::to_string(column) + ": " + message),
          line_(line), column_(column), bare_(message) {}

    std::size_t line() const { return line_; }
    std::size_t column() const { return column_; }
    const std::string& bare_message() const { return bare_; }

private:
    std::size_t line_;
    std::size_t column_;
    std::string bare_;
};

/// A configured enumeration or search limit was hit.
class CapExceeded : public Error {
public:
    using Error::Error;
};

/// Interval row whose polytope is empty.
class InfeasibleRow : public Error {
public:
    using Error::Error;
};

class NonConvergence : public Error {
public:
    using Error::Error;
};

/// Reward values are unbounded (target not reached almost surely).
class Divergence : public Error {
public:
    using Error::Error;
};

/// LP/MILP backend failure: numerical trouble, external process errors, bad output.
class SolverError : public Error {
public:
    using Error::Error;
};

/// A synthesized strategy failed independent verification. Always an encoding bug.
class VerificationFailure : public Error {
public:
    using Error::Error;
};

} // namespace imdp
