#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace kemeny {

/// Base class for every error thrown by the library. The CLI maps the
/// concrete subclasses onto process exit codes.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Bad user input: malformed files, invalid edges, out-of-range arguments.
class InputError : public Error {
public:
    using Error::Error;
};

class ParseError : public InputError {
public:
    ParseError(std::size_t line, const std::string& what)
        : InputError("line " + std::to_string(line) + ": " + what), line_(line) {}

    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

class EmptyGraphError : public InputError {
public:
    using InputError::InputError;
};

class InvalidEdgeError : public InputError {
public:
    using InputError::InputError;
};

class DuplicateEdgeError : public InputError {
public:
    using InputError::InputError;
};

class EdgeNotFoundError : public InputError {
public:
    using InputError::InputError;
};

/// Raised when an operation would leave (or finds) the graph disconnected.
class ConnectivityError : public InputError {
public:
    using InputError::InputError;
};

/// cut-link found no replacement edge: the cut edge is a bridge.
class BridgeError : public ConnectivityError {
public:
    using ConnectivityError::ConnectivityError;
};

class InvalidArgumentError : public InputError {
public:
    using InputError::InputError;
};

/// A size guard of a dense or exhaustive routine was exceeded.
class CapacityError : public Error {
public:
    using Error::Error;
};

class ConvergenceError : public Error {
public:
    using Error::Error;
};

class CorruptIndexError : public Error {
public:
    using Error::Error;
};

}  // namespace kemeny
