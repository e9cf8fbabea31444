#pragma once

#include <stdexcept>
#include <string>

namespace rtnc {

// Base class for all library errors.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Bad arguments: overlapping source sets, index overflow, mismatched field sizes.
class ArgumentError : public Error {
public:
    using Error::Error;
};

// A demanded flow/rate/decomposition cannot exist on this graph.
class InfeasibleError : public Error {
public:
    using Error::Error;
};

// A codec received something its contract forbids (missing message, bad pair).
class ProtocolViolation : public Error {
public:
    using Error::Error;
};

// Internal consistency failure; carries a diagnostic dump when available.
class InternalError : public Error {
public:
    using Error::Error;
};

class ParseError : public Error {
public:
    ParseError(int line, const std::string& what)
        : Error("line " + std::to_string(line) + ": " + what), line_(line) {}
    int line() const { return line_; }

private:
    int line_;
};

}  // namespace rtnc
