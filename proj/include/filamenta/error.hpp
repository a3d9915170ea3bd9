#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace filamenta {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Non-finite coordinates, NaN grid cells, malformed parameters.
class InvalidInput : public Error {
public:
    using Error::Error;
};

/// A geometric query was made outside the domain it is defined on.
class DomainError : public Error {
public:
    using Error::Error;
};

class DegenerateTriangle : public Error {
public:
    using Error::Error;
};

class UnsupportedRegion : public Error {
public:
    using Error::Error;
};

class ParseError : public Error {
public:
    ParseError(const std::string& source, std::size_t line, const std::string& what)
        : Error(source + ":" + std::to_string(line) + ": " + what), line_(line) {}

    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

} // namespace filamenta
