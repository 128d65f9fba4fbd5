#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace somkit {

/// Base class for every error raised on bad input, parameters or files.
/// The CLI maps these to exit code 2; anything else is an internal error.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class InputError : public Error {
public:
    using Error::Error;
};

/// Vector or matrix dimensions disagree.
class ShapeError : public Error {
public:
    using Error::Error;
};

/// Coordinate or index outside its valid range.
class BoundsError : public Error {
public:
    using Error::Error;
};

class ParameterError : public Error {
public:
    using Error::Error;
};

/// A value is outside a function's mathematical domain (e.g. cosine of a zero vector).
class DomainError : public Error {
public:
    using Error::Error;
};

/// The model layout does not support the request (e.g. second BMU on a 1-neuron grid).
class ConfigurationError : public Error {
public:
    using Error::Error;
};

/// A metric is undefined for the given partition.
class MetricError : public Error {
public:
    using Error::Error;
};

class ParseError : public Error {
public:
    ParseError(const std::string& what, std::size_t offset)
        : Error(what + " (at byte offset " + std::to_string(offset) + ")"), offset_(offset) {}

    std::size_t offset() const noexcept { return offset_; }

private:
    std::size_t offset_;
};

class VersionError : public Error {
public:
    using Error::Error;
};

class ValidationError : public Error {
public:
    using Error::Error;
};

}  // namespace somkit
