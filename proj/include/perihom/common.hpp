/// @file common.hpp
/// @brief Shared scalar typedef, error hierarchy, and small numeric helpers.
#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace perihom {

using Real = double;

/// Base class for all library errors.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// Malformed expression source (carries a byte offset into the source text).
class ParseError : public Error {
public:
    ParseError(const std::string& what, std::size_t offset)
        : Error(what + " (at byte " + std::to_string(offset) + ")"), offset_(offset) {}
    std::size_t offset() const { return offset_; }

private:
    std::size_t offset_;
};

/// Evaluation hit a domain fault (log of nonpositive, division by zero, ...).
class DomainEvalError : public Error {
public:
    DomainEvalError(const std::string& what, std::size_t offset)
        : Error(what + " (expression byte " + std::to_string(offset) + ")"), offset_(offset) {}
    std::size_t offset() const { return offset_; }

private:
    std::size_t offset_;
};

/// Bad run configuration (CLI exit code 2).
class ConfigError : public Error {
public:
    using Error::Error;
};

/// Centering condition violated and no force flag (CLI exit code 3).
class CenteringError : public Error {
public:
    using Error::Error;
};

/// Numerical failure: residual, positivity, or ellipticity (CLI exit code 4).
class NumericalError : public Error {
public:
    using Error::Error;
};

/// Requested resolution cannot support the computation.
class ResolutionError : public NumericalError {
public:
    using NumericalError::NumericalError;
};

/// Two redundant computations of the same quantity disagree.
class ConsistencyError : public NumericalError {
public:
    using NumericalError::NumericalError;
};

constexpr Real kPi = 3.14159265358979323846264338327950288;
constexpr Real kTwoPi = 2.0 * kPi;

}  // namespace perihom
