#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace persistx {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class InvalidArgument : public Error {
public:
    using Error::Error;
};

class DimensionMismatch : public InvalidArgument {
public:
    using InvalidArgument::InvalidArgument;
};

/// A density was requested from a law with atoms (Rademacher).
class RequestedDensityOfAtomicLaw : public Error {
public:
    using Error::Error;
};

/// Crude Monte Carlo lost every replicate before the first horizon.
class AllPathsDied : public Error {
public:
    using Error::Error;
};

/// Every splitting particle died in a single transition.
class PopulationExtinct : public Error {
public:
    PopulationExtinct(const std::string& what, std::size_t step)
        : Error(what), step_(step) {}
    std::size_t step() const noexcept { return step_; }

private:
    std::size_t step_;
};

class NonPositiveProbabilityInWindow : public Error {
public:
    using Error::Error;
};

class BracketNotFound : public Error {
public:
    using Error::Error;
};

class UnsupportedInitialLaw : public Error {
public:
    using Error::Error;
};

/// Malformed experiment or suite configuration. `line` is 1-based, 0 if unknown.
class ConfigError : public Error {
public:
    ConfigError(const std::string& what, std::size_t line = 0)
        : Error(line ? what + " (line " + std::to_string(line) + ")" : what), line_(line) {}
    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

} // namespace persistx
