#pragma once

#include <stdexcept>
#include <string>

namespace diraclab {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class InvalidArgument : public Error {
public:
    using Error::Error;
};

/// Quadrature or iteration failed to reach its tolerance.
class NumericFailure : public Error {
public:
    NumericFailure(const std::string& what, double best_estimate = 0.0)
        : Error(what), best_estimate_(best_estimate) {}
    double best_estimate() const noexcept { return best_estimate_; }

private:
    double best_estimate_;
};

class OutOfInjectivity : public Error {
public:
    using Error::Error;
};

class OutOfNeighbourhood : public Error {
public:
    using Error::Error;
};

class InvalidGraph : public Error {
public:
    using Error::Error;
};

class SamplingFailure : public Error {
public:
    using Error::Error;
};

class UnsupportedDegree : public Error {
public:
    using Error::Error;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

}  // namespace diraclab
