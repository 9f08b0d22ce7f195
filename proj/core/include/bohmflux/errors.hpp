#ifndef BOHMFLUX_ERRORS_HPP
#define BOHMFLUX_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace bohmflux {

/// Bad inputs: non-positive widths, malformed grids, missing config keys.
/// CLI maps these to exit code 2.
class InvalidParameterError : public std::runtime_error {
public:
    explicit InvalidParameterError(const std::string& what)
        : std::runtime_error(what) {}
};

/// Numerical-check failures at run time (quadrature non-convergence,
/// box overflow, node proximity, step underflow). CLI maps these to exit 3.
class NumericalError : public std::runtime_error {
public:
    explicit NumericalError(const std::string& what)
        : std::runtime_error(what) {}
};

class ResolutionError : public NumericalError {
public:
    explicit ResolutionError(const std::string& what) : NumericalError(what) {}
};

class BoxOverflowError : public NumericalError {
public:
    explicit BoxOverflowError(const std::string& what) : NumericalError(what) {}
};

class NodeProximityError : public NumericalError {
public:
    explicit NodeProximityError(const std::string& what) : NumericalError(what) {}
};

class QuadratureError : public NumericalError {
public:
    explicit QuadratureError(const std::string& what) : NumericalError(what) {}
};

class EnvelopeFailureError : public NumericalError {
public:
    explicit EnvelopeFailureError(const std::string& what) : NumericalError(what) {}
};

}

#endif
