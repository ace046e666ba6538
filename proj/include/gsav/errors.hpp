#ifndef GSAV_ERRORS_HPP
#define GSAV_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace gsav {

/// Base class for all library errors.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct GridMismatch : Error {
    using Error::Error;
};

/// Input to the zero-mean inverse Laplacian carries a nonzero mean.
struct NonZeroMean : Error {
    using Error::Error;
};

/// a + symbol(k) <= 0 for some wavenumber in a diagonal solve.
struct SingularMode : Error {
    using Error::Error;
};

/// Argument outside the domain of a forward transform G.
struct DomainError : Error {
    using Error::Error;
};

/// Argument outside the range of G (domain of G^{-1}).
struct RangeError : Error {
    using Error::Error;
};

struct SingularDerivative : Error {
    using Error::Error;
};

/// A potential was evaluated outside its admissible set (e.g. |phi| >= 1
/// for the logarithmic potential). Carries the first offending index.
struct OutOfDomain : Error {
    long index;
    OutOfDomain(const std::string& msg, long idx) : Error(msg), index(idx) {}
};

struct NewtonDiverged : Error {
    double best_x;
    double best_residual;
    int iters;
    NewtonDiverged(const std::string& msg, double x, double res, int it)
        : Error(msg), best_x(x), best_residual(res), iters(it) {}
};

struct JacobianSingular : Error {
    using Error::Error;
};

struct DenominatorNearZero : Error {
    using Error::Error;
};

struct MissingHistory : Error {
    using Error::Error;
};

struct StallError : Error {
    using Error::Error;
};

struct UnsupportedModel : Error {
    using Error::Error;
};

struct InsufficientSamples : Error {
    using Error::Error;
};

struct ConfigError : Error {
    using Error::Error;
};

struct IoError : Error {
    using Error::Error;
};

struct NonFiniteField : Error {
    using Error::Error;
};

}  // namespace gsav

#endif
