#pragma once

#include <complex>
#include <stdexcept>
#include <string>

namespace pscat {

/// Base class of every error raised by the toolkit.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Input outside the mathematical domain of an operation (r = 0, x on a scatterer, ...).
class DomainError : public Error {
public:
    using Error::Error;
};

/// Malformed or invariant-violating input (schemas, Hermiticity, exclusions).
class ValidationError : public Error {
public:
    using Error::Error;
};

/// det P^{-1}(z) numerically zero: z sits on a resonance or bound state.
class NearResonance : public Error {
public:
    NearResonance(const std::string& what, std::complex<double> z, std::complex<double> det,
                  double condition)
        : Error(what), z_(z), det_(det), condition_(condition) {}

    std::complex<double> z() const { return z_; }
    std::complex<double> det() const { return det_; }
    double condition() const { return condition_; }

private:
    std::complex<double> z_;
    std::complex<double> det_;
    double condition_;
};

/// Plane data does not cover the region a quadrature needs.
class CoverageError : public Error {
public:
    using Error::Error;
};

/// Linear stage of the fit cannot determine some P entries.
class RankDeficient : public Error {
public:
    using Error::Error;
};

/// Filesystem failures, always carrying the offending path.
class IoError : public Error {
public:
    using Error::Error;
};

}  // namespace pscat
