#pragma once

#include <stdexcept>
#include <string>

namespace renewal {

/// Failure of a numerical procedure (overflow, non-convergence of an
/// eigensolver or integrator, ...). Distinct from contract violations,
/// which use std::invalid_argument / std::domain_error.
class NumericError : public std::runtime_error {
public:
    explicit NumericError(const std::string& what) : std::runtime_error(what) {}
};

/// An iterative solver ran out of iterations; carries the final residual.
class IterationLimitError : public NumericError {
public:
    IterationLimitError(const std::string& what, double residual)
        : NumericError(what), residual(residual) {}
    double residual;
};

/// A state vector claimed to be an equilibrium has inconsistent node ratios.
class NotAnEquilibriumError : public NumericError {
public:
    NotAnEquilibriumError(const std::string& what, double spread)
        : NumericError(what), spread(spread) {}
    double spread;
};

/// A trajectory shows no usable oscillation (fewer than 3 mean crossings).
class NotPeriodicError : public NumericError {
public:
    explicit NotPeriodicError(const std::string& what) : NumericError(what) {}
};

/// A resolvent-type solve was requested too close to a pole of the resolvent.
class NearPoleError : public NumericError {
public:
    NearPoleError(const std::string& what, double rcond)
        : NumericError(what), rcond(rcond) {}
    double rcond;
};

}  // namespace renewal
