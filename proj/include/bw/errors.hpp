#pragma once

#include <stdexcept>
#include <string>

namespace bw {

/// Base class for every exception thrown by this library.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Argument outside the mathematical domain of the operation.
struct DomainError : Error { using Error::Error; };

/// Option price violates static no-arbitrage bounds, so no vol can match it.
struct ArbitrageError : Error { using Error::Error; };

/// Option price sits at (or numerically indistinguishable from) its upper
/// no-arbitrage boundary, where the implied vol diverges.
struct BoundaryError : Error { using Error::Error; };

/// Covariance input is not symmetric positive definite, or is so
/// ill-conditioned that downstream linear algebra would be meaningless.
struct MatrixError : Error { using Error::Error; };

/// Iterative optimization (simplex QP, saddle search, root solve) failed
/// to reach its convergence target.
struct OptimizationError : Error { using Error::Error; };

/// A required exponential moment of the time change does not exist;
/// the model cannot be made a martingale.
struct MomentError : Error { using Error::Error; };

/// Numerical integration failed its accuracy target or its tail bound.
struct IntegrationError : Error { using Error::Error; };

/// A closed-form expansion was requested outside its validity regime.
struct RegimeError : Error { using Error::Error; };

/// Malformed run configuration file.
struct ConfigError : Error { using Error::Error; };

}  // namespace bw
