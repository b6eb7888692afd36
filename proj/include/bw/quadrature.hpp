#pragma once

#include <functional>
#include <vector>

namespace bw {

/// log(sum(exp(v))) over a vector of log-quantities; -inf entries allowed.
double logsumexp(const std::vector<double>& v);

/// log(exp(a) + exp(b)).
double logaddexp(double a, double b);

/// Gauss-Hermite rule for integrals against exp(-t^2) on the real line.
/// Weights are kept in log form: for n in the hundreds the extreme nodes
/// sit beyond |t| = 26 where the plain weights underflow double.
struct GaussHermite {
    std::vector<double> nodes;        // ascending, symmetric about 0
    std::vector<double> log_weights;  // log w_i
};

/// Nodes by sign-bracketed bisection on the orthonormal recurrence (robust
/// for n in the hundreds, where Newton stalls near p_{n-1} zeros), weights
/// by the Christoffel sum with overflow-safe rescaling. Cached; thread-safe.
const GaussHermite& gauss_hermite(int n);

/// Gauss-Legendre rule on (-1, 1). Orders stay modest (<= a few hundred),
/// so plain weights never underflow.
struct GaussLegendre {
    std::vector<double> nodes;    // ascending, symmetric about 0
    std::vector<double> weights;
};

/// Newton on the Legendre recurrence from the cosine initial guess.
/// Cached per order; thread-safe.
const GaussLegendre& gauss_legendre(int q);

/// Integrand given as y -> log f(y), with f >= 0. Entries may be -inf.
using LogFn = std::function<double(double)>;

/// Adaptive Gauss-Kronrod (7-15) integration of a positive integrand given
/// in log form, on a finite interval. Returns log of the integral.
/// Throws IntegrationError if the local error targets cannot be met.
double log_integrate(const LogFn& f_log, double a, double b, double rel_tol);

/// Integral over (-inf, b] (dir < 0) or [a, +inf) (dir > 0) by geometric
/// panel doubling with a tail-decay stopping bound; log of the integral.
/// Throws IntegrationError when the tail fails to decay (moment blow-up).
double log_integrate_semi(const LogFn& f_log, double endpoint, int dir,
                          double rel_tol, double first_width = 1.0);

}  // namespace bw
