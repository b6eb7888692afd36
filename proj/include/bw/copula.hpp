#pragma once

/// Dependence layer for the basket wings.
///
/// The left wing of a basket is governed by how strongly the components
/// crash together.  That strength is captured by the weak lower tail
/// dependence function chi(alpha), defined through the limit of
/// min_i log u^{alpha_i} / log C(u^{alpha_1}, ..., u^{alpha_n}) as u -> 0.
/// chi is scale-invariant in alpha and sits in (0, 1]: chi = 1 means the
/// components crash as one (the basket tail is the fattest marginal tail),
/// smaller chi means joint crashes are rarer and the basket tail thinner.
///
/// This module provides chi in closed form for the three tractable copula
/// families, a ladder-extrapolated numeric estimator straight from the
/// definition, and the two wing maps that turn marginal tails plus chi
/// into an implied-volatility wing slope. The right wing needs no copula
/// at all; it is driven by the single fattest marginal.

#include "bw/linalg.hpp"

#include <cstddef>
#include <functional>
#include <vector>

namespace bw {

/// Copula evaluated at a point of [0,1]^n.
using CopulaFn = std::function<double(const std::vector<double>&)>;

enum class CopulaFamily { gaussian, archimedean, strong_dependence, numeric };

/// Which dependence model to consult, with its parameters. Closed-form
/// families carry scalars / a correlation matrix; `numeric` carries an
/// evaluator for the ladder estimator.
struct CopulaSpec {
    CopulaFamily family = CopulaFamily::gaussian;
    Mat correlation;            // gaussian: symmetric, unit diagonal, invertible
    double lambda = 1.0;        // archimedean: regular-variation index of log phi^{-1}
    double lambda_lower = 1.0;  // strong dependence: lim C(u,...,u)/u, in (0,1]
    CopulaFn evaluator;         // numeric
};

/// chi for a Gaussian copula with correlation matrix R:
///     chi = max_i alpha_i * min_{w in simplex} w' Sigma w,
///     Sigma_ij = R_ij / sqrt(alpha_i alpha_j).
/// Internally alpha is normalized to max = 1 (the result is invariant,
/// the conditioning is not). Throws MatrixError when Sigma is too close
/// to singular for the simplex QP, DomainError on bad R or alpha.
double chi_gaussian(const Mat& correlation, const std::vector<double>& alpha);

/// chi for an Archimedean copula whose generator satisfies
/// log phi^{-1} regularly varying with index lambda > 0:
///     chi = max(alpha) / (sum_i alpha_i^{1/lambda})^lambda.
double chi_archimedean(double lambda, const std::vector<double>& alpha);

/// chi under strong lower tail dependence (lim C(u,...,u)/u = lambda_lower
/// with lambda_lower > 0): identically 1, for any alpha. The declared
/// coefficient must lie in (0, 1]; C(u,...,u) <= u forces the upper end.
double chi_strong_dependence(double lambda_lower = 1.0);

/// Dispatch over the closed-form families. `numeric` is rejected here;
/// use chi_numeric with the evaluator instead.
double chi_closed_form(const CopulaSpec& spec, const std::vector<double>& alpha);

/// Outcome of the ladder estimator. `ratio[j]` is the definition's
/// quotient at rung `u[j]`; rungs the evaluator could not support
/// (underflow to zero) are dropped and flagged via `truncated`.
struct ChiEstimate {
    double estimate = 0.0;
    std::vector<double> u;      // rungs actually used, decreasing
    std::vector<double> ratio;  // min_i log u^{alpha_i} / log C(...) per rung
    bool truncated = false;     // ladder cut short by evaluator underflow
    bool converged = false;     // increment test on the last rung pair
};

/// Estimate chi from the definition on a decreasing ladder of u values.
/// Convergence of the raw quotient is only logarithmic, so the estimate
/// is extrapolated: 1/ratio is fitted as b + a/log(1/u) on the last three
/// rungs and 1/b is reported. The converged flag clears when the observed
/// jump between the last two rungs exceeds ten times the jump the fit
/// predicts. Ladder must lie in (0, 0.1], strictly decreasing.
ChiEstimate chi_numeric(const CopulaFn& copula, const std::vector<double>& alpha,
                        const std::vector<double>& u_ladder);

/// Spot-check the copula boundary behavior of a numeric evaluator in
/// dimension n: C vanishes when any coordinate is 0, and C restricted to
/// one free coordinate (others pinned at 1) is the identity. Throws
/// DomainError on violation.
void validate_numeric_copula(const CopulaFn& copula, std::size_t n);

enum class TailSide { left, right };

/// Marginal tail description entering the left-wing map: weights eta_i
/// with log G_i(-k) ~ eta_i log G(-k) against a common reference tail G,
/// where G is described by its exponential slope -log G(-k)/k. The two
/// standing hypotheses of the wing theorem (a negative exponential moment
/// and regular variation of -log G_i) cannot be verified from finitely
/// many samples; the caller asserts them explicitly and the flags are
/// recorded here.
struct MarginalTailSpec {
    std::vector<double> eta;          // positive tail weights
    double g_slope = 1.0;             // -log G(-k)/k of the reference tail
    TailSide side = TailSide::left;
    bool exponential_moment = false;  // E[e^{-eps Y_i}] < infinity asserted
    bool regularly_varying = false;   // -log G_i in R_alpha asserted
};

/// Left-wing implied volatility at log-strike -k:
///     I(-k) = sqrt( (k/T) * psi( g_slope * max_i eta_i / chi ) ).
/// Throws DomainError when the psi argument would be negative (an
/// increasing reference tail), when the hypothesis flags are not
/// asserted, or when the spec describes the right tail.
double tailwing_left(const MarginalTailSpec& marginals, double chi,
                     double maturity, double k);

/// Right-wing implied volatility at log-strike k from per-asset tail
/// slopes -log Gbar_i(k)/k:
///     I(k) = sqrt( (k/T) * psi( min_i slope_i ) ).
/// The fattest marginal (smallest slope) governs; no copula enters.
/// Caller is responsible for the moment condition E[e^{(1+eps) Y_i}] < inf.
double tailwing_right(const std::vector<double>& marginal_slopes,
                      double maturity, double k);

/// Left-wing slope of the implied variance for a basket of NIG marginals
/// with parameters (alpha_i, beta_i), alpha_i > |beta_i| > 0, coupled by a
/// Gaussian copula with correlation R:
///     psi( 1 / min_{w in simplex} w' Sigma w ),
///     Sigma_ij = R_ij / sqrt((alpha_i - beta_i)(alpha_j - beta_j)).
/// Here the tail weights alpha_i - beta_i carry absolute meaning (the
/// reference tail is e^{-k}), so no normalization is applied.
double nig_slope(const Mat& correlation, const std::vector<double>& alpha,
                 const std::vector<double>& beta);

/// P[Z1 <= a, Z2 <= b] for a standard bivariate normal pair with
/// correlation rho. Evaluated by conditioning on the first coordinate and
/// integrating in log space, so the RELATIVE accuracy (~1e-9) survives far
/// into the joint tail where absolute-accuracy algorithms return noise.
/// Backbone of the n = 2 numeric-chi cross checks.
double bivariate_normal_cdf(double a, double b, double rho);

}  // namespace bw
