#pragma once

/// Subordinated basket models: the time-change laws (gamma, inverse
/// Gaussian, tabulated) with their Laplace transforms and martingale
/// compensators, the leading-order wing formulas driven by the saddle
/// constant c*, and a seeded Monte Carlo tail diagnostic that checks the
/// two-sided exponential tail bounds on simulated terminal values.

#include "bw/lognormal_asymptotics.hpp"
#include "bw/rng.hpp"

#include <cstdint>
#include <vector>

namespace bw {

enum class TimeChangeFamily { gamma, inverse_gaussian, tabulated };

/// Piecewise-linear density table on an increasing abscissa grid, plus the
/// declared tail envelope rho_T(s) ~ tail_c * s^tail_alpha * e^{-tail_theta s}
/// in the two-sided-bound sense (the constant may drift by a bounded factor).
struct TabulatedDensity {
    std::vector<double> s;    // strictly increasing, s.front() in [0, 1]
    std::vector<double> rho;  // nonnegative density values
    double tail_theta = 0.0;
    double tail_alpha = 0.0;
    double tail_c = 0.0;
};

struct TimeChangeSpec {
    TimeChangeFamily family = TimeChangeFamily::gamma;
    double c = 0.0;            // gamma / inverse Gaussian scale parameter
    double lambda_rate = 0.0;  // gamma / inverse Gaussian rate parameter
    double maturity = 1.0;
    double tail_theta = 0.0;  // exponential decay rate of the tau_T density
    double tail_alpha = 0.0;  // polynomial exponent of the tau_T density
    TabulatedDensity table;   // tabulated family only
    std::vector<double> cdf;  // tabulated only: normalized trapezoid CDF
};

TimeChangeSpec make_gamma_timechange(double c, double lambda_rate,
                                     double maturity);
TimeChangeSpec make_ig_timechange(double c, double lambda_rate,
                                  double maturity);

/// Validates a tabulated law. Checks: unit mass within 1e-6 (trapezoid);
/// the declared sandwich c1 s^a e^{-th s} <= rho(s) <= c2 s^a e^{-th s}
/// at the grid nodes inside [1, s_dec] with bounded ratio c2/c1 <= 100 and
/// tail_c inside [c1, c2], where s_dec = min(50, point where the envelope
/// has decayed by 1e-12 from its maximum on s >= 1); the grid must start
/// at or below s = 1 and reach s_dec. Densities that stop short (e.g. a
/// near-deterministic spike) are rejected with DomainError.
TimeChangeSpec make_tabulated_timechange(TabulatedDensity table,
                                         double maturity);

/// Density of tau_T at s > 0; linear interpolation for the tabulated
/// family (zero outside the grid).
double timechange_density(const TimeChangeSpec& tc, double s);

/// E[e^{-s tau_T}]. Closed form for gamma and inverse Gaussian; exact
/// integration of the linear interpolant, with segments below 1e-16 of
/// the integrand maximum truncated, for tabulated. s at or below the
/// negated tail rate (divergent transform) raises DomainError.
double laplace_transform(const TimeChangeSpec& tc, double s);

/// One draw of tau_T.
double sample_timechange(const TimeChangeSpec& tc, CounterRng& rng);

/// Martingale compensator for one asset: -log E[e^{a tau_T}] with
/// a = mu_i + var_ii / 2. Requires the moment condition
/// tail_theta > mu_i + var_ii / 2, else MomentError.
double martingale_drift(const TimeChangeSpec& tc, double mu_i, double var_ii);

/// Time-changed basket. The embedded basket supplies weights, covariance
/// and its Cholesky factor; the Black-Scholes drift field of the basket is
/// not used here (compensators live in mu_tilde).
struct TcBasketSpec {
    BasketSpec basket;
    std::vector<double> mu;        // per-asset time-change drift
    std::vector<double> mu_tilde;  // filled by make_tc_basket
    TimeChangeSpec timechange;
};

/// Builds the model: checks the per-asset moment condition
/// tail_theta > mu_i + B_ii/2, requires matching maturities, and fills
/// mu_tilde so every asset price has unit expectation at maturity.
TcBasketSpec make_tc_basket(BasketSpec basket, std::vector<double> mu,
                            TimeChangeSpec timechange);

/// Terminal basket value for one draw: tau from the subordinator and z
/// the n standard normals (negated when antithetic is set). Shared by the
/// tail diagnostic below and the Monte Carlo oracles.
double tc_terminal_value(const TcBasketSpec& spec, double tau, const double* z,
                         bool antithetic);

struct TcWing {
    double coefficient;  // I(k) ~ coefficient * sqrt(k) as k -> infinity
    double rate;         // c* (left wing) or c_min (right wing)
    double t_bar;        // saddle time argument; 0 for the right wing
};

/// Left-wing leading coefficient sqrt(psi(c*) / T) with c* from the
/// min-max saddle over (t, simplex weights).
TcWing tc_leftwing_leading(const TcBasketSpec& spec);

/// Right-wing leading coefficient sqrt(psi(c_min) / T) with
/// c_min = min_i (sqrt(2 theta B_ii + mu_i^2) - mu_i) / B_ii.
TcWing tc_rightwing_leading(const TcBasketSpec& spec);

struct TailSandwichEntry {
    double k = 0.0;
    std::uint64_t hits = 0;
    double log_prob = 0.0;     // log(hits / paths); -inf when hits == 0
    double std_err_log = 0.0;  // delta-method error of log_prob
    bool usable = false;
};

/// Tail diagnostic summary. The fitted slope of -log P[S <= e^{-k}]
/// against k is compared with c*; the residual after removing c* k is
/// summarized by an implied log-correction exponent alpha_hat, which the
/// theory confines to [tail_alpha - n, tail_alpha] up to the unknown
/// sandwich constants. band_margin is the 3-sigma Monte Carlo allowance
/// on alpha_hat.
struct TailSandwichReport {
    std::vector<TailSandwichEntry> entries;
    std::uint64_t paths = 0;
    double c_star = 0.0;
    double fitted_slope = 0.0;   // NaN if fewer than two usable entries
    double slope_rel_dev = 0.0;  // |fitted_slope - c_star| / c_star
    double residual_alpha = 0.0; // alpha_hat; NaN if fewer than two usable
    double band_lo = 0.0;        // tail_alpha - n
    double band_hi = 0.0;        // tail_alpha
    double band_margin = 0.0;
    bool within_band = false;
    bool insufficient_paths = false;  // some entry had zero hits
};

/// Plain (untilted) tail counting of P[S_T <= e^{-k}] on every k in the
/// grid, parallel over 65536-path blocks with per-block substreams; the
/// report is bitwise deterministic given (spec, k_grid, paths, seed).
/// Requires every k >= 5 (asymptotic regime).
TailSandwichReport tail_sandwich_check(const TcBasketSpec& spec,
                                       const std::vector<double>& k_grid,
                                       std::uint64_t mc_paths,
                                       std::uint64_t seed);

}  // namespace bw
