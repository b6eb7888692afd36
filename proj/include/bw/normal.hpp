#pragma once

/// Normal-distribution kernels accurate far into the tails.
///
/// Everything downstream (deep-wing option prices, implied vols at
/// log-strike 20 and beyond, tail probabilities near 1e-300 in log space)
/// leans on these four building blocks:
///
///   * norm_cdf / log_norm_cdf     Phi(x) and log Phi(x), the latter valid
///                                 for x as low as -1e6 via the Mills ratio.
///   * mills_ratio                 R(x) = (1 - Phi(x)) / phi(x).
///   * mills_ratio_diff            R(x) - R(x+s) without cancellation; this
///                                 is the heart of log-space option pricing.
///   * inv_norm_cdf                Wichura's PPND16 rational approximation,
///                                 with a log-argument entry point for
///                                 quantiles of probabilities like 1e-5000.

namespace bw {

/// Standard normal density.
double norm_pdf(double x);

/// log of the standard normal density.
double log_norm_pdf(double x);

/// Standard normal CDF. Relative accuracy ~1e-15 for x > -37,
/// underflows to 0 below x ~ -38.6 (use log_norm_cdf there).
double norm_cdf(double x);

/// log Phi(x), finite for all representable x (down to -1e154 or so).
/// For x >= -8 evaluated directly; below that via the Mills ratio
/// asymptotics, relative accuracy ~1e-14 throughout.
double log_norm_cdf(double x);

/// Mills ratio R(x) = Phi(-x)/phi(x) for x >= 0.
/// erfc-based for x < 30, continued fraction beyond.
double mills_ratio(double x);

/// R(x) - R(x+s) for x >= 0, s >= 0, computed without catastrophic
/// cancellation. For x >= 30 uses per-term stable differences of the
/// asymptotic series; below that, extended-precision erfc.
double mills_ratio_diff(double x, double s);

/// Inverse standard normal CDF (PPND16). p in (0,1).
double inv_norm_cdf(double p);

/// Inverse standard normal CDF from log(p), for p far below double range.
/// Returns x with log Phi(x) = log_p; log_p must be < 0.
double inv_norm_cdf_log(double log_p);

}  // namespace bw
