#pragma once

/// Black-Scholes pricing and implied volatility at zero interest rate,
/// plus the model-free tail-wing formulas that translate extreme-strike
/// option prices into implied vols.
///
/// Two parallel entry points exist throughout: plain prices for ordinary
/// strikes, and log-prices for the deep wings where the prices themselves
/// underflow double (a put at log-strike -20 can be exp(-5000)).

namespace bw {

enum class OptionKind { call, put };

struct OptionQuote {
    double spot;
    double strike;
    double maturity;
    double price;
    OptionKind kind;
};

/// European price at zero rate. sigma >= 0; sigma == 0 returns intrinsic.
double bs_price(double spot, double strike, double sigma, double maturity,
                OptionKind kind);

/// log of the OTM-side price on unit spot: put struck at exp(-k) or call
/// struck at exp(+k), k >= 0. Accurate for k up to the thousands.
double bs_log_put_unit(double k, double sigma, double maturity);
double bs_log_call_unit(double k, double sigma, double maturity);

/// Implied volatility from a quote. Price tolerance 1e-12, vol tolerance
/// 1e-10 (compiled in). Throws ArbitrageError outside static bounds.
double implied_vol(const OptionQuote& quote);

/// Implied volatility from a log-price on unit spot, OTM side only:
/// kind==put means strike exp(-k), kind==call means strike exp(+k).
double implied_vol_from_log(OptionKind kind, double k, double log_price,
                            double maturity);

/// psi(u) = 2 - 4 (sqrt(u^2+u) - u), the tail-wing slope transform.
/// Strictly decreasing on [0, inf), psi(0) = 2, psi(inf) = 0. Evaluated
/// through the reciprocal form 2 / (sqrt(u+1) + sqrt(u))^2 for u > 1,
/// which is cancellation-free in the far regime.
double psi(double u);

/// Zero-order wing formula: implied vol at strike K < 1/e from the log of
/// a put-price proxy at that strike.
double iv_zero_order(double strike, double maturity, double log_put);

/// First-order refinement; adds the slowly varying correction factor
/// inside both radicals.
double iv_first_order(double strike, double maturity, double log_put);

}  // namespace bw
