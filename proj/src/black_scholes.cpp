#include "bw/black_scholes.hpp"
#include "bw/errors.hpp"
#include "bw/normal.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace bw {

namespace {

constexpr double kPriceTol = 1e-12;  // compiled-in inversion tolerances
constexpr double kVolTol = 1e-10;

void check_market_inputs(double spot, double strike, double maturity) {
    if (!(spot > 0.0) || !std::isfinite(spot)) throw DomainError("bs: spot must be finite and > 0");
    if (!(strike > 0.0) || !std::isfinite(strike))
        throw DomainError("bs: strike must be finite and > 0");
    if (!(maturity > 0.0) || !std::isfinite(maturity))
        throw DomainError("bs: maturity must be finite and > 0");
}

// OTM log-price on unit spot; x = k/s - s/2 is the distance-to-exercise.
// For x >= 0 the price is phi(x+s) * (R(x) - R(x+s)) for the put wing and
// phi(x) * (R(x) - R(x+s)) for the call wing; otherwise (near the money)
// the plain formula in extended precision is accurate.
double log_wing(double k, double sigma, double maturity, OptionKind kind) {
    if (!(k >= 0.0)) throw DomainError("bs_log_price: k must be >= 0");
    if (!(sigma > 0.0)) throw DomainError("bs_log_price: sigma must be > 0");
    if (!(maturity > 0.0)) throw DomainError("bs_log_price: maturity must be > 0");
    const double s = sigma * std::sqrt(maturity);
    const double x = k / s - 0.5 * s;
    if (x >= 0.0) {
        const double d1 = kind == OptionKind::put ? x + s : x;
        return log_norm_pdf(d1) + std::log(mills_ratio_diff(x, s));
    }
    const long double sq2 = 1.41421356237309504880168872420969808L;
    if (kind == OptionKind::put) {
        // P = K Phi(-d2) - Phi(-d1), K = exp(-k), d2 = x, d1 = x + s
        const long double p = expl(static_cast<long double>(-k)) * 0.5L *
                                  erfcl(static_cast<long double>(x) / sq2) -
                              0.5L * erfcl((static_cast<long double>(x) + s) / sq2);
        return static_cast<double>(logl(p));
    }
    // C = Phi(d1) - K Phi(d2), K = exp(+k), d1 = -x, d2 = -x - s
    const long double c = 0.5L * erfcl(static_cast<long double>(x) / sq2) -
                          expl(static_cast<long double>(k)) * 0.5L *
                              erfcl((static_cast<long double>(x) + s) / sq2);
    return static_cast<double>(logl(c));
}

}  // namespace

double bs_log_put_unit(double k, double sigma, double maturity) {
    return log_wing(k, sigma, maturity, OptionKind::put);
}

double bs_log_call_unit(double k, double sigma, double maturity) {
    return log_wing(k, sigma, maturity, OptionKind::call);
}

double bs_price(double spot, double strike, double sigma, double maturity,
                OptionKind kind) {
    check_market_inputs(spot, strike, maturity);
    if (sigma < 0.0) throw DomainError("bs_price: sigma must be >= 0");
    const double intrinsic = kind == OptionKind::call ? std::max(spot - strike, 0.0)
                                                      : std::max(strike - spot, 0.0);
    if (sigma == 0.0) return intrinsic;
    const double m = std::log(strike / spot);
    if (kind == OptionKind::call) {
        if (m >= 0.0) return spot * std::exp(bs_log_call_unit(m, sigma, maturity));
        // ITM call via parity with the OTM put
        return spot * std::exp(bs_log_put_unit(-m, sigma, maturity)) + spot - strike;
    }
    if (m <= 0.0) return spot * std::exp(bs_log_put_unit(-m, sigma, maturity));
    return spot * std::exp(bs_log_call_unit(m, sigma, maturity)) + strike - spot;
}

double implied_vol_from_log(OptionKind kind, double k, double log_price,
                            double maturity) {
    if (!(k >= 0.0)) throw DomainError("implied_vol_from_log: k must be >= 0");
    if (!(maturity > 0.0)) throw DomainError("implied_vol_from_log: maturity must be > 0");
    if (!std::isfinite(log_price)) throw DomainError("implied_vol_from_log: bad price");
    const double upper = kind == OptionKind::put ? -k : 0.0;  // price < K, resp. < spot
    if (log_price >= upper)
        throw ArbitrageError("implied_vol_from_log: price outside static bounds");

    auto model = [&](double sig) { return log_wing(k, sig, maturity, kind); };
    double lo = 1e-9, hi = 1.0;
    while (model(hi) < log_price) {
        hi *= 2.0;
        if (hi > 1e3)
            throw BoundaryError("implied_vol_from_log: price at its upper bound, vol diverges");
    }
    if (model(lo) > log_price) return lo;  // price below the sigma=1e-9 price: clip
    double sig = std::min(hi, std::max(lo, std::sqrt(2.0 * std::max(k, 0.1) / maturity) /
                                               std::max(1.0, std::sqrt(-log_price))));
    for (int it = 0; it < 200; ++it) {
        const double lp = model(sig);
        const double f = lp - log_price;
        if (std::abs(f) < kPriceTol) return sig;
        if (f > 0.0) hi = sig; else lo = sig;
        // d log P / d sigma = vega / price, with vega = phi(d1) sqrt(T)
        const double s = sig * std::sqrt(maturity);
        const double x = k / s - 0.5 * s;
        const double d1 = kind == OptionKind::put ? x + s : -x;
        const double log_dlogp = log_norm_pdf(d1) + 0.5 * std::log(maturity) - lp;
        const double step = f * std::exp(-log_dlogp);
        double next = sig - step;
        if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
        if (std::abs(next - sig) < kVolTol) return next;
        sig = next;
    }
    throw OptimizationError("implied_vol_from_log: did not converge");
}

double implied_vol(const OptionQuote& quote) {
    check_market_inputs(quote.spot, quote.strike, quote.maturity);
    const double intrinsic = quote.kind == OptionKind::call
                                 ? std::max(quote.spot - quote.strike, 0.0)
                                 : std::max(quote.strike - quote.spot, 0.0);
    if (!std::isfinite(quote.price)) throw DomainError("implied_vol: price must be finite");
    const double upper = quote.kind == OptionKind::call ? quote.spot : quote.strike;
    if (quote.price == upper)
        throw BoundaryError("implied_vol: price at its upper bound, vol diverges");
    if (!(quote.price >= intrinsic) || !(quote.price < upper))
        throw ArbitrageError("implied_vol: price outside static bounds");
    if (quote.price == intrinsic) return 0.0;

    // Reduce to the OTM side on unit spot via parity, then invert in log space.
    const double m = std::log(quote.strike / quote.spot);
    double otm_price;
    OptionKind otm_kind;
    if (quote.kind == OptionKind::call) {
        otm_kind = m >= 0.0 ? OptionKind::call : OptionKind::put;
        otm_price = m >= 0.0 ? quote.price : quote.price - (quote.spot - quote.strike);
    } else {
        otm_kind = m <= 0.0 ? OptionKind::put : OptionKind::call;
        otm_price = m <= 0.0 ? quote.price : quote.price - (quote.strike - quote.spot);
    }
    if (!(otm_price > 0.0))
        throw ArbitrageError("implied_vol: price outside static bounds");
    return implied_vol_from_log(otm_kind, std::abs(m),
                                std::log(otm_price / quote.spot), quote.maturity);
}

double psi(double u) {
    if (!(u >= 0.0)) throw DomainError("psi: u must be >= 0");
    if (u <= 1.0) return 2.0 - 4.0 * (std::sqrt(u * u + u) - u);
    const double r = std::sqrt(u + 1.0) + std::sqrt(u);
    return 2.0 / (r * r);
}

namespace {

struct WingTerms {
    double l_inv;    // log(1/P)
    double l_ratio;  // log(K/P)
    double loglog;   // log log(K/P)
};

WingTerms wing_terms(double strike, double maturity, double log_put) {
    if (!(strike > 0.0) || !(maturity > 0.0))
        throw DomainError("wing formula: strike and maturity must be > 0");
    if (strike >= std::exp(-1.0))
        throw RegimeError("wing formula: strike must lie below 1/e");
    if (!(log_put < std::log(strike)))
        throw ArbitrageError("wing formula: put proxy must be below strike");
    WingTerms t;
    t.l_inv = -log_put;
    t.l_ratio = std::log(strike) - log_put;
    t.loglog = std::log(t.l_ratio);
    return t;
}

}  // namespace

double iv_zero_order(double strike, double maturity, double log_put) {
    const WingTerms t = wing_terms(strike, maturity, log_put);
    const double a1 = t.l_inv - 0.5 * t.loglog;
    const double a2 = t.l_ratio - 0.5 * t.loglog;
    if (!(a1 >= 0.0) || !(a2 >= 0.0))
        throw RegimeError("iv_zero_order: outside asymptotic regime");
    return std::sqrt(2.0 / maturity) * (std::sqrt(a1) - std::sqrt(a2));
}

double iv_first_order(double strike, double maturity, double log_put) {
    const WingTerms t = wing_terms(strike, maturity, log_put);
    // log B = log(sqrt(L1) - sqrt(L2)) - log(2 sqrt(pi) sqrt(L1)); the root
    // difference is evaluated as -log K / (sqrt(L1) + sqrt(L2)).
    const double root_sum = std::sqrt(t.l_inv) + std::sqrt(t.l_ratio);
    const double root_diff = -std::log(strike) / root_sum;
    const double log_b = std::log(root_diff) -
                         std::log(2.0 * std::sqrt(std::numbers::pi)) -
                         0.5 * std::log(t.l_inv);
    const double a1 = t.l_inv - 0.5 * t.loglog + log_b;
    const double a2 = t.l_ratio - 0.5 * t.loglog + log_b;
    if (!(a1 >= 0.0) || !(a2 >= 0.0))
        throw RegimeError("iv_first_order: outside asymptotic regime");
    return std::sqrt(2.0 / maturity) * (std::sqrt(a1) - std::sqrt(a2));
}

}  // namespace bw
