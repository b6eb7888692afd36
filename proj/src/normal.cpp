#include "bw/normal.hpp"
#include "bw/errors.hpp"

#include <cmath>
#include <numbers>

namespace bw {

namespace {

constexpr double kLogSqrt2Pi = 0.91893853320467274178032973640562;  // log sqrt(2 pi)
constexpr double kInvSqrt2Pi = 0.39894228040143267793994605993438;
constexpr double kSqrtHalfPi = 1.25331413731550025120788264240552;  // sqrt(pi/2)
const long double kSqrtHalfPiL = 1.25331413731550025120788264240552818698L;

// Asymptotic series R(x) ~ sum (-1)^j (2j-1)!! x^-(2j+1); for x >= 100 the
// truncation floor is far below double precision after ~30 terms.
long double mills_series(long double x) {
    long double sum = 0.0L, dfac = 1.0L, xpow = 1.0L / x, sign = 1.0L;
    const long double inv_x2 = 1.0L / (x * x);
    for (int j = 0; j <= 30; ++j) {
        const long double term = sign * dfac * xpow;
        sum += term;
        dfac *= 2.0L * j + 1.0L;
        xpow *= inv_x2;
        sign = -sign;
        if (dfac * xpow < 1e-22L * sum) break;
    }
    return sum;
}

long double mills_erfc(long double x) {
    // R(x) = sqrt(pi/2) erfc(x/sqrt 2) exp(x^2/2); safe in long double
    // for x up to ~140, used only for x < 100.
    return kSqrtHalfPiL * erfcl(x / 1.41421356237309504880168872420969808L)
         * expl(0.5L * x * x);
}

long double mills_any(long double x) {
    return x < 100.0L ? mills_erfc(x) : mills_series(x);
}

}  // namespace

double norm_pdf(double x) { return kInvSqrt2Pi * std::exp(-0.5 * x * x); }

double log_norm_pdf(double x) { return -0.5 * x * x - kLogSqrt2Pi; }

double norm_cdf(double x) {
    return 0.5 * std::erfc(-x * std::numbers::sqrt2 / 2.0);
}

double mills_ratio(double x) {
    if (x < 0.0) throw DomainError("mills_ratio: x must be >= 0");
    return static_cast<double>(mills_any(static_cast<long double>(x)));
}

double log_norm_cdf(double x) {
    if (x >= -8.0) return std::log(norm_cdf(x));
    // Phi(x) = phi(x) R(-x) for x < 0
    return log_norm_pdf(x) + std::log(static_cast<double>(mills_any(-static_cast<long double>(x))));
}

double mills_ratio_diff(double x, double s) {
    if (x < 0.0 || s < 0.0) throw DomainError("mills_ratio_diff: need x >= 0, s >= 0");
    if (s == 0.0) return 0.0;
    if (x >= 30.0) {
        // Asymptotic series R(y) ~ sum_j (-1)^j (2j-1)!! y^-(2j+1), differenced
        // term by term: x^-m - (x+s)^-m = x^-m * (-expm1(-m log1p(s/x))).
        // Each term is positive and stable; truncation error is below the
        // first omitted term of the series for R itself.
        const double l1p = std::log1p(s / x);
        double sum = 0.0;
        double dfac = 1.0;       // (2j-1)!!
        double xpow = 1.0 / x;   // x^-(2j+1)
        double sign = 1.0;
        const double inv_x2 = 1.0 / (x * x);
        for (int j = 0; j <= 24; ++j) {
            const double m = 2.0 * j + 1.0;
            const double term = sign * dfac * xpow * (-std::expm1(-m * l1p));
            sum += term;
            dfac *= m;  // (2j-1)!! -> (2j+1)!!
            xpow *= inv_x2;
            sign = -sign;
            if (dfac * xpow < 1e-20 * sum) break;
        }
        return sum;
    }
    const long double a = mills_erfc(static_cast<long double>(x));
    const long double b = mills_any(static_cast<long double>(x) + static_cast<long double>(s));
    return static_cast<double>(a - b);
}

namespace {

// Wichura AS241 (PPND16) coefficients.
constexpr double A0 = 3.3871328727963666080e0, A1 = 1.3314166789178437745e2,
                 A2 = 1.9715909503065514427e3, A3 = 1.3731693765509461125e4,
                 A4 = 4.5921953931549871457e4, A5 = 6.7265770927008700853e4,
                 A6 = 3.3430575583588128105e4, A7 = 2.5090809287301226727e3;
constexpr double B1 = 4.2313330701600911252e1, B2 = 6.8718700749205790830e2,
                 B3 = 5.3941960214247511077e3, B4 = 2.1213794301586595867e4,
                 B5 = 3.9307895800092710610e4, B6 = 2.8729085735721942674e4,
                 B7 = 5.2264952788528545610e3;
constexpr double C0 = 1.42343711074968357734e0, C1 = 4.63033784615654529590e0,
                 C2 = 5.76949722146069140550e0, C3 = 3.64784832476320460504e0,
                 C4 = 1.27045825245236838258e0, C5 = 2.41780725177450611770e-1,
                 C6 = 2.27238449892691845833e-2, C7 = 7.74545014278341407640e-4;
constexpr double D1 = 2.05319162663775882187e0, D2 = 1.67638483018380384940e0,
                 D3 = 6.89767334985100004550e-1, D4 = 1.48103976427480074590e-1,
                 D5 = 1.51986665636164571966e-2, D6 = 5.47593808499534494600e-4,
                 D7 = 1.05075007164441684324e-9;
constexpr double E0 = 6.65790464350110377720e0, E1 = 5.46378491116411436990e0,
                 E2 = 1.78482653991729133580e0, E3 = 2.96560571828504891230e-1,
                 E4 = 2.65321895265761230930e-2, E5 = 1.24266094738807843860e-3,
                 E6 = 2.71155556874348757815e-5, E7 = 2.01033439929228813265e-7;
constexpr double F1 = 5.99832206555887937690e-1, F2 = 1.36929880922735805310e-1,
                 F3 = 1.48753612908506148525e-2, F4 = 7.86869131145613259100e-4,
                 F5 = 1.84631831751005468180e-5, F6 = 1.42151175831644588870e-7,
                 F7 = 2.04426310338993978564e-15;

double ppnd16_central(double q) {
    const double r = 0.180625 - q * q;
    return q *
        (((((((A7 * r + A6) * r + A5) * r + A4) * r + A3) * r + A2) * r + A1) * r + A0) /
        (((((((B7 * r + B6) * r + B5) * r + B4) * r + B3) * r + B2) * r + B1) * r + 1.0);
}

// Tail branch from r = sqrt(-log p_tail); returns the positive quantile.
double ppnd16_tail(double r) {
    if (r <= 5.0) {
        const double s = r - 1.6;
        return (((((((C7 * s + C6) * s + C5) * s + C4) * s + C3) * s + C2) * s + C1) * s + C0) /
               (((((((D7 * s + D6) * s + D5) * s + D4) * s + D3) * s + D2) * s + D1) * s + 1.0);
    }
    const double s = r - 5.0;
    return (((((((E7 * s + E6) * s + E5) * s + E4) * s + E3) * s + E2) * s + E1) * s + E0) /
           (((((((F7 * s + F6) * s + F5) * s + F4) * s + F3) * s + F2) * s + F1) * s + 1.0);
}

// Newton polish in log space: full machine accuracy even where the
// rational approximation is past its fitted range (r > 27).
double polish_tail(double x, double log_p) {
    for (int it = 0; it < 3; ++it) {
        const double f = log_norm_cdf(x) - log_p;
        const double step = f * static_cast<double>(mills_any(-static_cast<long double>(x)));
        x -= step;
        if (std::abs(step) < 1e-14 * std::abs(x)) break;
    }
    return x;
}

}  // namespace

double inv_norm_cdf(double p) {
    if (!(p > 0.0 && p < 1.0)) throw DomainError("inv_norm_cdf: p must lie in (0,1)");
    const double q = p - 0.5;
    if (std::abs(q) <= 0.425) return ppnd16_central(q);
    const double pt = q < 0.0 ? p : 1.0 - p;
    const double r = std::sqrt(-std::log(pt));
    double x = ppnd16_tail(r);
    if (r > 26.0) x = -polish_tail(-x, std::log(pt));
    return q < 0.0 ? -x : x;
}

double inv_norm_cdf_log(double log_p) {
    if (!(log_p < 0.0)) throw DomainError("inv_norm_cdf_log: log_p must be < 0");
    if (log_p > -3.0) {
        // Not a deep lower tail; fall back on the plain path (p is
        // representable, and the upper tail needs 1-p anyway).
        const double p = std::exp(log_p);
        return inv_norm_cdf(p);
    }
    const double r = std::sqrt(-log_p);
    double x = -ppnd16_tail(r);
    if (r > 26.0) x = polish_tail(x, log_p);
    return x;
}

}  // namespace bw
