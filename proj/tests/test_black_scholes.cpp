#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "bw/black_scholes.hpp"
#include "bw/errors.hpp"
#include "bw/normal.hpp"

#include <cmath>
#include <vector>

using namespace bw;

namespace {

// Independent normal CDF oracle: Phi(x) = 1/2 + phi(x) sum x^(2n+1)/(2n+1)!!,
// evaluated in extended precision. Converges fast for |x| <= 8.
long double phi_oracle(long double x) {
    return expl(-0.5L * x * x) / sqrtl(2.0L * 3.14159265358979323846264338327950288L);
}

long double norm_cdf_oracle(long double x) {
    long double term = x, sum = x;
    for (int n = 1; n < 300; ++n) {
        term *= x * x / (2.0L * n + 1.0L);
        sum += term;
        if (fabsl(term) < 1e-25L * fabsl(sum)) break;
    }
    return 0.5L + phi_oracle(x) * sum;
}

// Composite Simpson on the lognormal payoff integral, independent of the
// library quadrature. Good to ~1e-12 for moderate strikes.
double simpson_put(double strike, double sigma, double maturity) {
    const int n = 20000;
    const double s = sigma * std::sqrt(maturity);
    const double lo = -12.0 * s - 0.5 * s * s, hi = std::log(strike);
    const double h = (hi - lo) / n;
    long double acc = 0.0L;
    for (int i = 0; i <= n; ++i) {
        const double y = lo + h * i;
        const double z = (y + 0.5 * s * s) / s;
        const long double f = (strike - std::exp(y)) * phi_oracle(z) / s;
        acc += f * (i == 0 || i == n ? 1.0L : (i % 2 ? 4.0L : 2.0L));
    }
    return static_cast<double>(acc * h / 3.0L);
}

}  // namespace

TEST_CASE("normal cdf against series oracle") {
    for (double x = -8.0; x <= 8.0; x += 0.37) {
        const double ref = static_cast<double>(norm_cdf_oracle(x));
        CHECK(norm_cdf(x) == doctest::Approx(ref).epsilon(5e-15));
    }
}

TEST_CASE("log normal cdf deep tail") {
    CHECK(log_norm_cdf(-40.0) == doctest::Approx(-804.6084420137537882).epsilon(1e-14));
    CHECK(log_norm_cdf(-100.0) == doctest::Approx(-5005.524208694205089).epsilon(1e-14));
    CHECK(log_norm_cdf(-1000.0) == doctest::Approx(-500007.8266948121843).epsilon(1e-14));
    // consistency with the direct value where both paths work
    for (double x : {-8.5, -10.0, -20.0, -36.0}) {
        const double direct = std::log(static_cast<double>(
            erfcl(-static_cast<long double>(x) / 1.414213562373095049L) / 2.0L));
        CHECK(log_norm_cdf(x) == doctest::Approx(direct).epsilon(1e-13));
    }
}

TEST_CASE("mills ratio values and branch continuity") {
    CHECK(mills_ratio(1.0) == doctest::Approx(0.6556795424187984715).epsilon(1e-14));
    CHECK(mills_ratio(5.0) == doctest::Approx(0.1928081047153157649).epsilon(1e-14));
    CHECK(mills_ratio(35.0) == doctest::Approx(0.02854816184350926890).epsilon(1e-14));
    CHECK(mills_ratio(99.5) == doctest::Approx(0.01004923641248054486).epsilon(1e-14));
    CHECK(mills_ratio(150.0) == doctest::Approx(0.006666370409867766791).epsilon(1e-14));
    // erfc/asymptotic-series handover near x = 100: the two evaluations of
    // nearly the same point must agree to the series truncation floor
    const double below = mills_ratio(std::nextafter(100.0, 0.0));
    const double above = mills_ratio(100.0);
    CHECK(std::abs(below - above) < 1e-14 * below);
    CHECK_THROWS_AS(mills_ratio(-0.1), DomainError);
}

TEST_CASE("mills ratio difference is cancellation-free") {
    CHECK(mills_ratio_diff(5.0, 0.6) ==
          doctest::Approx(0.01945781970229552789).epsilon(1e-13));
    CHECK(mills_ratio_diff(35.0, 0.3) ==
          doctest::Approx(0.0002422294325528450732).epsilon(1e-13));
    CHECK(mills_ratio_diff(35.0, 1e-3) ==
          doctest::Approx(8.143122677653831066e-7).epsilon(1e-13));
    CHECK(mills_ratio_diff(60.0, 2.0) ==
          doctest::Approx(0.0005372012593566309817).epsilon(1e-13));
    CHECK(mills_ratio_diff(120.0, 0.7) ==
          doctest::Approx(4.831918398377309018e-5).epsilon(1e-13));
    CHECK(mills_ratio_diff(12.0, 0.0) == 0.0);
    // extended-precision / differenced-series handover at x = 30: compare
    // nearly identical arguments across the branch, slope is O(diff)
    const double b0 = mills_ratio_diff(std::nextafter(30.0, 0.0), 0.5);
    const double b1 = mills_ratio_diff(30.0, 0.5);
    CHECK(std::abs(b0 - b1) < 1e-12 * b1);
}

TEST_CASE("inverse normal cdf round trips") {
    for (double p : {1e-300, 1e-100, 1e-20, 1e-5, 0.01, 0.3, 0.5, 0.7, 0.99,
                     1.0 - 1e-10}) {
        const double x = inv_norm_cdf(p);
        CHECK(log_norm_cdf(x) == doctest::Approx(std::log(p)).epsilon(1e-12));
    }
    for (double lp : {-5000.0, -50000.0, -5e6, -30.0, -2.0}) {
        const double x = inv_norm_cdf_log(lp);
        CHECK(log_norm_cdf(x) == doctest::Approx(lp).epsilon(1e-11));
    }
    CHECK_THROWS_AS(inv_norm_cdf(0.0), DomainError);
    CHECK_THROWS_AS(inv_norm_cdf(1.0), DomainError);
    CHECK_THROWS_AS(inv_norm_cdf_log(0.5), DomainError);
}

TEST_CASE("bs price against frozen references and quadrature") {
    CHECK(bs_price(1.0, 0.9, 0.3, 1.0, OptionKind::put) ==
          doctest::Approx(0.07012879901849712603).epsilon(1e-13));
    CHECK(bs_price(1.0, 1.0, 0.2, 1.0, OptionKind::put) ==
          doctest::Approx(0.07965567455405796293).epsilon(1e-13));
    CHECK(bs_price(1.0, 1.2, 0.3, 1.0, OptionKind::call) ==
          doctest::Approx(0.05440563467814306390).epsilon(1e-13));
    CHECK(bs_price(1.0, 0.9, 0.3, 1.0, OptionKind::put) ==
          doctest::Approx(simpson_put(0.9, 0.3, 1.0)).epsilon(1e-10));
    CHECK(bs_price(1.0, 0.6, 0.45, 2.0, OptionKind::put) ==
          doctest::Approx(simpson_put(0.6, 0.45, 2.0)).epsilon(1e-10));
    // spot scaling and parity
    CHECK(bs_price(100.0, 90.0, 0.3, 1.0, OptionKind::put) ==
          doctest::Approx(100.0 * 0.07012879901849712603).epsilon(1e-13));
    const double c = bs_price(1.0, 0.9, 0.3, 1.0, OptionKind::call);
    const double p = bs_price(1.0, 0.9, 0.3, 1.0, OptionKind::put);
    CHECK(c - p == doctest::Approx(0.1).epsilon(1e-14));
    CHECK(bs_price(1.0, 0.7, 0.0, 1.0, OptionKind::put) == 0.0);
    CHECK(bs_price(1.0, 1.3, 0.0, 1.0, OptionKind::put) == doctest::Approx(0.3));
    CHECK_THROWS_AS(bs_price(1.0, -1.0, 0.2, 1.0, OptionKind::put), DomainError);
    CHECK_THROWS_AS(bs_price(1.0, 1.0, 0.2, 0.0, OptionKind::put), DomainError);
}

TEST_CASE("log wing prices reach extreme strikes") {
    CHECK(bs_log_put_unit(2.0, 0.25, 1.0) ==
          doctest::Approx(-39.51625019474775353).epsilon(1e-13));
    CHECK(bs_log_put_unit(20.0, 0.2, 1.0) ==
          doctest::Approx(-5021.744015713382705).epsilon(1e-13));
    CHECK(bs_log_put_unit(200.0, 0.2, 1.0) ==
          doctest::Approx(-500116.3488899935926).epsilon(1e-13));
    CHECK(bs_log_put_unit(20.0, 0.2, 2.5) ==
          doctest::Approx(-2020.377523825520590).epsilon(1e-13));
    CHECK(bs_log_call_unit(8.0, 0.3, 1.0) ==
          doctest::Approx(-360.2607124264944843).epsilon(1e-13));
    // agreement with the plain price where it is representable
    CHECK(bs_log_put_unit(2.0, 0.25, 1.0) ==
          doctest::Approx(std::log(bs_price(1.0, std::exp(-2.0), 0.25, 1.0,
                                            OptionKind::put))).epsilon(1e-12));
    // smooth across the near-money / wing branch switch (x = 0 at k = s^2/2):
    // a branch seam would show up as a kink in the second difference
    const double s2 = 0.5 * 0.25 * 0.25, h = 1e-4;
    const double second_diff = bs_log_put_unit(s2 + h, 0.25, 1.0) -
                               2.0 * bs_log_put_unit(s2, 0.25, 1.0) +
                               bs_log_put_unit(s2 - h, 0.25, 1.0);
    CHECK(std::abs(second_diff) < 1e-6);
}

TEST_CASE("implied vol round trips and error taxonomy") {
    CHECK(implied_vol({1.0, 1.0, 1.0, bs_price(1.0, 1.0, 0.35, 1.0, OptionKind::call),
                       OptionKind::call}) == doctest::Approx(0.35).epsilon(1e-10));
    for (double sig : {0.05, 0.2, 0.6, 1.5}) {
        for (double ks : {0.4, 0.8, 1.0, 1.3, 3.0}) {
            for (OptionKind kind : {OptionKind::put, OptionKind::call}) {
                const double px = bs_price(1.0, ks, sig, 0.7, kind);
                const double intrinsic = kind == OptionKind::put
                                             ? std::max(ks - 1.0, 0.0)
                                             : std::max(1.0 - ks, 0.0);
                // a quote carries no vol information once the time value
                // drowns in the quote's own floating-point granularity
                if (px - intrinsic < 1e-10 * std::max(1.0, px)) continue;
                const double iv = implied_vol({1.0, ks, 0.7, px, kind});
                CHECK(iv == doctest::Approx(sig).epsilon(1e-9));
            }
        }
    }
    CHECK_THROWS_AS(implied_vol({1.0, 0.9, 1.0, 0.95, OptionKind::put}), ArbitrageError);
    CHECK_THROWS_AS(implied_vol({1.0, 0.9, 1.0, 1.2, OptionKind::call}), ArbitrageError);
    CHECK_THROWS_AS(implied_vol({1.0, 1.4, 1.0, 0.2, OptionKind::put}), ArbitrageError);
    CHECK(implied_vol({1.0, 1.5, 1.0, 0.5, OptionKind::put}) == 0.0);  // at intrinsic
    CHECK_THROWS_AS(implied_vol({1.0, 0.9, 1.0, 0.9, OptionKind::put}), BoundaryError);
    // just below the boundary the vol is still finite but explodes
    CHECK(implied_vol({1.0, 0.9, 1.0, 0.9 * (1.0 - 1e-14), OptionKind::put}) > 10.0);
    CHECK_THROWS_AS(implied_vol({1.0, 1.0, -1.0, 0.1, OptionKind::put}), DomainError);
    const double nan = std::nan("");
    CHECK_THROWS_AS(implied_vol({1.0, 1.0, 1.0, nan, OptionKind::put}), DomainError);
    CHECK_THROWS_AS(bs_price(nan, 1.0, 0.2, 1.0, OptionKind::put), DomainError);
}

TEST_CASE("implied vol from log prices in the deep wing") {
    for (double sig : {0.1, 0.3, 0.8}) {
        for (double k : {5.0, 20.0, 100.0}) {
            const double lp = bs_log_put_unit(k, sig, 1.3);
            CHECK(implied_vol_from_log(OptionKind::put, k, lp, 1.3) ==
                  doctest::Approx(sig).epsilon(1e-9));
            const double lc = bs_log_call_unit(k, sig, 1.3);
            CHECK(implied_vol_from_log(OptionKind::call, k, lc, 1.3) ==
                  doctest::Approx(sig).epsilon(1e-9));
        }
    }
    CHECK_THROWS_AS(implied_vol_from_log(OptionKind::put, 2.0, -1.0, 1.0),
                    ArbitrageError);
}

TEST_CASE("psi transform") {
    CHECK(psi(0.0) == 2.0);
    const double ref1 = 6.0 - 4.0 * std::sqrt(2.0);
    CHECK(psi(1.0) == doctest::Approx(ref1).epsilon(1e-15));
    // the two algebraic forms agree; compare against a cancellation-free
    // transcription of the defining form at large u
    for (double u : {1e-6, 0.01, 0.5, 1.0, 2.0, 37.0, 1e4, 1e8}) {
        const double defining = 2.0 - 4.0 * u * std::expm1(0.5 * std::log1p(1.0 / u));
        CHECK(psi(u) == doctest::Approx(defining).epsilon(1e-13));
    }
    double prev = psi(0.0);
    for (double u = 0.1; u < 50.0; u += 0.7) {
        const double cur = psi(u);
        CHECK(cur < prev);
        prev = cur;
    }
    // ratio stability: arguments equivalent at infinity give psi ratios
    // tending to one (slowly varying behaviour of the transform)
    const double x = 1e8;
    CHECK(psi(x + std::sqrt(x)) / psi(x) == doctest::Approx(1.0).epsilon(1e-4));
    CHECK_THROWS_AS(psi(-1e-9), DomainError);
}

TEST_CASE("zero order wing formula recovers flat vol") {
    // exact BS puts fed through the formula: the output must drift toward
    // the true vol as the strike runs into the wing
    const double sig = 0.2, T = 1.0;
    double prev_err = 1.0;
    for (double k : {6.0, 10.0, 16.0, 26.0, 40.0}) {
        const double iv = iv_zero_order(std::exp(-k), T, bs_log_put_unit(k, sig, T));
        const double err = std::abs(iv - sig);
        CHECK(err < prev_err);
        prev_err = err;
    }
    CHECK(prev_err < 2e-3);
    CHECK_THROWS_AS(iv_zero_order(0.5, 1.0, -3.0), RegimeError);
    CHECK_THROWS_AS(iv_zero_order(0.1, 1.0, std::log(0.2)), ArbitrageError);
}

TEST_CASE("first order wing formula beats zero order on exact puts") {
    const double sig = 0.25, T = 2.0;
    for (double k : {10.0, 20.0, 40.0}) {
        const double lp = bs_log_put_unit(k, sig, T);
        const double e0 = std::abs(iv_zero_order(std::exp(-k), T, lp) - sig);
        const double e1 = std::abs(iv_first_order(std::exp(-k), T, lp) - sig);
        CHECK(e1 < e0);
    }
}

TEST_CASE("first order correction matches direct algebra") {
    // with P = K exp(-L) both radicands shift by exactly log B
    const double L = 100.0, k = 3.0, T = 1.0;
    const double strike = std::exp(-k);
    const double log_put = -k - L;
    const double l1 = -log_put, l2 = L;
    const double log_b = std::log((std::sqrt(l1) - std::sqrt(l2)) /
                                  (2.0 * std::sqrt(3.14159265358979323846) * std::sqrt(l1)));
    const double ll = std::log(l2);
    const double direct = std::sqrt(2.0 / T) * (std::sqrt(l1 - 0.5 * ll + log_b) -
                                                std::sqrt(l2 - 0.5 * ll + log_b));
    CHECK(iv_first_order(strike, T, log_put) == doctest::Approx(direct).epsilon(1e-12));
    const double direct0 = std::sqrt(2.0 / T) *
                           (std::sqrt(l1 - 0.5 * ll) - std::sqrt(l2 - 0.5 * ll));
    CHECK(iv_zero_order(strike, T, log_put) == doctest::Approx(direct0).epsilon(1e-12));
}
