#pragma once

/// Small-strike asymptotics for baskets of correlated lognormal assets:
/// density and put-price expansions, the left-wing implied-vol expansion,
/// the right-wing limit, and the two-asset phase-transition formulas with
/// their exceptional-correlation envelope.
///
/// Deep-wing quantities underflow double (a put at strike e^-14 can be of
/// order e^-4000), so every evaluator has a log-space form; the plain forms
/// exponentiate and may return 0 where the value is subnormal.

#include "bw/linalg.hpp"
#include "bw/simplex_opt.hpp"

#include <functional>
#include <utility>

namespace bw {

/// Basket S_T = sum_i lambda_i exp(X_i) at unit initial price, X Gaussian
/// with annualized covariance cov and martingale drift -cov_ii T/2.
/// mu_T_i = log(lambda_i) - cov_ii T/2 folds the weight into the drift.
struct BasketSpec {
    Vec weights;
    Mat cov;
    Mat sqrt_cov;  // principal square root, for simulation
    double maturity = 1.0;
    Vec mu_T;
};

/// Validates (weights > 0 summing to 1 within 1e-8, cov SPD, maturity > 0)
/// and fills the derived fields.
BasketSpec make_basket(Vec weights, Mat cov, double maturity);

/// Coefficients of the put expansion
///   P(K) ~ delta0 (log 1/K)^delta1 (1/K)^delta2 exp(-delta3 log^2(1/K)).
struct PutAsymptoticCoeffs {
    double delta0;
    double delta1;  // always -(3 + n_bar)/2
    double delta2;
    double delta3;  // (sum_k A_k) / (2T)
    double c_T;     // density prefactor constant
    double log_delta0;
};

/// Left-wing implied vol expansion in L = log(1/K):
///   I(K) ~ c0 + c1 / L + c_loglog * log(L) / L^2.
struct IvExpansion {
    double c0 = 0.0;
    double c1 = 0.0;
    double c_loglog = 0.0;
    int order = 2;
};

enum class Regime { below, exceptional, above };

/// Two-asset configuration relative to the critical correlation
/// rho* = sigma2/sigma1 (requires sigma1 >= sigma2).
struct TwoAssetRegime {
    double sigma1 = 0.0;
    double sigma2 = 0.0;
    double rho = 0.0;
    Regime regime = Regime::below;
    double sigma_inf = 0.0;  // below regime only
    double v_bar = 0.0;      // below regime only
    double V2 = 0.0;         // exceptional only: log(1/rho^2 - 1)
    // set when |rho - rho*| < 1e-6 but not exceptional: the below/above
    // expansion coefficients blow up as rho -> rho*
    bool near_exceptional = false;
};

struct RightWingLimit {
    double sigma;      // max_k sqrt(cov_kk); IV limit as K -> infinity
    double mu;         // max mu_{k,T} among the argmax-variance assets
    int multiplicity;  // assets achieving both maxima
};

struct ExceptionalWing {
    double log_envelope;
    double envelope;  // exp(log_envelope), 0 on underflow
    double iv_leading;
};

/// Density of the basket value at x in (0, 1), leading term only.
double log_density_asymptotic(const BasketSpec& basket, double x);
double density_asymptotic(const BasketSpec& basket, double x);

PutAsymptoticCoeffs put_asymptotic_coeffs(const BasketSpec& basket);
double log_put_asymptotic(const PutAsymptoticCoeffs& coeffs, double strike);
std::pair<double, PutAsymptoticCoeffs> put_asymptotic(const BasketSpec& basket,
                                                      double strike);

/// Fractional integral of order two, int_sigma^inf (tau - sigma) m(tau) dtau,
/// by adaptive quadrature to relative tolerance 1e-8. The log form takes
/// tau -> log m(tau) and returns the log of the integral. Throws
/// IntegrationError when the tail fails to decay.
double log_fractional_integral_f2(const std::function<double(double)>& log_m,
                                  double sigma);
double fractional_integral_f2(const std::function<double(double)>& m,
                              double sigma);

/// Left-wing expansion coefficients for a general basket. Throws RegimeError
/// on an exceptional two-asset configuration (use two_asset_exceptional).
IvExpansion leftwing_iv_expansion(const BasketSpec& basket);

/// Horner evaluation of the expansion at k = log(1/K); requires k > 1.
double eval_iv_expansion(const IvExpansion& expansion, double k);

RightWingLimit rightwing_iv_limit(const BasketSpec& basket);

/// Classifies sigma1 >= sigma2 > 0, |rho| < 1 against rho* = sigma2/sigma1
/// with tolerance 1e-12 and fills the regime-specific constants.
TwoAssetRegime two_asset_classify(double sigma1, double sigma2, double rho);

/// weights[0] belongs to the sigma1 asset, weights[1] to sigma2.
IvExpansion two_asset_leftwing(const TwoAssetRegime& regime, const Vec& weights,
                               double maturity);

/// Put-price envelope and leading IV at the critical correlation; the
/// envelope involves triple logs and requires strike < e^-3.
ExceptionalWing two_asset_exceptional(const TwoAssetRegime& regime,
                                      const Vec& weights, double maturity,
                                      double strike);

/// Consistency flag for the density expansion's support assumption: every
/// inverse-row-sum on the optimal support is strictly positive. Callers
/// should treat false as a warning, not an error.
bool assumption_a_heuristic(const BasketSpec& basket);

}  // namespace bw
