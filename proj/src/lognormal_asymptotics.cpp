#include "bw/lognormal_asymptotics.hpp"

#include "bw/errors.hpp"
#include "bw/quadrature.hpp"

#include <cmath>
#include <limits>
#include <numeric>

namespace bw {

namespace {

constexpr double kTwoPi = 6.283185307179586477;

// reduced quantities on the optimal support: row sums A_k of the inverse
// reduced covariance, their total, and q_k = log(sumA/A_k) + mu_{k,T}
struct Reduced {
    SimplexSolution qp;
    double sum_a;
    Vec q;
};

Reduced reduce(const BasketSpec& basket) {
    Reduced r{min_quadratic_simplex(basket.cov), 0.0, {}};
    r.sum_a = std::accumulate(r.qp.A_row_sums.begin(), r.qp.A_row_sums.end(), 0.0);
    r.q.resize(r.qp.A_row_sums.size());
    for (std::size_t k = 0; k < r.q.size(); ++k)
        r.q[k] = std::log(r.sum_a / r.qp.A_row_sums[k]) +
                 basket.mu_T[r.qp.support[k]];
    return r;
}

double log_c_t(const BasketSpec& basket, const Reduced& r) {
    const double t = basket.maturity;
    double val = -0.5 * std::log(kTwoPi * t) -
                 0.5 * std::log(det_from_chol(chol_factor(r.qp.B_bar))) +
                 0.5 * std::log(r.sum_a);
    for (double a : r.qp.A_row_sums) val -= 0.5 * std::log(a);
    const Vec binv_q = solve_spd(r.qp.B_bar, r.q);
    val -= dot(r.q, binv_q) / (2.0 * t);
    return val;
}

void check_exceptional(const BasketSpec& basket) {
    if (basket.cov.size() != 2) return;
    const double s1 = std::sqrt(basket.cov[0][0]);
    const double s2 = std::sqrt(basket.cov[1][1]);
    const double rho = basket.cov[0][1] / (s1 * s2);
    const double rho_star = std::min(s1, s2) / std::max(s1, s2);
    if (std::abs(rho - rho_star) < 1e-12)
        throw RegimeError(
            "exceptional two-asset configuration: rho equals sigma2/sigma1, "
            "use two_asset_exceptional");
}

}  // namespace

BasketSpec make_basket(Vec weights, Mat cov, double maturity) {
    if (weights.empty() || weights.size() != cov.size())
        throw DomainError("make_basket: weight/covariance size mismatch");
    if (!(maturity > 0.0) || !std::isfinite(maturity))
        throw DomainError("make_basket: maturity must be positive");
    double sum = 0.0;
    for (double w : weights) {
        if (!(w > 0.0) || !std::isfinite(w))
            throw DomainError("make_basket: weights must be positive");
        sum += w;
    }
    if (std::abs(sum - 1.0) > 1e-8)
        throw DomainError("make_basket: weights must sum to 1");
    chol_factor(cov);  // symmetric positive definite
    BasketSpec b;
    b.sqrt_cov = sqrt_spd(cov);
    b.maturity = maturity;
    b.mu_T.resize(weights.size());
    for (std::size_t i = 0; i < weights.size(); ++i)
        b.mu_T[i] = std::log(weights[i]) - 0.5 * cov[i][i] * maturity;
    b.weights = std::move(weights);
    b.cov = std::move(cov);
    return b;
}

double log_density_asymptotic(const BasketSpec& basket, double x) {
    if (!(x > 0.0) || !(x < 1.0))
        throw DomainError("density_asymptotic: x must lie in (0, 1)");
    const Reduced r = reduce(basket);
    const double t = basket.maturity;
    const double big_l = -std::log(x);
    const int n_bar = r.qp.n_bar;
    double qa = 0.0;
    for (std::size_t k = 0; k < r.q.size(); ++k) qa += r.qp.A_row_sums[k] * r.q[k];
    return log_c_t(basket, r) + 0.5 * (1 - n_bar) * std::log(big_l) +
           (-1.0 + qa / t) * std::log(x) - r.sum_a * big_l * big_l / (2.0 * t);
}

double density_asymptotic(const BasketSpec& basket, double x) {
    return std::exp(log_density_asymptotic(basket, x));
}

PutAsymptoticCoeffs put_asymptotic_coeffs(const BasketSpec& basket) {
    const Reduced r = reduce(basket);
    const double t = basket.maturity;
    double qa = 0.0;
    for (std::size_t k = 0; k < r.q.size(); ++k) qa += r.qp.A_row_sums[k] * r.q[k];
    PutAsymptoticCoeffs c;
    const double lct = log_c_t(basket, r);
    c.c_T = std::exp(lct);
    c.log_delta0 = lct + 2.0 * std::log(t) - 2.0 * std::log(r.sum_a);
    c.delta0 = std::exp(c.log_delta0);
    c.delta1 = -0.5 * (3 + r.qp.n_bar);
    c.delta2 = -1.0 - qa / t;
    c.delta3 = r.sum_a / (2.0 * t);
    return c;
}

double log_put_asymptotic(const PutAsymptoticCoeffs& coeffs, double strike) {
    if (!(strike > 0.0) || !(strike < 1.0))
        throw DomainError("put_asymptotic: strike must lie in (0, 1)");
    const double k = -std::log(strike);
    return coeffs.log_delta0 + coeffs.delta1 * std::log(k) + coeffs.delta2 * k -
           coeffs.delta3 * k * k;
}

std::pair<double, PutAsymptoticCoeffs> put_asymptotic(const BasketSpec& basket,
                                                      double strike) {
    const PutAsymptoticCoeffs c = put_asymptotic_coeffs(basket);
    return {std::exp(log_put_asymptotic(c, strike)), c};
}

double log_fractional_integral_f2(const std::function<double(double)>& log_m,
                                  double sigma) {
    if (!(sigma > 0.0))
        throw DomainError("fractional_integral_f2: sigma must be positive");
    auto f = [&](double tau) {
        if (tau <= sigma) return -std::numeric_limits<double>::infinity();
        return std::log(tau - sigma) + log_m(tau);
    };
    return log_integrate_semi(f, sigma, +1, 1e-8, std::max(1.0, 0.5 * sigma));
}

double fractional_integral_f2(const std::function<double(double)>& m,
                              double sigma) {
    return std::exp(log_fractional_integral_f2(
        [&](double tau) { return std::log(m(tau)); }, sigma));
}

IvExpansion leftwing_iv_expansion(const BasketSpec& basket) {
    check_exceptional(basket);
    const Reduced r = reduce(basket);
    const double t = basket.maturity;
    double qa = 0.0;
    for (std::size_t k = 0; k < r.q.size(); ++k) qa += r.qp.A_row_sums[k] * r.q[k];
    const double pow32 = r.sum_a * std::sqrt(r.sum_a);
    IvExpansion e;
    e.c0 = 1.0 / std::sqrt(r.sum_a);
    e.c1 = -(2.0 * qa + t) / (2.0 * pow32);
    e.c_loglog = -t * (r.qp.n_bar - 1) / (2.0 * pow32);
    return e;
}

double eval_iv_expansion(const IvExpansion& expansion, double k) {
    if (!(k > 1.0))
        throw DomainError("eval_iv_expansion: requires k = log(1/K) > 1");
    return expansion.c0 +
           (expansion.c1 + expansion.c_loglog * std::log(k) / k) / k;
}

RightWingLimit rightwing_iv_limit(const BasketSpec& basket) {
    const std::size_t n = basket.cov.size();
    double var = basket.cov[0][0];
    for (std::size_t k = 1; k < n; ++k) var = std::max(var, basket.cov[k][k]);
    double mu = -std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < n; ++k)
        if (basket.cov[k][k] == var) mu = std::max(mu, basket.mu_T[k]);
    int mult = 0;
    for (std::size_t k = 0; k < n; ++k)
        if (basket.cov[k][k] == var && basket.mu_T[k] == mu) ++mult;
    return {std::sqrt(var), mu, mult};
}

TwoAssetRegime two_asset_classify(double sigma1, double sigma2, double rho) {
    if (!(sigma2 > 0.0) || !(sigma1 >= sigma2))
        throw DomainError("two_asset_classify: requires sigma1 >= sigma2 > 0");
    if (!(rho > -1.0) || !(rho < 1.0))
        throw DomainError("two_asset_classify: requires |rho| < 1");
    TwoAssetRegime out;
    out.sigma1 = sigma1;
    out.sigma2 = sigma2;
    out.rho = rho;
    const double gap = rho - sigma2 / sigma1;
    if (std::abs(gap) < 1e-12) {
        out.regime = Regime::exceptional;
        out.V2 = std::log(1.0 / (rho * rho) - 1.0);
        return out;
    }
    out.near_exceptional = std::abs(gap) < 1e-6;
    if (gap > 0.0) {
        out.regime = Regime::above;
        return out;
    }
    out.regime = Regime::below;
    const double denom = sigma1 * sigma1 + sigma2 * sigma2 -
                         2.0 * rho * sigma1 * sigma2;
    out.sigma_inf = sigma1 * sigma2 * std::sqrt(1.0 - rho * rho) /
                    std::sqrt(denom);
    out.v_bar = sigma2 * (sigma2 - rho * sigma1) / denom;
    return out;
}

IvExpansion two_asset_leftwing(const TwoAssetRegime& regime, const Vec& weights,
                               double maturity) {
    if (weights.size() != 2)
        throw DomainError("two_asset_leftwing: needs two weights");
    if (regime.regime == Regime::exceptional)
        throw RegimeError(
            "two_asset_leftwing: exceptional regime, use two_asset_exceptional");
    IvExpansion e;
    const double t = maturity;
    if (regime.regime == Regime::above) {
        e.c0 = regime.sigma2;
        e.c1 = -regime.sigma2 * std::log(weights[1]);
        e.c_loglog = 0.0;
        return e;
    }
    const double si = regime.sigma_inf, v = regime.v_bar;
    const double bracket =
        0.5 * t * si * si +
        (std::log(weights[0]) - 0.5 * regime.sigma1 * regime.sigma1 * t -
         std::log(v)) * v +
        (std::log(weights[1]) - 0.5 * regime.sigma2 * regime.sigma2 * t -
         std::log(1.0 - v)) * (1.0 - v);
    e.c0 = si;
    e.c1 = -si * bracket;
    e.c_loglog = -0.5 * t * si * si * si;
    return e;
}

ExceptionalWing two_asset_exceptional(const TwoAssetRegime& regime,
                                      const Vec& weights, double maturity,
                                      double strike) {
    if (regime.regime != Regime::exceptional)
        throw RegimeError("two_asset_exceptional: regime is not exceptional");
    if (weights.size() != 2)
        throw DomainError("two_asset_exceptional: needs two weights");
    if (!(strike > 0.0) || !(strike < std::exp(-3.0)))
        throw DomainError(
            "two_asset_exceptional: strike too large for the triple-log "
            "envelope, need strike < exp(-3)");
    const double t = maturity;
    const double s1s = regime.sigma1 * regime.sigma1;
    const double s2s = regime.sigma2 * regime.sigma2;
    const double d = s1s - s2s;  // sigma1 > sigma2 strictly when exceptional
    const double mu1 = std::log(weights[0]) - 0.5 * s1s * t;
    const double mu2 = std::log(weights[1]) - 0.5 * s2s * t;
    const double v1t = regime.V2 + mu1 - mu2;
    const double big_l = -std::log(strike);
    const double ll = std::log(big_l);
    const double lll = std::log(ll);
    ExceptionalWing w;
    w.log_envelope = (-1.0 - mu2 / (t * s2s)) * big_l  // (1/K)^(-1-...)
                     + (-v1t / (t * d) - 2.0) * ll
                     + (v1t / (t * d) - 0.5) * lll
                     - big_l * big_l / (2.0 * t * s2s)
                     - ll * ll / (2.0 * t * d)
                     - lll * lll / (2.0 * t * d)
                     + ll * lll / (t * d);
    w.envelope = std::exp(w.log_envelope);
    w.iv_leading = regime.sigma2;
    return w;
}

bool assumption_a_heuristic(const BasketSpec& basket) {
    const Reduced r = reduce(basket);
    if (r.qp.n_bar < 1) return false;
    for (double a : r.qp.A_row_sums)
        if (!(a > 0.0)) return false;
    return true;
}

}  // namespace bw
