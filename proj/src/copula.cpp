#include "bw/copula.hpp"

#include "bw/black_scholes.hpp"
#include "bw/errors.hpp"
#include "bw/normal.hpp"
#include "bw/quadrature.hpp"
#include "bw/simplex_opt.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <string>

namespace bw {

namespace {

void check_alpha(const std::vector<double>& alpha, const char* caller) {
    if (alpha.empty())
        throw DomainError(std::string(caller) + ": alpha is empty");
    for (double a : alpha)
        if (!std::isfinite(a) || !(a > 0.0))
            throw DomainError(std::string(caller) + ": alpha components must be positive");
}

void check_correlation(const Mat& R, std::size_t n, const char* caller) {
    if (R.size() != n)
        throw DomainError(std::string(caller) + ": correlation dimension mismatch");
    for (std::size_t i = 0; i < n; ++i) {
        if (R[i].size() != n)
            throw DomainError(std::string(caller) + ": correlation matrix not square");
        if (!std::isfinite(R[i][i]) || std::fabs(R[i][i] - 1.0) > 1e-12)
            throw DomainError(std::string(caller) + ": correlation diagonal must be 1");
        for (std::size_t j = 0; j < i; ++j) {
            if (!std::isfinite(R[i][j]) || std::fabs(R[i][j] - R[j][i]) > 1e-12)
                throw DomainError(std::string(caller) + ": correlation matrix not symmetric");
        }
    }
}

}  // namespace

double chi_gaussian(const Mat& correlation, const std::vector<double>& alpha) {
    check_alpha(alpha, "chi_gaussian");
    const std::size_t n = alpha.size();
    check_correlation(correlation, n, "chi_gaussian");

    // chi is invariant under scaling of alpha; normalize max alpha = 1 so
    // Sigma's diagonal starts at 1 and the QP sees a well-scaled matrix.
    const double amax = *std::max_element(alpha.begin(), alpha.end());
    Mat sigma(n, Vec(n));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            sigma[i][j] =
                correlation[i][j] / std::sqrt((alpha[i] / amax) * (alpha[j] / amax));

    // max of the normalized alpha is 1, so chi is the QP value itself.
    return min_quadratic_simplex(sigma).value;
}

double chi_archimedean(double lambda, const std::vector<double>& alpha) {
    check_alpha(alpha, "chi_archimedean");
    if (!std::isfinite(lambda) || !(lambda > 0.0))
        throw DomainError("chi_archimedean: lambda must be positive");
    const double amax = *std::max_element(alpha.begin(), alpha.end());
    double sum = 0.0;
    for (double a : alpha) sum += std::pow(a / amax, 1.0 / lambda);
    return 1.0 / std::pow(sum, lambda);
}

double chi_strong_dependence(double lambda_lower) {
    // C(u,...,u) <= min u = u bounds the coefficient by 1 from above.
    if (!std::isfinite(lambda_lower) || !(lambda_lower > 0.0) || lambda_lower > 1.0)
        throw DomainError("chi_strong_dependence: lambda_lower must lie in (0, 1]");
    return 1.0;
}

double chi_closed_form(const CopulaSpec& spec, const std::vector<double>& alpha) {
    switch (spec.family) {
        case CopulaFamily::gaussian:
            return chi_gaussian(spec.correlation, alpha);
        case CopulaFamily::archimedean:
            return chi_archimedean(spec.lambda, alpha);
        case CopulaFamily::strong_dependence:
            return chi_strong_dependence(spec.lambda_lower);
        case CopulaFamily::numeric:
            break;
    }
    throw DomainError("chi_closed_form: numeric family has no closed form, use chi_numeric");
}

ChiEstimate chi_numeric(const CopulaFn& copula, const std::vector<double>& alpha,
                        const std::vector<double>& u_ladder) {
    check_alpha(alpha, "chi_numeric");
    if (!copula) throw DomainError("chi_numeric: empty evaluator");
    if (u_ladder.empty()) throw DomainError("chi_numeric: empty ladder");
    for (std::size_t j = 0; j < u_ladder.size(); ++j) {
        const double u = u_ladder[j];
        if (!std::isfinite(u) || !(u > 0.0) || u > 0.1)
            throw DomainError("chi_numeric: ladder rungs must lie in (0, 0.1]");
        if (j > 0 && !(u < u_ladder[j - 1]))
            throw DomainError("chi_numeric: ladder must be strictly decreasing");
    }

    const std::size_t n = alpha.size();
    const double amax = *std::max_element(alpha.begin(), alpha.end());

    ChiEstimate out;
    std::vector<double> args(n);
    for (double u : u_ladder) {
        const double lu = std::log(u);
        bool under = false;
        for (std::size_t i = 0; i < n; ++i) {
            args[i] = std::exp(alpha[i] * lu);
            if (args[i] <= 0.0) under = true;
        }
        const double c = under ? 0.0 : copula(args);
        if (!std::isfinite(c) || !(c > 0.0)) {
            out.truncated = true;  // deeper rungs are hopeless too
            break;
        }
        // log u < 0, so min_i alpha_i log u = (max alpha) log u.
        out.u.push_back(u);
        out.ratio.push_back(amax * lu / std::log(c));
    }
    if (out.u.empty())
        throw DomainError("chi_numeric: evaluator vanished on every ladder rung");

    const std::size_t m = out.ratio.size();
    if (m < 3) {
        out.estimate = out.ratio.back();
        return out;  // not enough rungs to extrapolate or judge convergence
    }

    // The definition converges like chi + O(1/log(1/u)); the reciprocal
    // quotient log C / min log u^alpha is the quantity with that clean
    // expansion, so fit 1/ratio = b + a/log(1/u) and report 1/b.
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    for (std::size_t j = m - 3; j < m; ++j) {
        const double x = 1.0 / std::log(1.0 / out.u[j]);
        const double y = 1.0 / out.ratio[j];
        sx += x; sy += y; sxx += x * x; sxy += x * y;
    }
    const double det = 3.0 * sxx - sx * sx;
    const double a = (3.0 * sxy - sx * sy) / det;
    const double b = (sy - a * sx) / 3.0;

    auto fitted = [&](std::size_t j) { return 1.0 / (b + a / std::log(1.0 / out.u[j])); };
    const double obs = out.ratio[m - 1] - out.ratio[m - 2];
    const double pred = fitted(m - 1) - fitted(m - 2);
    out.converged =
        std::fabs(obs) <= 10.0 * std::fabs(pred) + 1e-12 * std::fabs(out.ratio[m - 1]);
    out.estimate = b > 0.0 ? 1.0 / b : out.ratio.back();
    if (!(b > 0.0)) out.converged = false;  // fit escaped the feasible range
    return out;
}

void validate_numeric_copula(const CopulaFn& copula, std::size_t n) {
    if (!copula) throw DomainError("validate_numeric_copula: empty evaluator");
    if (n == 0) throw DomainError("validate_numeric_copula: dimension must be positive");
    std::vector<double> u(n);
    for (std::size_t k = 0; k < n; ++k) {
        // C = 0 whenever any coordinate is 0
        std::fill(u.begin(), u.end(), 0.5);
        u[k] = 0.0;
        double c = copula(u);
        if (!std::isfinite(c) || std::fabs(c) > 1e-12) {
            char msg[128];
            std::snprintf(msg, sizeof msg,
                          "validate_numeric_copula: C with u_%zu = 0 returned %.3g, expected 0",
                          k, c);
            throw DomainError(msg);
        }
        // uniform margins: C(1,...,u,...,1) = u
        for (double v : {0.37, 0.81}) {
            std::fill(u.begin(), u.end(), 1.0);
            u[k] = v;
            c = copula(u);
            if (!std::isfinite(c) || std::fabs(c - v) > 1e-6) {
                char msg[128];
                std::snprintf(msg, sizeof msg,
                              "validate_numeric_copula: margin %zu at %.2f returned %.8g",
                              k, v, c);
                throw DomainError(msg);
            }
        }
    }
}

double tailwing_left(const MarginalTailSpec& marginals, double chi,
                     double maturity, double k) {
    if (marginals.side != TailSide::left)
        throw DomainError("tailwing_left: spec describes the right tail");
    if (!marginals.exponential_moment || !marginals.regularly_varying)
        throw DomainError(
            "tailwing_left: standing hypotheses (exponential moment, regular "
            "variation) must be asserted by the caller");
    if (marginals.eta.empty())
        throw DomainError("tailwing_left: eta is empty");
    for (double e : marginals.eta)
        if (!std::isfinite(e) || !(e > 0.0))
            throw DomainError("tailwing_left: eta components must be positive");
    if (!std::isfinite(chi) || !(chi > 0.0))
        throw DomainError("tailwing_left: chi must be positive");
    if (!(maturity > 0.0)) throw DomainError("tailwing_left: maturity must be positive");
    if (!(k > 0.0)) throw DomainError("tailwing_left: log-strike must be positive");
    if (!std::isfinite(marginals.g_slope))
        throw DomainError("tailwing_left: reference slope must be finite");

    const double emax = *std::max_element(marginals.eta.begin(), marginals.eta.end());
    const double arg = marginals.g_slope * emax / chi;
    if (arg < 0.0)
        throw DomainError(
            "tailwing_left: negative psi argument (reference tail would be increasing)");
    return std::sqrt(k / maturity * psi(arg));
}

double tailwing_right(const std::vector<double>& marginal_slopes,
                      double maturity, double k) {
    if (marginal_slopes.empty())
        throw DomainError("tailwing_right: no marginal slopes");
    for (double s : marginal_slopes)
        if (!std::isfinite(s) || !(s > 0.0))
            throw DomainError("tailwing_right: slopes must be positive");
    if (!(maturity > 0.0)) throw DomainError("tailwing_right: maturity must be positive");
    if (!(k > 0.0)) throw DomainError("tailwing_right: log-strike must be positive");
    const double smin =
        *std::min_element(marginal_slopes.begin(), marginal_slopes.end());
    return std::sqrt(k / maturity * psi(smin));
}

double nig_slope(const Mat& correlation, const std::vector<double>& alpha,
                 const std::vector<double>& beta) {
    check_alpha(alpha, "nig_slope");
    const std::size_t n = alpha.size();
    if (beta.size() != n) throw DomainError("nig_slope: alpha/beta size mismatch");
    for (std::size_t i = 0; i < n; ++i) {
        if (!std::isfinite(beta[i]) || !(std::fabs(beta[i]) > 0.0) ||
            !(alpha[i] > std::fabs(beta[i])))
            throw DomainError("nig_slope: need alpha_i > |beta_i| > 0");
    }
    check_correlation(correlation, n, "nig_slope");

    // Tail weights alpha - beta are absolute (reference tail e^{-k}): the
    // QP runs on the raw Sigma, unlike the scale-free chi computation.
    Mat sigma(n, Vec(n));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            sigma[i][j] = correlation[i][j] /
                          std::sqrt((alpha[i] - beta[i]) * (alpha[j] - beta[j]));
    return psi(1.0 / min_quadratic_simplex(sigma).value);
}

double bivariate_normal_cdf(double a, double b, double rho) {
    if (std::isnan(a) || std::isnan(b) || !std::isfinite(rho) ||
        std::fabs(rho) > 1.0)
        throw DomainError("bivariate_normal_cdf: need finite rho in [-1, 1] and non-NaN bounds");
    if (rho == 1.0) return norm_cdf(std::min(a, b));
    if (rho == -1.0) {
        const double s = norm_cdf(a) + norm_cdf(b) - 1.0;
        return s > 0.0 ? s : 0.0;
    }
    if (rho == 0.0) return std::exp(log_norm_cdf(a) + log_norm_cdf(b));
    // marginal saturation: beyond 37 the other coordinate decides alone
    if (a >= 37.0) return norm_cdf(b);
    if (b >= 37.0) return norm_cdf(a);
    if (a == -std::numeric_limits<double>::infinity() ||
        b == -std::numeric_limits<double>::infinity())
        return 0.0;

    // condition on the first coordinate: integrand phi(x) Phi((b-rho x)/s)
    // handled entirely in log space so the joint tail keeps relative accuracy
    const double s = std::sqrt((1.0 - rho) * (1.0 + rho));
    LogFn f = [b, rho, s](double x) {
        return log_norm_pdf(x) + log_norm_cdf((b - rho * x) / s);
    };
    return std::exp(log_integrate_semi(f, a, -1, 1e-10));
}

}  // namespace bw
