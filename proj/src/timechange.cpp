#include "bw/timechange.hpp"

#include "bw/black_scholes.hpp"
#include "bw/errors.hpp"
#include "bw/parallel.hpp"
#include "bw/simplex_opt.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <string>
#include <utility>
#include <vector>

namespace bw {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double envelope_log(double s, double alpha, double theta) {
    return alpha * std::log(s) - theta * s;
}

/// Smallest s at which the envelope s^alpha e^{-theta s} has decayed by
/// 1e-12 from its maximum over s >= 1, capped at 50.
double envelope_decay_point(double alpha, double theta) {
    const double s_peak = std::max(1.0, alpha / theta);
    if (s_peak >= 50.0) return 50.0;
    const double target =
        envelope_log(s_peak, alpha, theta) + std::log(1e-12);
    double lo = s_peak;
    double hi = s_peak + 0.5;
    while (envelope_log(hi, alpha, theta) > target) {
        lo = hi;
        hi = s_peak + 2.0 * (hi - s_peak);
        if (hi >= 50.0) return 50.0;
    }
    for (int it = 0; it < 100; ++it) {
        const double mid = 0.5 * (lo + hi);
        (envelope_log(mid, alpha, theta) > target ? lo : hi) = mid;
    }
    return std::min(50.0, hi);
}

double trapezoid_mass(const TabulatedDensity& t) {
    double m = 0.0;
    for (std::size_t i = 0; i + 1 < t.s.size(); ++i)
        m += 0.5 * (t.s[i + 1] - t.s[i]) * (t.rho[i] + t.rho[i + 1]);
    return m;
}

/// Exact integral of e^{-a x} against the linear interpolant. Segments
/// whose integrand maximum falls below 1e-16 of the global node maximum
/// are dropped; they cannot move the first 15 digits.
double tab_exp_integral(const TabulatedDensity& t, double a) {
    const auto node_log = [&](std::size_t i) {
        return t.rho[i] > 0.0 ? std::log(t.rho[i]) - a * t.s[i] : kNegInf;
    };
    double max_log = kNegInf;
    for (std::size_t i = 0; i < t.s.size(); ++i)
        max_log = std::max(max_log, node_log(i));
    if (max_log == kNegInf) return 0.0;
    double total = 0.0;
    for (std::size_t i = 0; i + 1 < t.s.size(); ++i) {
        if (t.rho[i] == 0.0 && t.rho[i + 1] == 0.0) continue;
        if (std::max(node_log(i), node_log(i + 1)) < max_log - 36.85)
            continue;
        const double h = t.s[i + 1] - t.s[i];
        const double m = (t.rho[i + 1] - t.rho[i]) / h;
        const double ah = a * h;
        double e1, e2;  // int_0^h e^{-a u} du and int_0^h u e^{-a u} du
        if (std::abs(ah) < 1e-6) {
            e1 = h * (1.0 - 0.5 * ah + ah * ah / 6.0);
            e2 = h * h * (0.5 - ah / 3.0 + ah * ah / 8.0);
        } else {
            const double em = std::exp(-ah);
            e1 = (1.0 - em) / a;
            e2 = (1.0 - em * (1.0 + ah)) / (a * a);
        }
        total += std::exp(-a * t.s[i]) * (t.rho[i] * e1 + m * e2);
    }
    if (!std::isfinite(total))
        throw IntegrationError(
            "laplace_transform: tabulated integral overflowed");
    return total;
}

std::string fmt2(const char* fmt, double a, double b) {
    char buf[160];
    std::snprintf(buf, sizeof(buf), fmt, a, b);
    return buf;
}

}  // namespace

TimeChangeSpec make_gamma_timechange(double c, double lambda_rate,
                                     double maturity) {
    if (!(c > 0.0) || !(lambda_rate > 0.0) || !(maturity > 0.0))
        throw DomainError(
            "make_gamma_timechange: c, lambda_rate, maturity must be > 0");
    TimeChangeSpec tc;
    tc.family = TimeChangeFamily::gamma;
    tc.c = c;
    tc.lambda_rate = lambda_rate;
    tc.maturity = maturity;
    tc.tail_theta = lambda_rate;
    tc.tail_alpha = c * maturity - 1.0;
    return tc;
}

TimeChangeSpec make_ig_timechange(double c, double lambda_rate,
                                  double maturity) {
    if (!(c > 0.0) || !(lambda_rate > 0.0) || !(maturity > 0.0))
        throw DomainError(
            "make_ig_timechange: c, lambda_rate, maturity must be > 0");
    TimeChangeSpec tc;
    tc.family = TimeChangeFamily::inverse_gaussian;
    tc.c = c;
    tc.lambda_rate = lambda_rate;
    tc.maturity = maturity;
    tc.tail_theta = lambda_rate;
    tc.tail_alpha = -1.5;
    return tc;
}

TimeChangeSpec make_tabulated_timechange(TabulatedDensity table,
                                         double maturity) {
    if (!(maturity > 0.0))
        throw DomainError("make_tabulated_timechange: maturity must be > 0");
    const std::size_t n = table.s.size();
    if (n < 3 || table.rho.size() != n)
        throw DomainError(
            "make_tabulated_timechange: need matching s/rho grids with at "
            "least 3 nodes");
    if (!(table.s.front() >= 0.0))
        throw DomainError("make_tabulated_timechange: grid must start at "
                          "s >= 0");
    for (std::size_t i = 0; i + 1 < n; ++i)
        if (!(table.s[i + 1] > table.s[i]))
            throw DomainError("make_tabulated_timechange: abscissae must be "
                              "strictly increasing");
    for (double r : table.rho)
        if (!(r >= 0.0) || !std::isfinite(r))
            throw DomainError("make_tabulated_timechange: density values "
                              "must be finite and nonnegative");
    if (!(table.tail_theta > 0.0) || !(table.tail_c > 0.0) ||
        !std::isfinite(table.tail_alpha))
        throw DomainError("make_tabulated_timechange: declared tail needs "
                          "theta > 0 and c > 0");
    const double mass = trapezoid_mass(table);
    if (!(std::abs(mass - 1.0) <= 1e-6))
        throw DomainError(fmt2("make_tabulated_timechange: density mass "
                               "%.9g not within 1e-6 of 1",
                               mass, 0.0));

    // sandwich region: [1, s_dec] where the declared envelope is still
    // within 1e-12 of its peak (or s = 50, whichever comes first)
    if (!(table.s.front() <= 1.0))
        throw DomainError("make_tabulated_timechange: grid must start at or "
                          "below s = 1 to cover the tail sandwich region");
    const double s_dec =
        envelope_decay_point(table.tail_alpha, table.tail_theta);
    if (table.s.back() < s_dec - 1e-9)
        throw DomainError(fmt2("make_tabulated_timechange: grid ends at "
                               "%.6g, short of the tail region end %.6g",
                               table.s.back(), s_dec));
    double lo = std::numeric_limits<double>::infinity();
    double hi = kNegInf;
    int nodes = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const double s = table.s[i];
        if (s < 1.0 || s > s_dec + 1e-12) continue;
        ++nodes;
        if (!(table.rho[i] > 0.0))
            throw DomainError(fmt2("make_tabulated_timechange: sandwich "
                                   "lower bound fails, density vanishes at "
                                   "s = %.6g inside [1, %.6g]",
                                   s, s_dec));
        const double lr = std::log(table.rho[i]) -
                          envelope_log(s, table.tail_alpha, table.tail_theta);
        lo = std::min(lo, lr);
        hi = std::max(hi, lr);
    }
    if (nodes < 2)
        throw DomainError("make_tabulated_timechange: fewer than two grid "
                          "nodes inside the tail sandwich region");
    if (hi - lo > std::log(100.0))
        throw DomainError(fmt2("make_tabulated_timechange: sandwich constant "
                               "spread e^%.3g exceeds the allowed factor "
                               "100",
                               hi - lo, 0.0));
    const double lc = std::log(table.tail_c);
    if (lc < lo - 1e-12 || lc > hi + 1e-12)
        throw DomainError(fmt2("make_tabulated_timechange: declared tail "
                               "constant %.6g outside the observed sandwich "
                               "band",
                               table.tail_c, 0.0));

    TimeChangeSpec tc;
    tc.family = TimeChangeFamily::tabulated;
    tc.maturity = maturity;
    tc.tail_theta = table.tail_theta;
    tc.tail_alpha = table.tail_alpha;
    tc.cdf.assign(n, 0.0);
    double acc = 0.0;
    for (std::size_t i = 0; i + 1 < n; ++i) {
        acc += 0.5 * (table.s[i + 1] - table.s[i]) *
               (table.rho[i] + table.rho[i + 1]);
        tc.cdf[i + 1] = acc;
    }
    for (double& v : tc.cdf) v /= acc;
    tc.table = std::move(table);
    return tc;
}

double timechange_density(const TimeChangeSpec& tc, double s) {
    if (!(s > 0.0)) throw DomainError("timechange_density: s must be > 0");
    switch (tc.family) {
        case TimeChangeFamily::gamma: {
            const double shape = tc.c * tc.maturity;
            return std::exp(shape * std::log(tc.lambda_rate) -
                            std::lgamma(shape) + (shape - 1.0) * std::log(s) -
                            tc.lambda_rate * s);
        }
        case TimeChangeFamily::inverse_gaussian: {
            const double ct = tc.c * tc.maturity;
            return std::exp(std::log(ct) - 1.5 * std::log(s) +
                            2.0 * ct * std::sqrt(kPi * tc.lambda_rate) -
                            tc.lambda_rate * s - kPi * ct * ct / s);
        }
        case TimeChangeFamily::tabulated: {
            const auto& t = tc.table;
            if (s <= t.s.front() || s >= t.s.back()) {
                // closed endpoints still usable; beyond them the law is zero
                if (s == t.s.front()) return t.rho.front();
                if (s == t.s.back()) return t.rho.back();
                return 0.0;
            }
            const auto it =
                std::upper_bound(t.s.begin(), t.s.end(), s);
            const std::size_t j =
                static_cast<std::size_t>(it - t.s.begin()) - 1;
            const double w = (s - t.s[j]) / (t.s[j + 1] - t.s[j]);
            return t.rho[j] + w * (t.rho[j + 1] - t.rho[j]);
        }
    }
    throw DomainError("timechange_density: unknown family");
}

double laplace_transform(const TimeChangeSpec& tc, double s) {
    switch (tc.family) {
        case TimeChangeFamily::gamma: {
            if (!(s > -tc.lambda_rate))
                throw DomainError(
                    "laplace_transform: s at or below -lambda_rate, gamma "
                    "transform diverges");
            return std::exp(tc.c * tc.maturity *
                            (std::log(tc.lambda_rate) -
                             std::log(tc.lambda_rate + s)));
        }
        case TimeChangeFamily::inverse_gaussian: {
            if (!(s > -tc.lambda_rate))
                throw DomainError(
                    "laplace_transform: s at or below -lambda_rate, inverse "
                    "Gaussian transform diverges");
            const double ct = tc.c * tc.maturity;
            return std::exp(2.0 * ct *
                            (std::sqrt(kPi * tc.lambda_rate) -
                             std::sqrt(kPi * (tc.lambda_rate + s))));
        }
        case TimeChangeFamily::tabulated:
            // normalized so that s = 0 gives exactly 1
            return tab_exp_integral(tc.table, s) / trapezoid_mass(tc.table);
    }
    throw DomainError("laplace_transform: unknown family");
}

double sample_timechange(const TimeChangeSpec& tc, CounterRng& rng) {
    switch (tc.family) {
        case TimeChangeFamily::gamma:
            return sample_gamma(rng, tc.c * tc.maturity) / tc.lambda_rate;
        case TimeChangeFamily::inverse_gaussian: {
            const double ct = tc.c * tc.maturity;
            const double mean = ct * std::sqrt(kPi / tc.lambda_rate);
            const double shape = 2.0 * kPi * ct * ct;
            return sample_inverse_gaussian(rng, mean, shape);
        }
        case TimeChangeFamily::tabulated: {
            const auto& t = tc.table;
            const double u = rng.uniform();
            auto it = std::upper_bound(tc.cdf.begin(), tc.cdf.end(), u);
            std::size_t j = static_cast<std::size_t>(it - tc.cdf.begin());
            j = (j == 0 ? 0 : j - 1);
            while (j + 2 < tc.cdf.size() && tc.cdf[j + 1] <= tc.cdf[j])
                ++j;  // skip zero-mass segments
            const double seg = tc.cdf[j + 1] - tc.cdf[j];
            const double frac =
                seg > 0.0 ? (u - tc.cdf[j]) / seg : 0.0;
            const double h = t.s[j + 1] - t.s[j];
            const double rho0 = t.rho[j];
            const double m = (t.rho[j + 1] - rho0) / h;
            const double area = 0.5 * h * (rho0 + t.rho[j + 1]);
            double x;
            if (std::abs(m) * h < 1e-14 * std::max(rho0, 1e-300)) {
                x = frac * area / rho0;
            } else {
                const double disc =
                    std::max(0.0, rho0 * rho0 + 2.0 * m * frac * area);
                x = (std::sqrt(disc) - rho0) / m;
            }
            return t.s[j] + std::min(std::max(x, 0.0), h);
        }
    }
    throw DomainError("sample_timechange: unknown family");
}

double martingale_drift(const TimeChangeSpec& tc, double mu_i, double var_ii) {
    if (!(var_ii > 0.0))
        throw DomainError("martingale_drift: var_ii must be > 0");
    const double a = mu_i + 0.5 * var_ii;
    if (!(tc.tail_theta > a))
        throw MomentError(
            fmt2("martingale moment condition fails: tail rate theta = %.6g "
                 "must exceed mu_i + var_ii/2 = %.6g",
                 tc.tail_theta, a));
    if (a == 0.0) return 0.0;
    return -std::log(laplace_transform(tc, -a));
}

TcBasketSpec make_tc_basket(BasketSpec basket, std::vector<double> mu,
                            TimeChangeSpec timechange) {
    const std::size_t n = basket.weights.size();
    if (mu.size() != n)
        throw DomainError("make_tc_basket: drift size must match basket size");
    if (std::abs(basket.maturity - timechange.maturity) >
        1e-12 * std::max(1.0, timechange.maturity))
        throw DomainError(
            "make_tc_basket: basket and time-change maturities differ");
    TcBasketSpec spec;
    spec.mu_tilde.resize(n);
    for (std::size_t i = 0; i < n; ++i)
        spec.mu_tilde[i] =
            martingale_drift(timechange, mu[i], basket.cov[i][i]);
    spec.basket = std::move(basket);
    spec.mu = std::move(mu);
    spec.timechange = std::move(timechange);
    return spec;
}

double tc_terminal_value(const TcBasketSpec& spec, double tau, const double* z,
                         bool antithetic) {
    const auto& b = spec.basket;
    const std::size_t n = b.weights.size();
    const double scale = (antithetic ? -1.0 : 1.0) * std::sqrt(tau);
    double value = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const auto& row = b.sqrt_cov[i];
        double g = 0.0;
        for (std::size_t j = 0; j < n; ++j) g += row[j] * z[j];
        value += b.weights[i] *
                 std::exp(spec.mu_tilde[i] + spec.mu[i] * tau + scale * g);
    }
    return value;
}

TcWing tc_leftwing_leading(const TcBasketSpec& spec) {
    const SaddlePoint sp = saddle_cstar(spec.basket.cov, spec.mu,
                                        spec.timechange.tail_theta);
    const double T = spec.timechange.maturity;
    return {std::sqrt(psi(sp.c_star) / T), sp.c_star, sp.t_bar};
}

TcWing tc_rightwing_leading(const TcBasketSpec& spec) {
    const double theta = spec.timechange.tail_theta;
    const double T = spec.timechange.maturity;
    double c_min = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < spec.basket.weights.size(); ++i) {
        const double bi = spec.basket.cov[i][i];
        const double mi = spec.mu[i];
        const double ci =
            (std::sqrt(2.0 * theta * bi + mi * mi) - mi) / bi;
        c_min = std::min(c_min, ci);
    }
    return {std::sqrt(psi(c_min) / T), c_min, 0.0};
}

TailSandwichReport tail_sandwich_check(const TcBasketSpec& spec,
                                       const std::vector<double>& k_grid,
                                       std::uint64_t mc_paths,
                                       std::uint64_t seed) {
    if (k_grid.empty())
        throw DomainError("tail_sandwich_check: empty k grid");
    for (double k : k_grid)
        if (!(k >= 5.0))
            throw DomainError("tail_sandwich_check: every k must be >= 5 "
                              "(asymptotic tail regime)");
    if (mc_paths == 0)
        throw DomainError("tail_sandwich_check: need at least one path");

    std::vector<double> ks = k_grid;
    std::sort(ks.begin(), ks.end());
    ks.erase(std::unique(ks.begin(), ks.end()), ks.end());
    const std::size_t nk = ks.size();
    std::vector<double> thresholds(nk);
    for (std::size_t j = 0; j < nk; ++j) thresholds[j] = std::exp(-ks[j]);

    constexpr std::uint64_t kBlock = 65536;
    const std::uint64_t n_blocks = (mc_paths + kBlock - 1) / kBlock;
    const std::size_t n = spec.basket.weights.size();
    std::vector<std::vector<std::uint64_t>> block_hits(
        n_blocks, std::vector<std::uint64_t>(nk, 0));

    for_each_block(n_blocks, [&](std::uint64_t b) {
        std::vector<double> z(n);
        auto& hits = block_hits[b];
        const std::uint64_t lo = b * kBlock;
        const std::uint64_t hi = std::min(mc_paths, lo + kBlock);
        for (std::uint64_t p = lo; p < hi; ++p) {
            CounterRng rng(seed, 0, static_cast<std::uint32_t>(b),
                           static_cast<std::uint32_t>(p - lo));
            const double tau = sample_timechange(spec.timechange, rng);
            for (std::size_t i = 0; i < n; ++i) z[i] = rng.normal();
            const double v = tc_terminal_value(spec, tau, z.data(), false);
            // thresholds descend with k, so the first miss ends the scan
            for (std::size_t j = 0; j < nk; ++j) {
                if (v <= thresholds[j])
                    ++hits[j];
                else
                    break;
            }
        }
    });

    TailSandwichReport report;
    report.paths = mc_paths;
    report.entries.resize(nk);
    const double log_paths = std::log(static_cast<double>(mc_paths));
    for (std::size_t j = 0; j < nk; ++j) {
        auto& e = report.entries[j];
        e.k = ks[j];
        for (std::uint64_t b = 0; b < n_blocks; ++b)
            e.hits += block_hits[b][j];
        e.usable = e.hits > 0;
        if (e.usable) {
            const double p =
                static_cast<double>(e.hits) / static_cast<double>(mc_paths);
            e.log_prob = std::log(static_cast<double>(e.hits)) - log_paths;
            e.std_err_log = std::sqrt((1.0 - p) / static_cast<double>(e.hits));
        } else {
            e.log_prob = kNegInf;
            e.std_err_log = std::numeric_limits<double>::infinity();
            report.insufficient_paths = true;
        }
    }

    report.c_star = saddle_cstar(spec.basket.cov, spec.mu,
                                 spec.timechange.tail_theta)
                        .c_star;
    report.band_lo = spec.timechange.tail_alpha - static_cast<double>(n);
    report.band_hi = spec.timechange.tail_alpha;

    std::vector<std::size_t> usable;
    for (std::size_t j = 0; j < nk; ++j)
        if (report.entries[j].usable) usable.push_back(j);
    if (usable.size() < 2) {
        report.fitted_slope = kNaN;
        report.slope_rel_dev = kNaN;
        report.residual_alpha = kNaN;
        return report;
    }

    // least squares slope of -log p against k over the usable entries
    double mk = 0.0, my = 0.0;
    for (std::size_t j : usable) {
        mk += report.entries[j].k;
        my += -report.entries[j].log_prob;
    }
    mk /= static_cast<double>(usable.size());
    my /= static_cast<double>(usable.size());
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t j : usable) {
        const double dk = report.entries[j].k - mk;
        sxx += dk * dk;
        sxy += dk * (-report.entries[j].log_prob - my);
    }
    report.fitted_slope = sxy / sxx;
    report.slope_rel_dev =
        std::abs(report.fitted_slope - report.c_star) / report.c_star;

    const auto& first = report.entries[usable.front()];
    const auto& last = report.entries[usable.back()];
    const double r_first = -first.log_prob - report.c_star * first.k;
    const double r_last = -last.log_prob - report.c_star * last.k;
    const double dlog = std::log(last.k) - std::log(first.k);
    report.residual_alpha = -(r_last - r_first) / dlog;
    report.band_margin =
        3.0 *
        std::sqrt(first.std_err_log * first.std_err_log +
                  last.std_err_log * last.std_err_log) /
        dlog;
    report.within_band =
        report.residual_alpha >= report.band_lo - report.band_margin &&
        report.residual_alpha <= report.band_hi + report.band_margin;
    return report;
}

}  // namespace bw
