#include "bw/oracle.hpp"

#include "bw/errors.hpp"
#include "bw/linalg.hpp"
#include "bw/normal.hpp"
#include "bw/parallel.hpp"
#include "bw/quadrature.hpp"
#include "bw/rng.hpp"
#include "bw/simplex_opt.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <limits>
#include <string>
#include <utility>
#include <vector>

namespace bw {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr std::uint64_t kBlock = 65536;

// Substreams: 1 plain basket pricing, 2 subordinated pricing, 3 tail
// probabilities. Keeps the oracles decorrelated from each other and from
// the tail diagnostic in the model module.
constexpr std::uint32_t kStreamPlain = 1;
constexpr std::uint32_t kStreamTc = 2;
constexpr std::uint32_t kStreamTail = 3;

void check_paths(std::uint64_t paths, const char* where) {
    if (paths < 1000) {
        char msg[128];
        std::snprintf(msg, sizeof(msg), "%s: need at least 1000 paths, got %llu",
                      where, static_cast<unsigned long long>(paths));
        throw DomainError(msg);
    }
}

void check_strike(double strike, const char* where) {
    if (!(strike > 0.0) || !std::isfinite(strike)) {
        char msg[128];
        std::snprintf(msg, sizeof(msg), "%s: strike must be positive and finite, got %g",
                      where, strike);
        throw DomainError(msg);
    }
}

/// Sum of the spot weights; unit for baskets built through make_basket,
/// kept symbolic so hand-assembled degenerate specs stay consistent.
double basket_s0(const BasketSpec& b) {
    double s = 0.0;
    for (double w : b.weights) s += w;
    return s;
}

/// Terminal basket value for the plain model: the weight is folded into
/// mu_T (mu_T_i = log w_i - B_ii T / 2), so a zero weight enters as
/// exp(-inf) = 0 and drops out cleanly.
double plain_terminal(const BasketSpec& b, const double* z, bool antithetic) {
    const std::size_t n = b.weights.size();
    const double scale = (antithetic ? -1.0 : 1.0) * std::sqrt(b.maturity);
    double v = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        double g = 0.0;
        for (std::size_t j = 0; j < n; ++j) g += b.sqrt_cov[i][j] * z[j];
        v += std::exp(b.mu_T[i] + scale * g);
    }
    return v;
}

/// Block-parallel mean/stderr accumulator. Each path owns a counter-RNG
/// substream keyed by (block, path-in-block); partial sums merge in block
/// order so the result is bitwise independent of the thread budget.
template <class Sample>
McEstimate run_mc(std::uint64_t paths, std::uint64_t seed, std::uint32_t stream,
                  Sample&& sample) {
    const std::uint64_t n_blocks = (paths + kBlock - 1) / kBlock;
    std::vector<std::array<double, 2>> acc(n_blocks, {0.0, 0.0});
    for_each_block(n_blocks, [&](std::uint64_t b) {
        const std::uint64_t lo = b * kBlock;
        const std::uint64_t hi = std::min(lo + kBlock, paths);
        double s = 0.0, s2 = 0.0;
        for (std::uint64_t p = lo; p < hi; ++p) {
            CounterRng rng(seed, stream, static_cast<std::uint32_t>(b),
                           static_cast<std::uint32_t>(p - lo));
            const double x = sample(rng);
            s += x;
            s2 += x * x;
        }
        acc[b] = {s, s2};
    });
    double sum = 0.0, sumsq = 0.0;
    for (const auto& a : acc) {
        sum += a[0];
        sumsq += a[1];
    }
    McEstimate est;
    est.paths = paths;
    est.seed = seed;
    est.value = sum / static_cast<double>(paths);
    const double raw_var = sumsq / static_cast<double>(paths) - est.value * est.value;
    const double var = std::max(0.0, raw_var) * static_cast<double>(paths) /
                       static_cast<double>(paths - 1);
    est.std_error = std::sqrt(var / static_cast<double>(paths));
    return est;
}

void check_basket_mc(const BasketSpec& b, const char* where) {
    if (b.weights.empty() || b.sqrt_cov.size() != b.weights.size() ||
        b.mu_T.size() != b.weights.size()) {
        std::string msg(where);
        throw DomainError(msg + ": basket spec is incomplete");
    }
}

/// One antithetic-pair sample of the put payoff (put_leg) or of the
/// control-variated call payoff (call = raw call - (pair mean - s0)).
/// The same draws serve both, so call - put telescopes to s0 - strike
/// exactly and parity survives at machine precision.
template <class Terminal>
double pair_sample(double strike, double s0, bool call_leg, Terminal&& term) {
    const double v1 = term(false);
    const double v2 = term(true);
    if (call_leg) {
        const double raw =
            0.5 * (std::max(v1 - strike, 0.0) + std::max(v2 - strike, 0.0));
        return raw - (0.5 * (v1 + v2) - s0);
    }
    return 0.5 * (std::max(strike - v1, 0.0) + std::max(strike - v2, 0.0));
}

McEstimate mc_plain(const BasketSpec& basket, double strike, std::uint64_t paths,
                    std::uint64_t seed, bool call_leg, const char* where) {
    check_basket_mc(basket, where);
    check_strike(strike, where);
    check_paths(paths, where);
    const std::size_t n = basket.weights.size();
    const double s0 = basket_s0(basket);
    return run_mc(paths, seed, kStreamPlain, [&](CounterRng& rng) {
        std::vector<double> z(n);
        for (std::size_t i = 0; i < n; ++i) z[i] = rng.normal();
        return pair_sample(strike, s0, call_leg, [&](bool anti) {
            return plain_terminal(basket, z.data(), anti);
        });
    });
}

void check_tc_mc(const TcBasketSpec& spec, const char* where) {
    if (spec.basket.weights.empty() ||
        spec.mu_tilde.size() != spec.basket.weights.size()) {
        std::string msg(where);
        throw DomainError(msg + ": run make_tc_basket first");
    }
}

McEstimate mc_tc(const TcBasketSpec& spec, double strike, std::uint64_t paths,
                 std::uint64_t seed, bool call_leg, const char* where) {
    check_tc_mc(spec, where);
    check_strike(strike, where);
    check_paths(paths, where);
    const std::size_t n = spec.basket.weights.size();
    const double s0 = basket_s0(spec.basket);
    return run_mc(paths, seed, kStreamTc, [&](CounterRng& rng) {
        const double tau = sample_timechange(spec.timechange, rng);
        std::vector<double> z(n);
        for (std::size_t i = 0; i < n; ++i) z[i] = rng.normal();
        return pair_sample(strike, s0, call_leg, [&](bool anti) {
            return tc_terminal_value(spec, tau, z.data(), anti);
        });
    });
}

// ---------------------------------------------------------------------
// 2-D quadrature
//
// Coordinates are Cholesky-conditioned: with B = L L^T (L lower
// triangular), Y1 depends on z1 alone and, given z1, the basket is
// K - C1(z1) - e^{A2(z1) + gamma z2}, monotone in z2. The inner integral
// then closes to two normal CDFs, and the outer integrand is smooth (all
// derivatives vanish where the exercise region pinches off), which
// restores spectral convergence of the outer Gauss-Hermite rule; a raw
// tensor rule stalls at ~1e-5 near the money because the payoff kink
// crosses the Gaussian bulk.

struct Chol2 {
    double l11, l21, l22;
};

Chol2 chol2(const Mat& cov) {
    Chol2 c;
    c.l11 = std::sqrt(cov[0][0]);
    c.l21 = cov[1][0] / c.l11;
    c.l22 = std::sqrt(std::max(cov[1][1] - c.l21 * c.l21, 0.0));
    return c;
}

/// log of the conditional put value E[(K - S)^+ | z1]:
/// (K - C1) Phi(z2*) - e^{A2 + gamma^2/2} Phi(z2* - gamma), kept in logs.
/// The two terms agree to ~gamma/|z2*| deep in the wing, so both CDFs go
/// through log_norm_cdf and the difference through log1p.
double log_inner_put(double log_strike, double c1_log, double a2, double gamma) {
    const double ratio = std::exp(c1_log - log_strike);  // C1 / K
    if (!(ratio < 1.0)) return kNegInf;
    const double log_km_c1 = log_strike + std::log1p(-ratio);
    const double z_star = (log_km_c1 - a2) / gamma;
    const double lt1 = log_km_c1 + log_norm_cdf(z_star);
    const double lt2 = a2 + 0.5 * gamma * gamma + log_norm_cdf(z_star - gamma);
    if (!(lt2 < lt1)) return kNegInf;  // exercise mass below roundoff
    return lt1 + std::log1p(-std::exp(lt2 - lt1));
}

/// log E[(K - S)^+] with a composite outer rule of total order tied to
/// m = nodes_per_dim. The outer integrand vanishes with an essential
/// singularity at the pinch z_bound (where C1 = K) and is analytic
/// elsewhere, so the mesh uses width-2 panels across the Gaussian bulk
/// and dyadically graded panels into the pinch; Gauss-Legendre of order
/// ~m/8 per panel then converges geometrically in m uniformly over
/// strikes. Everything stays in logs for e^{-1000}-scale prices.
double quad_log_put(const BasketSpec& b, double strike, int m, const Chol2& L) {
    const double log_strike = std::log(strike);
    const double st = std::sqrt(b.maturity);
    const double b1 = st * L.l11;
    const double gamma = st * L.l22;
    const double z_bound = (log_strike - b.mu_T[0]) / b1;
    const int q = std::max(4, std::min(48, m / 8));
    const GaussLegendre& gl = gauss_legendre(q);

    // mass lives in |z1| <~ a few and, deep in the wing, near z_bound
    const double hi_eff = std::min(z_bound, 45.0);
    const double lo = std::min(hi_eff, 0.0) - 48.0;
    std::vector<std::pair<double, double>> panels;
    double edge = lo;
    const double bulk_end = hi_eff - 1.0;
    while (edge + 2.0 < bulk_end) {
        panels.emplace_back(edge, edge + 2.0);
        edge += 2.0;
    }
    if (z_bound <= 46.0) {
        panels.emplace_back(edge, z_bound - 0.5 * (z_bound - edge));
        edge = z_bound - 0.5 * (z_bound - edge);
        // grade into the pinch; the dropped sliver is doubly suppressed by
        // (K - C1) -> 0 and the conditional Gaussian tail
        for (int i = 0; i < 60 && z_bound - edge > 1e-14 * (1.0 + std::abs(z_bound));
             ++i) {
            const double next = z_bound - 0.5 * (z_bound - edge);
            panels.emplace_back(edge, next);
            edge = next;
        }
    } else {
        panels.emplace_back(edge, hi_eff);
    }

    std::vector<double> terms;
    terms.reserve(panels.size() * static_cast<std::size_t>(q));
    for (const auto& [a, c] : panels) {
        const double mid = 0.5 * (a + c);
        const double half = 0.5 * (c - a);
        if (!(half > 0.0)) continue;
        const double log_half = std::log(half);
        for (int k = 0; k < q; ++k) {
            const double z1 = mid + half * gl.nodes[k];
            if (!(z1 < z_bound)) continue;
            const double li = log_inner_put(log_strike, b.mu_T[0] + b1 * z1,
                                            b.mu_T[1] + st * L.l21 * z1, gamma);
            if (li == kNegInf) continue;
            terms.push_back(std::log(gl.weights[k]) + log_half +
                            log_norm_pdf(z1) + li);
        }
    }
    if (terms.empty()) return kNegInf;
    return logsumexp(terms);
}

}  // namespace

McEstimate mc_basket_put(const BasketSpec& basket, double strike,
                         std::uint64_t paths, std::uint64_t seed) {
    return mc_plain(basket, strike, paths, seed, false, "mc_basket_put");
}

McEstimate mc_basket_call(const BasketSpec& basket, double strike,
                          std::uint64_t paths, std::uint64_t seed) {
    return mc_plain(basket, strike, paths, seed, true, "mc_basket_call");
}

McEstimate mc_timechanged_put(const TcBasketSpec& spec, double strike,
                              std::uint64_t paths, std::uint64_t seed) {
    return mc_tc(spec, strike, paths, seed, false, "mc_timechanged_put");
}

McEstimate mc_timechanged_call(const TcBasketSpec& spec, double strike,
                               std::uint64_t paths, std::uint64_t seed) {
    return mc_tc(spec, strike, paths, seed, true, "mc_timechanged_call");
}

QuadPrice quad_put_2d(const BasketSpec& two_asset, double strike,
                      int nodes_per_dim) {
    if (two_asset.weights.size() != 2 || two_asset.cov.size() != 2 ||
        two_asset.mu_T.size() != 2) {
        throw DomainError("quad_put_2d: requires a two-asset basket");
    }
    check_strike(strike, "quad_put_2d");
    if (nodes_per_dim < 50 || nodes_per_dim > 400) {
        char msg[96];
        std::snprintf(msg, sizeof(msg),
                      "quad_put_2d: nodes_per_dim must lie in [50, 400], got %d",
                      nodes_per_dim);
        throw DomainError(msg);
    }
    // Conditioning integrates asset 1 outermost; if that leg has zero
    // weight its pinch point degenerates, so flip the (symmetric) basket.
    BasketSpec b = two_asset;
    if (b.mu_T[0] == kNegInf) {
        std::swap(b.weights[0], b.weights[1]);
        std::swap(b.mu_T[0], b.mu_T[1]);
        std::swap(b.cov[0][0], b.cov[1][1]);
        b.sqrt_cov = sqrt_spd(b.cov);
    }
    const Chol2 L = chol2(b.cov);
    const double lp = quad_log_put(b, strike, nodes_per_dim, L);
    const double lp_half = quad_log_put(b, strike, (nodes_per_dim + 1) / 2, L);
    QuadPrice out;
    out.log_price = lp;
    out.price = std::exp(lp);
    if (lp == kNegInf && lp_half == kNegInf) {
        out.doubling_rel_diff = 0.0;
    } else {
        out.doubling_rel_diff = std::abs(std::expm1(lp_half - lp));
    }
    out.precision_warning = !(out.doubling_rel_diff <= 1e-6);
    return out;
}

McEstimate mc_tail_probability(const TcBasketSpec& spec, double k,
                               std::uint64_t paths, std::uint64_t seed,
                               bool tilt) {
    check_tc_mc(spec, "mc_tail_probability");
    check_paths(paths, "mc_tail_probability");
    if (!(k > 0.0) || !std::isfinite(k)) {
        throw DomainError("mc_tail_probability: k must be positive and finite");
    }
    const std::size_t n = spec.basket.weights.size();
    const double threshold = std::exp(-k);

    if (!tilt) {
        return run_mc(paths, seed, kStreamTail, [&](CounterRng& rng) {
            const double tau = sample_timechange(spec.timechange, rng);
            std::vector<double> z(n);
            for (std::size_t i = 0; i < n; ++i) z[i] = rng.normal();
            const double v = tc_terminal_value(spec, tau, z.data(), false);
            return v <= threshold ? 1.0 : 0.0;
        });
    }

    // Importance direction: the saddle says the cheapest way for the basket
    // to crash is log-returns ~ -c* tau B w_bar, which in z-space is the
    // shift -c* sqrt(tau) M w_bar (M the symmetric root of B).
    const SaddlePoint sp =
        saddle_cstar(spec.basket.cov, spec.mu, spec.timechange.tail_theta);
    const Vec dir = mat_vec(spec.basket.sqrt_cov, sp.w_bar);
    const double c_star = sp.c_star;
    return run_mc(paths, seed, kStreamTail, [&](CounterRng& rng) {
        const double tau = sample_timechange(spec.timechange, rng);
        const double scale = -c_star * std::sqrt(tau);
        std::vector<double> z(n);
        double log_w = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double g = rng.normal();
            const double si = scale * dir[i];
            z[i] = g + si;
            log_w -= si * g + 0.5 * si * si;
        }
        const double v = tc_terminal_value(spec, tau, z.data(), false);
        return v <= threshold ? std::exp(log_w) : 0.0;
    });
}

std::vector<IvCurvePoint> empirical_iv_curve(
    const std::function<McEstimate(double)>& pricer,
    const std::vector<double>& k_grid, CurveSide side, double maturity,
    const std::string& source) {
    if (!pricer) throw DomainError("empirical_iv_curve: pricer must be callable");
    if (k_grid.empty()) throw DomainError("empirical_iv_curve: empty k grid");
    if (!(maturity > 0.0) || !std::isfinite(maturity)) {
        throw DomainError("empirical_iv_curve: maturity must be positive");
    }
    for (double k : k_grid) {
        if (!(k >= 0.0) || !std::isfinite(k)) {
            throw DomainError("empirical_iv_curve: k grid must be finite and nonnegative");
        }
    }
    const OptionKind kind = side == CurveSide::left ? OptionKind::put : OptionKind::call;
    std::vector<IvCurvePoint> out;
    out.reserve(k_grid.size());
    for (double k : k_grid) {
        IvCurvePoint pt;
        pt.k = k;
        pt.strike = std::exp(side == CurveSide::left ? -k : k);
        pt.source = source;
        pt.iv = kNaN;
        const McEstimate est = pricer(pt.strike);
        pt.price = est.value;
        pt.noise_floor = est.std_error;
        const bool above_floor = est.value > 0.0 && est.value > 10.0 * est.std_error;
        if (above_floor) {
            try {
                pt.iv = implied_vol_from_log(kind, k, std::log(est.value), maturity);
                pt.usable = true;
            } catch (const Error&) {
                // boundary violation is a per-point condition, not a curve error
                pt.usable = false;
                pt.iv = kNaN;
            }
        }
        out.push_back(std::move(pt));
    }
    return out;
}

}  // namespace bw
