#include "bw/quadrature.hpp"
#include "bw/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <mutex>

namespace bw {

namespace {
constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr double kPi = 3.14159265358979323846;
}

double logaddexp(double a, double b) {
    if (a == kNegInf) return b;
    if (b == kNegInf) return a;
    const double m = std::max(a, b);
    return m + std::log1p(std::exp(std::min(a, b) - m));
}

double logsumexp(const std::vector<double>& v) {
    double m = kNegInf;
    for (double x : v) m = std::max(m, x);
    if (m == kNegInf) return kNegInf;
    long double s = 0.0L;
    for (double x : v) s += expl(static_cast<long double>(x - m));
    return m + static_cast<double>(logl(s));
}

// ---------------------------------------------------------------------------
// Gauss-Hermite
// ---------------------------------------------------------------------------

namespace {

// Orthonormal Hermite recurrence w.r.t. exp(-x^2), evaluated with explicit
// rescaling so that values like p_k(27) ~ exp(360) never overflow.
// Returns log|p_{n}|, sign, and log|p_{n-1}| at x, plus the log of the
// Christoffel sum  sum_{k<n} p_k(x)^2.
struct HermEval {
    double log_pn;
    double sign_pn;
    double log_pn1;
    double sign_pn1;
    double log_christoffel;
};

HermEval herm_eval(int n, double x) {
    constexpr double pi_m4 = 0.75112554446494248285870300477623;  // pi^(-1/4)
    double pk = pi_m4;       // p_0
    double pk1 = 0.0;        // p_{-1}
    double scale_log = 0.0;  // true p = stored p * exp(scale_log)
    double chris_m = kNegInf;
    long double chris_s = 0.0L;
    auto chris_add = [&](double log_p2) {
        if (log_p2 == kNegInf) return;
        if (log_p2 > chris_m) {
            chris_s = chris_s * expl(static_cast<long double>(chris_m - log_p2)) + 1.0L;
            chris_m = log_p2;
        } else {
            chris_s += expl(static_cast<long double>(log_p2 - chris_m));
        }
    };
    chris_add(2.0 * std::log(pi_m4));
    for (int k = 0; k < n; ++k) {
        const double pnext =
            x * std::sqrt(2.0 / (k + 1)) * pk - std::sqrt(double(k) / (k + 1)) * pk1;
        pk1 = pk;
        pk = pnext;
        const double mag = std::max(std::abs(pk), std::abs(pk1));
        if (mag > 1e120) {
            pk *= 1e-120;
            pk1 *= 1e-120;
            scale_log += std::log(1e120);
        } else if (mag > 0.0 && mag < 1e-120) {
            pk *= 1e120;
            pk1 *= 1e120;
            scale_log -= std::log(1e120);
        }
        if (k + 1 < n)
            chris_add(pk == 0.0 ? kNegInf : 2.0 * (std::log(std::abs(pk)) + scale_log));
    }
    HermEval e;
    e.log_pn = pk == 0.0 ? kNegInf : std::log(std::abs(pk)) + scale_log;
    e.sign_pn = pk >= 0.0 ? 1.0 : -1.0;
    e.log_pn1 = pk1 == 0.0 ? kNegInf : std::log(std::abs(pk1)) + scale_log;
    e.sign_pn1 = pk1 >= 0.0 ? 1.0 : -1.0;
    e.log_christoffel = chris_m + static_cast<double>(logl(chris_s));
    return e;
}

GaussHermite build_gauss_hermite(int n) {
    if (n < 1 || n > 2000) throw DomainError("gauss_hermite: n out of range");
    GaussHermite gh;
    gh.nodes.assign(n, 0.0);
    gh.log_weights.assign(n, kNegInf);
    const int m = (n + 1) / 2;
    // Roots found largest first by sign-bracketed bisection. The walk step
    // stays below the minimal root gap pi / sqrt(2n) (semicircle density),
    // so no sign change can be skipped; Newton seeds are not trusted here
    // because an unlucky seed near a p_{n-1} root throws the iteration
    // across several intervals.
    const double step = 0.35 * kPi / std::sqrt(2.0 * n + 1.0);
    double prev_root = std::sqrt(2.0 * n + 1.0) + 1.0;  // above the largest root
    bool prev_is_bound = true;
    for (int i = 0; i < m; ++i) {
        double b = prev_is_bound ? prev_root : prev_root - 0.1 * step;
        HermEval eb = herm_eval(n, b);
        while (eb.log_pn == kNegInf) {  // nudged onto a root: back off
            b += 0.05 * step;
            eb = herm_eval(n, b);
        }
        const double sb = eb.sign_pn;
        double a = b;
        bool exact = false;
        for (int walk = 0; walk < 100000; ++walk) {
            a -= step;
            const HermEval ea = herm_eval(n, a);
            if (ea.log_pn == kNegInf) {
                exact = true;
                break;
            }
            if (ea.sign_pn != sb) break;
        }
        double z = a;
        if (!exact) {
            for (int it = 0; it < 110; ++it) {
                const double mid = 0.5 * (a + b);
                if (mid == a || mid == b) break;
                const HermEval em = herm_eval(n, mid);
                if (em.log_pn == kNegInf) {
                    a = b = mid;
                    break;
                }
                if (em.sign_pn == sb) {
                    b = mid;
                } else {
                    a = mid;
                }
            }
            z = 0.5 * (a + b);
        }
        const HermEval e = herm_eval(n, z);
        const double logw = -e.log_christoffel;
        gh.nodes[n - 1 - i] = z;
        gh.log_weights[n - 1 - i] = logw;
        gh.nodes[i] = -z;
        gh.log_weights[i] = logw;
        prev_root = z;
        prev_is_bound = false;
    }
    if (n % 2 == 1) gh.nodes[n / 2] = 0.0;  // exact symmetry for the middle node
    return gh;
}

std::map<int, GaussHermite> g_gh_cache;
std::mutex g_gh_mutex;

}  // namespace

const GaussHermite& gauss_hermite(int n) {
    std::lock_guard<std::mutex> lock(g_gh_mutex);
    auto it = g_gh_cache.find(n);
    if (it == g_gh_cache.end()) it = g_gh_cache.emplace(n, build_gauss_hermite(n)).first;
    return it->second;
}

namespace {

GaussLegendre build_gauss_legendre(int q) {
    if (q < 1 || q > 1000) throw DomainError("gauss_legendre: order out of range");
    GaussLegendre gl;
    gl.nodes.assign(q, 0.0);
    gl.weights.assign(q, 0.0);
    const int half = (q + 1) / 2;
    for (int k = 0; k < half; ++k) {
        double x = std::cos(kPi * (k + 0.75) / (q + 0.5));
        double dp = 0.0;
        for (int iter = 0; iter < 100; ++iter) {
            double p0 = 1.0, p1 = x;
            for (int j = 2; j <= q; ++j) {
                const double p2 = ((2.0 * j - 1.0) * x * p1 - (j - 1.0) * p0) / j;
                p0 = p1;
                p1 = p2;
            }
            dp = q * (x * p1 - p0) / (x * x - 1.0);
            const double step = p1 / dp;
            x -= step;
            if (std::abs(step) < 1e-15) break;
        }
        const double w = 2.0 / ((1.0 - x * x) * dp * dp);
        gl.nodes[k] = -x;
        gl.weights[k] = w;
        gl.nodes[q - 1 - k] = x;
        gl.weights[q - 1 - k] = w;
    }
    if (q % 2 == 1) gl.nodes[q / 2] = 0.0;
    return gl;
}

std::map<int, GaussLegendre> g_gl_cache;
std::mutex g_gl_mutex;

}  // namespace

const GaussLegendre& gauss_legendre(int q) {
    std::lock_guard<std::mutex> lock(g_gl_mutex);
    auto it = g_gl_cache.find(q);
    if (it == g_gl_cache.end()) it = g_gl_cache.emplace(q, build_gauss_legendre(q)).first;
    return it->second;
}

// ---------------------------------------------------------------------------
// Adaptive Gauss-Kronrod in log space
// ---------------------------------------------------------------------------

namespace {

// 15-point Kronrod nodes/weights with embedded 7-point Gauss (QUADPACK).
constexpr double kXgk[8] = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144838258730, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
constexpr double kWgk[8] = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
constexpr double kWg[4] = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct PanelResult {
    double log_kronrod;
    double rel_err;  // |gauss - kronrod| / kronrod
};

PanelResult gk15_log(const LogFn& f, double a, double b) {
    const double c = 0.5 * (a + b), h = 0.5 * (b - a);
    double lf[15];
    for (int j = 0; j < 7; ++j) {
        lf[j] = f(c - h * kXgk[j]);
        lf[14 - j] = f(c + h * kXgk[j]);
    }
    lf[7] = f(c);
    std::vector<double> k_terms, g_terms;
    k_terms.reserve(15);
    g_terms.reserve(7);
    for (int j = 0; j < 15; ++j)
        k_terms.push_back(std::log(kWgk[7 - std::abs(j - 7)]) + lf[j]);
    for (int j = 0; j < 7; ++j) {
        const int node = 2 * j + 1;  // Gauss nodes are the odd Kronrod nodes
        g_terms.push_back(std::log(kWg[j < 4 ? j : 6 - j]) + lf[node]);
    }
    PanelResult r;
    r.log_kronrod = logsumexp(k_terms) + std::log(h);
    const double log_gauss = logsumexp(g_terms) + std::log(h);
    if (r.log_kronrod == kNegInf) {
        r.rel_err = 0.0;
    } else {
        r.rel_err = std::abs(std::expm1(log_gauss - r.log_kronrod));
    }
    return r;
}

// running is the log of the mass accepted so far across the whole call;
// the larger child is refined first so that it fills in early and panels
// far below it can be accepted without resolving them.
void integrate_rec(const LogFn& f, double a, double b, const PanelResult& pr,
                   double rel_tol, int depth, std::vector<double>& panels,
                   double& running) {
    // The Gauss/Kronrod comparison happens in log space, so it cannot
    // resolve relative differences below the rounding of the log value
    // itself; with |log f| in the thousands that floor is ~1e-10, and
    // refining past it just chases roundoff noise.
    const double floor = 128.0 * std::numeric_limits<double>::epsilon() *
                         std::max(1.0, std::abs(pr.log_kronrod));
    const double accept = std::max(0.1 * rel_tol, floor);
    const bool negligible = pr.log_kronrod < running - 46.0;
    if (pr.rel_err < accept || negligible || depth >= 48) {
        if (depth >= 48 && !negligible &&
            pr.rel_err > std::max(rel_tol, 10.0 * floor))
            throw IntegrationError("log_integrate: panel refinement stalled");
        running = logaddexp(running, pr.log_kronrod);
        panels.push_back(pr.log_kronrod);
        return;
    }
    const double c = 0.5 * (a + b);
    const PanelResult left = gk15_log(f, a, c);
    const PanelResult right = gk15_log(f, c, b);
    if (left.log_kronrod >= right.log_kronrod) {
        integrate_rec(f, a, c, left, rel_tol, depth + 1, panels, running);
        integrate_rec(f, c, b, right, rel_tol, depth + 1, panels, running);
    } else {
        integrate_rec(f, c, b, right, rel_tol, depth + 1, panels, running);
        integrate_rec(f, a, c, left, rel_tol, depth + 1, panels, running);
    }
}

}  // namespace

double log_integrate(const LogFn& f_log, double a, double b, double rel_tol) {
    if (!(b > a)) throw DomainError("log_integrate: need b > a");
    std::vector<double> panels;
    double running = kNegInf;
    integrate_rec(f_log, a, b, gk15_log(f_log, a, b), rel_tol, 0, panels, running);
    return logsumexp(panels);
}

double log_integrate_semi(const LogFn& f_log, double endpoint, int dir, double rel_tol,
                          double first_width) {
    if (dir == 0) throw DomainError("log_integrate_semi: dir must be +-1");
    const double sgn = dir > 0 ? 1.0 : -1.0;
    double total = kNegInf;
    double width = first_width;
    double lo = endpoint;
    double prev_panel = kNegInf;
    int flat_count = 0;
    for (int j = 0; j < 200; ++j) {
        const double hi = lo + sgn * width;
        const double pa = std::min(lo, hi), pb = std::max(lo, hi);
        std::vector<double> panels;
        double running = total;
        integrate_rec(f_log, pa, pb, gk15_log(f_log, pa, pb), rel_tol, 0, panels,
                      running);
        const double lp = logsumexp(panels);
        total = logaddexp(total, lp);
        // Tail control: stop once panel contributions decay and are far
        // below the running total; complain if they refuse to decay.
        if (lp < total - 46.0 && lp <= prev_panel) return total;
        if (j > 4 && lp >= prev_panel && lp > total - 46.0) {
            if (++flat_count > 12)
                throw IntegrationError("log_integrate_semi: tail does not decay");
        } else {
            flat_count = 0;
        }
        prev_panel = lp;
        lo = hi;
        if (j > 0) width *= 2.0;
    }
    throw IntegrationError("log_integrate_semi: tail bound not reached");
}

}  // namespace bw
