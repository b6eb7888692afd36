#include "bw/simplex_opt.hpp"
#include "bw/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace bw {

namespace {

constexpr double kCondLimit = 1e12;  // paper assumes non-degeneracy; reject beyond

Mat submatrix(const Mat& a, const std::vector<int>& idx) {
    Mat s(idx.size(), Vec(idx.size()));
    for (std::size_t i = 0; i < idx.size(); ++i)
        for (std::size_t j = 0; j < idx.size(); ++j) s[i][j] = a[idx[i]][idx[j]];
    return s;
}

// Euclidean projection onto the probability simplex (sort-based).
Vec project_simplex(Vec v) {
    Vec u = v;
    std::sort(u.begin(), u.end(), std::greater<double>());
    double css = 0.0, tau = 0.0;
    int rho = 0;
    for (std::size_t j = 0; j < u.size(); ++j) {
        css += u[j];
        const double t = (css - 1.0) / (j + 1.0);
        if (u[j] - t > 0.0) {
            rho = static_cast<int>(j) + 1;
            tau = t;
        }
    }
    (void)rho;
    for (double& x : v) x = std::max(x - tau, 0.0);
    return v;
}

// Active-set refinement from a starting support. Exact for SPD inputs;
// ties in entering/leaving indices break toward the smallest index so a
// given input always returns the identical support.
SimplexSolution active_set_solve(const Mat& cov, std::vector<int> support) {
    const int n = static_cast<int>(cov.size());
    SimplexSolution sol;
    for (int iter = 0; iter < 1000; ++iter) {
        const Mat b_sub = submatrix(cov, support);
        const Vec y = solve_spd(b_sub, Vec(support.size(), 1.0));
        // drop the most negative multiplier first
        int drop = -1;
        double worst = 0.0;
        for (std::size_t j = 0; j < y.size(); ++j)
            if (y[j] < worst) {
                worst = y[j];
                drop = static_cast<int>(j);
            }
        if (drop >= 0) {
            support.erase(support.begin() + drop);
            if (support.empty())
                throw OptimizationError("min_quadratic_simplex: support emptied");
            continue;
        }
        const double ysum = std::accumulate(y.begin(), y.end(), 0.0);
        if (!(ysum > 0.0))
            throw OptimizationError("min_quadratic_simplex: degenerate support sum");
        Vec w(n, 0.0);
        for (std::size_t j = 0; j < support.size(); ++j) w[support[j]] = y[j] / ysum;
        const double value = quad_form(cov, w);
        // KKT off the support: (cov w)_i >= value
        const Vec g = mat_vec(cov, w);
        int enter = -1;
        double viol = 1e-12 * std::max(1.0, std::abs(value));
        for (int i = 0; i < n; ++i) {
            if (std::find(support.begin(), support.end(), i) != support.end()) continue;
            if (value - g[i] > viol) {
                viol = value - g[i];
                enter = i;
            }
        }
        if (enter >= 0) {
            support.insert(std::upper_bound(support.begin(), support.end(), enter), enter);
            continue;
        }
        sol.w_bar = std::move(w);
        sol.value = value;
        sol.support.clear();
        for (int i : support)
            if (sol.w_bar[i] > 0.0) sol.support.push_back(i);
        sol.n_bar = static_cast<int>(sol.support.size());
        sol.B_bar = submatrix(cov, sol.support);
        sol.A_row_sums = solve_spd(sol.B_bar, Vec(sol.support.size(), 1.0));
        return sol;
    }
    throw OptimizationError("min_quadratic_simplex: active set did not settle");
}

}  // namespace

SimplexSolution min_quadratic_simplex(const Mat& cov) {
    const int n = static_cast<int>(cov.size());
    if (n == 0) throw DomainError("min_quadratic_simplex: empty matrix");
    chol_factor(cov);  // symmetry + positive definiteness
    if (cond_spd(cov) > kCondLimit)
        throw MatrixError("min_quadratic_simplex: condition number beyond 1e12");

    std::vector<int> seed(n);
    std::iota(seed.begin(), seed.end(), 0);
    if (n > 20) {
        // projected gradient to locate the support, then exact polish
        Vec w(n, 1.0 / n);
        double lmax = 0.0;
        for (int i = 0; i < n; ++i) lmax += cov[i][i];
        const double step = 1.0 / (2.0 * lmax);
        for (int it = 0; it < 200000; ++it) {
            const Vec g = mat_vec(cov, w);
            Vec next(n);
            for (int i = 0; i < n; ++i) next[i] = w[i] - 2.0 * step * g[i];
            next = project_simplex(std::move(next));
            double delta = 0.0;
            for (int i = 0; i < n; ++i) delta = std::max(delta, std::abs(next[i] - w[i]));
            w = std::move(next);
            if (delta < 1e-13) break;
        }
        seed.clear();
        for (int i = 0; i < n; ++i)
            if (w[i] > 1e-10) seed.push_back(i);
        if (seed.empty()) seed.assign(1, 0);
    }
    return active_set_solve(cov, seed);
}

InnerMax inner_max_weights(const Mat& cov, const Vec& drift, double theta, double t) {
    const int n = static_cast<int>(cov.size());
    if (!(t > 0.0)) throw DomainError("inner_max_weights: t must be > 0");
    if (drift.size() != cov.size())
        throw DomainError("inner_max_weights: drift dimension mismatch");

    Vec c(n);
    std::vector<int> support;
    for (int i = 0; i < n; ++i) {
        c[i] = 1.0 + drift[i] * t;
        if (c[i] > 0.0) support.push_back(i);
    }
    InnerMax out;
    out.u_bar.assign(n, 0.0);
    out.w.assign(n, 1.0 / n);
    out.value = theta * t;
    if (support.empty()) return out;  // dual vanishes; F = theta t

    for (int iter = 0; iter < 1000; ++iter) {
        const Mat b_sub = submatrix(cov, support);
        Vec c_sub(support.size());
        for (std::size_t j = 0; j < support.size(); ++j) c_sub[j] = c[support[j]];
        Vec u_sub = solve_spd(b_sub, c_sub);
        for (double& u : u_sub) u /= t;
        int drop = -1;
        double worst = 0.0;
        for (std::size_t j = 0; j < u_sub.size(); ++j)
            if (u_sub[j] < worst) {
                worst = u_sub[j];
                drop = static_cast<int>(j);
            }
        if (drop >= 0) {
            support.erase(support.begin() + drop);
            if (support.empty()) return out;
            continue;
        }
        Vec u(n, 0.0);
        for (std::size_t j = 0; j < support.size(); ++j) u[support[j]] = u_sub[j];
        // off-support optimality: c_i - t (B u)_i <= 0
        const Vec bu = mat_vec(cov, u);
        int enter = -1;
        double viol = 1e-12 * std::max(1.0, std::abs(c[0]));
        for (int i = 0; i < n; ++i) {
            if (std::find(support.begin(), support.end(), i) != support.end()) continue;
            const double slack = c[i] - t * bu[i];
            if (slack > viol) {
                viol = slack;
                enter = i;
            }
        }
        if (enter >= 0) {
            support.insert(std::upper_bound(support.begin(), support.end(), enter), enter);
            continue;
        }
        const double usum = std::accumulate(u.begin(), u.end(), 0.0);
        if (!(usum > 0.0)) return out;
        out.u_bar = u;
        out.support.clear();
        for (int i : support)
            if (u[i] > 0.0) out.support.push_back(i);
        for (int i = 0; i < n; ++i) out.w[i] = u[i] / usum;
        // F~(t,u) at the constrained optimum: theta t + u'c/2
        out.value = theta * t + 0.5 * dot(u, c);
        return out;
    }
    throw OptimizationError("inner_max_weights: active set did not settle");
}

namespace {

struct Profile {
    const Mat& cov;
    const Vec& drift;
    double theta;

    InnerMax at(double t) const { return inner_max_weights(cov, drift, theta, t); }

    double value(double t) const { return at(t).value; }

    double deriv(double t, const InnerMax& im) const {
        // f'(t) = theta - u'(1 - mu t)/(2t)
        double s = 0.0;
        for (std::size_t i = 0; i < im.u_bar.size(); ++i)
            s += im.u_bar[i] * (1.0 - drift[i] * t);
        return theta - s / (2.0 * t);
    }

    double second(double t, const InnerMax& im) const {
        // f''(t) = (1/t^3) 1' inv(B_bar) 1 over the active support
        if (im.support.empty()) return 0.0;
        const Mat b_sub = submatrix(cov, im.support);
        const Vec y = solve_spd(b_sub, Vec(im.support.size(), 1.0));
        return std::accumulate(y.begin(), y.end(), 0.0) / (t * t * t);
    }
};

}  // namespace

SaddlePoint saddle_cstar(const Mat& cov, const Vec& drift, double theta) {
    if (!(theta > 0.0)) throw DomainError("saddle_cstar: theta must be > 0");
    chol_factor(cov);
    if (cond_spd(cov) > kCondLimit)
        throw MatrixError("saddle_cstar: condition number beyond 1e12");
    const Profile prof{cov, drift, theta};

    // bracket a sign change of f' around the minimum; f is strictly convex
    double a = 1.0, b = 1.0;
    if (prof.deriv(1.0, prof.at(1.0)) > 0.0) {
        for (int i = 0; i < 400 && prof.deriv(a, prof.at(a)) > 0.0; ++i) a *= 0.5;
        if (prof.deriv(a, prof.at(a)) > 0.0)
            throw OptimizationError("saddle_cstar: failed to bracket minimum");
    } else {
        for (int i = 0; i < 400 && prof.deriv(b, prof.at(b)) <= 0.0; ++i) b *= 2.0;
        if (prof.deriv(b, prof.at(b)) <= 0.0)
            throw OptimizationError("saddle_cstar: failed to bracket minimum");
    }

    // golden section on the convex profile down to an interval of 1e-8
    const double gr = 0.6180339887498948482;
    double x1 = b - gr * (b - a), x2 = a + gr * (b - a);
    double f1 = prof.value(x1), f2 = prof.value(x2);
    while (b - a > 1e-8 * std::max(1.0, b)) {
        if (f1 <= f2) {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - gr * (b - a);
            f1 = prof.value(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + gr * (b - a);
            f2 = prof.value(x2);
        }
    }

    double t = 0.5 * (a + b);
    for (int it = 0; it < 5; ++it) {
        const InnerMax im = prof.at(t);
        const double d1 = prof.deriv(t, im);
        const double d2 = prof.second(t, im);
        if (!(d2 > 0.0)) break;
        double next = t - d1 / d2;
        if (!(next > 0.5 * a && next < 2.0 * b)) break;
        if (std::abs(next - t) < 1e-15 * t) {
            t = next;
            break;
        }
        t = next;
    }

    const InnerMax im = prof.at(t);
    SaddlePoint sp;
    sp.c_star = im.value;
    sp.t_bar = t;
    sp.w_bar = im.w;
    sp.u_bar = im.u_bar;
    double mw = 0.0;
    for (std::size_t i = 0; i < sp.w_bar.size(); ++i) mw += drift[i] * sp.w_bar[i];
    if (!(1.0 + t * mw > 0.0))
        throw OptimizationError("saddle_cstar: sign condition 1 + t mu'w > 0 failed");
    return sp;
}

}  // namespace bw
