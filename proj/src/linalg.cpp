#include "bw/linalg.hpp"
#include "bw/errors.hpp"

#include <algorithm>
#include <cmath>

namespace bw {

Mat identity(std::size_t n) {
    Mat a(n, Vec(n, 0.0));
    for (std::size_t i = 0; i < n; ++i) a[i][i] = 1.0;
    return a;
}

Vec mat_vec(const Mat& a, const Vec& x) {
    const std::size_t n = a.size();
    Vec y(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        long double s = 0.0L;
        for (std::size_t j = 0; j < n; ++j) s += static_cast<long double>(a[i][j]) * x[j];
        y[i] = static_cast<double>(s);
    }
    return y;
}

double dot(const Vec& a, const Vec& b) {
    long double s = 0.0L;
    for (std::size_t i = 0; i < a.size(); ++i) s += static_cast<long double>(a[i]) * b[i];
    return static_cast<double>(s);
}

double quad_form(const Mat& a, const Vec& w) {
    long double s = 0.0L;
    const std::size_t n = a.size();
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            s += static_cast<long double>(w[i]) * a[i][j] * w[j];
    return static_cast<double>(s);
}

Mat chol_factor(const Mat& a) {
    const std::size_t n = a.size();
    double scale = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        if (a[i].size() != n) throw MatrixError("chol_factor: matrix not square");
        scale = std::max(scale, std::abs(a[i][i]));
    }
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j)
            if (std::abs(a[i][j] - a[j][i]) > 1e-12 * std::max(1.0, scale))
                throw MatrixError("chol_factor: matrix not symmetric");

    Mat L(n, Vec(n, 0.0));
    for (std::size_t j = 0; j < n; ++j) {
        long double d = a[j][j];
        for (std::size_t k = 0; k < j; ++k) d -= static_cast<long double>(L[j][k]) * L[j][k];
        if (!(d > 0.0L)) throw MatrixError("chol_factor: matrix not positive definite");
        L[j][j] = static_cast<double>(sqrtl(d));
        for (std::size_t i = j + 1; i < n; ++i) {
            long double s = a[i][j];
            for (std::size_t k = 0; k < j; ++k) s -= static_cast<long double>(L[i][k]) * L[j][k];
            L[i][j] = static_cast<double>(s / L[j][j]);
        }
    }
    return L;
}

Vec chol_solve(const Mat& L, const Vec& b) {
    const std::size_t n = L.size();
    Vec y(n), x(n);
    for (std::size_t i = 0; i < n; ++i) {
        long double s = b[i];
        for (std::size_t k = 0; k < i; ++k) s -= static_cast<long double>(L[i][k]) * y[k];
        y[i] = static_cast<double>(s / L[i][i]);
    }
    for (std::size_t ii = n; ii-- > 0;) {
        long double s = y[ii];
        for (std::size_t k = ii + 1; k < n; ++k) s -= static_cast<long double>(L[k][ii]) * x[k];
        x[ii] = static_cast<double>(s / L[ii][ii]);
    }
    return x;
}

Vec solve_spd(const Mat& a, const Vec& b) {
    const Mat L = chol_factor(a);
    Vec x = chol_solve(L, b);
    // one refinement pass with an extended-precision residual
    const std::size_t n = a.size();
    for (int pass = 0; pass < 2; ++pass) {
        Vec r(n);
        for (std::size_t i = 0; i < n; ++i) {
            long double s = b[i];
            for (std::size_t j = 0; j < n; ++j) s -= static_cast<long double>(a[i][j]) * x[j];
            r[i] = static_cast<double>(s);
        }
        const Vec dx = chol_solve(L, r);
        for (std::size_t i = 0; i < n; ++i) x[i] += dx[i];
    }
    return x;
}

double det_from_chol(const Mat& L) {
    long double d = 1.0L;
    for (std::size_t i = 0; i < L.size(); ++i) d *= static_cast<long double>(L[i][i]) * L[i][i];
    return static_cast<double>(d);
}

EigenSym jacobi_eigen(const Mat& a_in) {
    const std::size_t n = a_in.size();
    Mat a = a_in;
    Mat v = identity(n);
    for (int sweep = 0; sweep < 100; ++sweep) {
        double off = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = i + 1; j < n; ++j) off += a[i][j] * a[i][j];
        if (off < 1e-300) break;
        for (std::size_t p = 0; p < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                if (a[p][q] == 0.0) continue;
                const double theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                                 (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;
                for (std::size_t k = 0; k < n; ++k) {
                    const double akp = a[k][p], akq = a[k][q];
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for (std::size_t k = 0; k < n; ++k) {
                    const double apk = a[p][k], aqk = a[q][k];
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
                for (std::size_t k = 0; k < n; ++k) {
                    const double vkp = v[k][p], vkq = v[k][q];
                    v[k][p] = c * vkp - s * vkq;
                    v[k][q] = s * vkp + c * vkq;
                }
            }
        }
    }
    EigenSym out;
    out.values.resize(n);
    out.vectors.assign(n, Vec(n));
    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    std::sort(order.begin(), order.end(),
              [&](std::size_t i, std::size_t j) { return a[i][i] < a[j][j]; });
    for (std::size_t k = 0; k < n; ++k) {
        out.values[k] = a[order[k]][order[k]];
        for (std::size_t i = 0; i < n; ++i) out.vectors[k][i] = v[i][order[k]];
    }
    return out;
}

Mat sqrt_spd(const Mat& a) {
    const EigenSym es = jacobi_eigen(a);
    const std::size_t n = a.size();
    for (double lam : es.values)
        if (!(lam > 0.0)) throw MatrixError("sqrt_spd: matrix not positive definite");
    Mat s(n, Vec(n, 0.0));
    for (std::size_t k = 0; k < n; ++k) {
        const double rl = std::sqrt(es.values[k]);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j)
                s[i][j] += rl * es.vectors[k][i] * es.vectors[k][j];
    }
    return s;
}

double cond_spd(const Mat& a) {
    const EigenSym es = jacobi_eigen(a);
    const double lo = es.values.front(), hi = es.values.back();
    if (!(lo > 0.0)) throw MatrixError("cond_spd: matrix not positive definite");
    return hi / lo;
}

}  // namespace bw
