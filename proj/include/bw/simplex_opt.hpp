#pragma once

/// The two optimization kernels behind every asymptotic coefficient:
///
///   * min_quadratic_simplex: minimize w' B w over the probability simplex.
///     Solved exactly by active-set support enumeration for n <= 20 (the
///     paper-realistic basket sizes), projected gradient with an exact
///     final polish above that.
///
///   * saddle_cstar: the min-max constant c* = min_{t>0} max_{w in simplex}
///     { theta t + (1 + t mu'w)^2 / (2 w'Bw t) }, solved through the dual:
///     for each t the inner max reduces to a nonnegativity-constrained
///     concave quadratic in u with w = u / |u|_1.

#include "bw/linalg.hpp"

#include <vector>

namespace bw {

struct SimplexSolution {
    Vec w_bar;                 // minimizer, in the simplex
    double value;              // w_bar' B w_bar
    std::vector<int> support;  // indices with w_bar_i > 0, ascending
    int n_bar;                 // support cardinality
    Mat B_bar;                 // covariance restricted to the support
    Vec A_row_sums;            // row sums of inv(B_bar), one per support index
};

/// Global minimizer of w' cov w over the simplex, with KKT certificate:
/// (cov w)_i equals the value on the support and is >= value off it.
/// Throws MatrixError for non-symmetric, non-PD, or condition > 1e12 input.
SimplexSolution min_quadratic_simplex(const Mat& cov);

struct InnerMax {
    double value;              // max_w F(t, w)
    Vec w;                     // maximizer in the simplex
    Vec u_bar;                 // dual vector, u >= 0, w = u / |u|_1
    std::vector<int> support;  // indices with u_i > 0
};

/// Inner maximization at fixed t > 0. When 1 + mu_i t <= 0 for every i the
/// dual vanishes; the value is theta*t and w is reported uniform.
InnerMax inner_max_weights(const Mat& cov, const Vec& drift, double theta, double t);

struct SaddlePoint {
    double c_star;
    double t_bar;
    Vec w_bar;
    Vec u_bar;
};

/// Full saddle solve: inner dual active-set per t, outer bracketed golden
/// section on the strictly convex profile followed by Newton polish.
SaddlePoint saddle_cstar(const Mat& cov, const Vec& drift, double theta);

}  // namespace bw
