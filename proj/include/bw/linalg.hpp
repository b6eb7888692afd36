#pragma once

#include <vector>

namespace bw {

/// Dense row-major square matrix; all baskets here have n <= 20, so the
/// naive representation and O(n^3) algorithms are the right tool.
using Mat = std::vector<std::vector<double>>;
using Vec = std::vector<double>;

Mat identity(std::size_t n);
Vec mat_vec(const Mat& a, const Vec& x);
double dot(const Vec& a, const Vec& b);
double quad_form(const Mat& a, const Vec& w);  // w' A w

/// Cholesky factor L (lower, A = L L'). Throws MatrixError when the input
/// is not symmetric (to 1e-12 relative) or not positive definite.
Mat chol_factor(const Mat& a);

/// Solve A x = b given the Cholesky factor of A.
Vec chol_solve(const Mat& L, const Vec& b);

/// Solve A x = b for SPD A with one pass of extended-precision iterative
/// refinement, good for the 1e-12-level optimality identities downstream.
Vec solve_spd(const Mat& a, const Vec& b);

double det_from_chol(const Mat& L);

struct EigenSym {
    Vec values;   // ascending
    Mat vectors;  // vectors[k] is the eigenvector for values[k]
};

/// Cyclic Jacobi eigensolver for symmetric matrices.
EigenSym jacobi_eigen(const Mat& a);

/// Principal square root of an SPD matrix.
Mat sqrt_spd(const Mat& a);

/// 2-norm condition number lambda_max / lambda_min of an SPD matrix.
double cond_spd(const Mat& a);

}  // namespace bw
