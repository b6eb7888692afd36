#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "bw/errors.hpp"
#include "bw/linalg.hpp"
#include "bw/simplex_opt.hpp"

#include <cmath>
#include <cstring>
#include <random>
#include <vector>

using bw::Mat;
using bw::Vec;

namespace {

Mat cov2(double s1, double s2, double rho) {
    return {{s1 * s1, rho * s1 * s2}, {rho * s1 * s2, s2 * s2}};
}

Mat random_spd(std::mt19937_64& rng, int n, double jitter) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    Mat a(n, Vec(n));
    for (auto& row : a)
        for (double& x : row) x = u(rng);
    Mat b(n, Vec(n, 0.0));
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            for (int k = 0; k < n; ++k) b[i][j] += a[k][i] * a[k][j];
            if (i == j) b[i][j] += jitter;
        }
    return b;
}

// two-stage grid refinement of min w'Bw over the simplex, n = 2
double grid_min_n2(const Mat& b) {
    auto val = [&](double w1) {
        const Vec w{w1, 1.0 - w1};
        return bw::quad_form(b, w);
    };
    double best_w = 0.0, best = val(0.0);
    double lo = 0.0, hi = 1.0, step = 1e-3;
    for (int stage = 0; stage < 3; ++stage) {
        for (double w1 = lo; w1 <= hi + 0.5 * step; w1 += step) {
            const double v = val(std::min(w1, 1.0));
            if (v < best) {
                best = v;
                best_w = std::min(w1, 1.0);
            }
        }
        lo = std::max(0.0, best_w - step);
        hi = std::min(1.0, best_w + step);
        step *= 1e-2;
    }
    return best;
}

double grid_min_n3(const Mat& b) {
    // outer staged grid over w1; the restriction to fixed w1 is a 1-D
    // quadratic in w2 whose coefficients follow from three evaluations
    auto val = [&](double w1, double w2) {
        const Vec w{w1, w2, 1.0 - w1 - w2};
        return bw::quad_form(b, w);
    };
    auto line_min = [&](double w1) {
        const double m = 1.0 - w1;
        const double g0 = val(w1, 0.0);
        if (m <= 0.0) return g0;
        const double g1 = val(w1, 0.5 * m), g2 = val(w1, m);
        const double a = 2.0 * (g2 - 2.0 * g1 + g0) / (m * m);
        const double lin = (4.0 * g1 - 3.0 * g0 - g2) / m;
        double best = std::min(g0, g2);
        if (a > 0.0) {
            const double s = std::min(m, std::max(0.0, -lin / (2.0 * a)));
            best = std::min(best, val(w1, s));
        }
        return best;
    };
    double best_w = 0.5, best = line_min(0.5);
    double lo = 0.0, hi = 1.0, step = 1e-3;
    for (int stage = 0; stage < 3; ++stage) {
        for (double w1 = lo; w1 <= hi + 0.5 * step; w1 += step) {
            const double v = line_min(std::min(w1, 1.0));
            if (v < best) {
                best = v;
                best_w = std::min(w1, 1.0);
            }
        }
        lo = std::max(0.0, best_w - step);
        hi = std::min(1.0, best_w + step);
        step *= 1e-2;
    }
    return best;
}

// inner maximum over the weight simplex at fixed t, n = 2, by refinement
double grid_inner_n2(const Mat& b, const Vec& mu, double theta, double t) {
    auto val = [&](double w1) {
        const Vec w{w1, 1.0 - w1};
        const double m = mu[0] * w1 + mu[1] * (1.0 - w1);
        const double q = bw::quad_form(b, w);
        const double lin = 1.0 + t * m;
        if (lin <= 0.0) return theta * t;
        return theta * t + lin * lin / (2.0 * q * t);
    };
    double best_w = 0.5, best = val(0.5);
    double lo = 0.0, hi = 1.0, step = 1e-3;
    for (int stage = 0; stage < 3; ++stage) {
        for (double w1 = lo; w1 <= hi + 0.5 * step; w1 += step) {
            const double v = val(std::min(w1, 1.0));
            if (v > best) {
                best = v;
                best_w = std::min(w1, 1.0);
            }
        }
        lo = std::max(0.0, best_w - step);
        hi = std::min(1.0, best_w + step);
        step *= 1e-2;
    }
    return best;
}

void check_kkt(const Mat& b, const bw::SimplexSolution& sol, double tol) {
    const Vec g = bw::mat_vec(b, sol.w_bar);
    double wsum = 0.0;
    for (double w : sol.w_bar) {
        CHECK(w >= 0.0);
        wsum += w;
    }
    CHECK(wsum == doctest::Approx(1.0).epsilon(1e-13));
    for (std::size_t i = 0; i < g.size(); ++i) {
        if (sol.w_bar[i] > 0.0)
            CHECK(std::abs(g[i] - sol.value) <= tol * std::max(1.0, std::abs(sol.value)));
        else
            CHECK(g[i] - sol.value >= -tol * std::max(1.0, std::abs(sol.value)));
    }
}

}  // namespace

TEST_CASE("simplex minimum: identity covariance spreads weight uniformly") {
    const auto sol = bw::min_quadratic_simplex(bw::identity(3));
    CHECK(sol.value == doctest::Approx(1.0 / 3).epsilon(1e-15));
    CHECK(sol.n_bar == 3);
    for (double w : sol.w_bar) CHECK(w == doctest::Approx(1.0 / 3).epsilon(1e-15));
    REQUIRE(sol.A_row_sums.size() == 3);
    for (double a : sol.A_row_sums) CHECK(a == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("simplex minimum: independent two-asset basket, closed form") {
    // diag(0.09, 0.04): w1 = s2^2/(s1^2+s2^2) = 4/13, value = 0.36/13
    const auto sol = bw::min_quadratic_simplex(cov2(0.3, 0.2, 0.0));
    CHECK(sol.w_bar[0] == doctest::Approx(4.0 / 13).epsilon(1e-14));
    CHECK(sol.w_bar[1] == doctest::Approx(9.0 / 13).epsilon(1e-14));
    CHECK(sol.value == doctest::Approx(0.36 / 13).epsilon(1e-14));
    CHECK(sol.n_bar == 2);
    CHECK(sol.A_row_sums[0] == doctest::Approx(1.0 / 0.09).epsilon(1e-13));
    CHECK(sol.A_row_sums[1] == doctest::Approx(25.0).epsilon(1e-13));
    CHECK(sol.value == doctest::Approx(grid_min_n2(cov2(0.3, 0.2, 0.0))).epsilon(1e-8));
}

TEST_CASE("simplex minimum: high correlation collapses onto the low-vol asset") {
    const auto sol = bw::min_quadratic_simplex(cov2(0.3, 0.2, 0.8));
    REQUIRE(sol.n_bar == 1);
    CHECK(sol.support[0] == 1);
    CHECK(sol.w_bar[0] == 0.0);
    CHECK(sol.w_bar[1] == 1.0);
    CHECK(sol.value == doctest::Approx(0.04).epsilon(1e-15));
    CHECK(sol.A_row_sums[0] == doctest::Approx(25.0).epsilon(1e-14));
    CHECK(sol.value == doctest::Approx(grid_min_n2(cov2(0.3, 0.2, 0.8))).epsilon(1e-8));
}

TEST_CASE("simplex minimum: grid equivalence on random 2x2 and 3x3 problems") {
    std::mt19937_64 rng(20240811);
    for (int rep = 0; rep < 40; ++rep) {
        const Mat b2 = random_spd(rng, 2, 0.1);
        CHECK(bw::min_quadratic_simplex(b2).value ==
              doctest::Approx(grid_min_n2(b2)).epsilon(1e-8));
        const Mat b3 = random_spd(rng, 3, 0.1);
        CHECK(bw::min_quadratic_simplex(b3).value ==
              doctest::Approx(grid_min_n3(b3)).epsilon(1e-8));
    }
}

TEST_CASE("simplex minimum: KKT certificate on 1000 random SPD problems") {
    std::mt19937_64 rng(7151);
    std::uniform_int_distribution<int> dim(1, 8);
    for (int rep = 0; rep < 1000; ++rep) {
        const Mat b = random_spd(rng, dim(rng), 0.05);
        const auto sol = bw::min_quadratic_simplex(b);
        check_kkt(b, sol, 1e-10);
        CHECK(sol.value == doctest::Approx(1.0 / std::accumulate(sol.A_row_sums.begin(),
                                                                 sol.A_row_sums.end(), 0.0))
                               .epsilon(1e-10));
    }
}

TEST_CASE("simplex minimum: bitwise deterministic across repeated calls") {
    std::mt19937_64 rng(99);
    const Mat b = random_spd(rng, 6, 0.05);
    const auto s1 = bw::min_quadratic_simplex(b);
    const auto s2 = bw::min_quadratic_simplex(b);
    REQUIRE(s1.w_bar.size() == s2.w_bar.size());
    CHECK(std::memcmp(s1.w_bar.data(), s2.w_bar.data(),
                      s1.w_bar.size() * sizeof(double)) == 0);
    CHECK(std::memcmp(&s1.value, &s2.value, sizeof(double)) == 0);
    CHECK(s1.support == s2.support);
}

TEST_CASE("simplex minimum: ill conditioned covariance is rejected") {
    CHECK_THROWS_AS(bw::min_quadratic_simplex(Mat{{1.0, 0.0}, {0.0, 1e-13}}),
                    bw::MatrixError);
    CHECK_THROWS_AS(bw::min_quadratic_simplex(Mat{{1.0, 2.0}, {2.0, 1.0}}),
                    bw::MatrixError);
}

TEST_CASE("simplex minimum: large problems route through projected gradient") {
    std::mt19937_64 rng(31337);
    const Mat b = random_spd(rng, 25, 0.2);
    const auto sol = bw::min_quadratic_simplex(b);
    check_kkt(b, sol, 1e-9);
    // uniform weights are feasible, so the optimum cannot exceed their value
    const Vec unif(25, 1.0 / 25);
    CHECK(sol.value <= bw::quad_form(b, unif) + 1e-12);
}

TEST_CASE("inner maximum: single asset closed form") {
    const Mat b{{0.16}};
    const Vec mu{-0.5};
    for (double t : {0.3, 1.0, 2.5}) {
        const auto im = bw::inner_max_weights(b, mu, 1.0, t);
        const double lin = 1.0 - 0.5 * t;
        double want = t;
        if (lin > 0.0) want += lin * lin / (2.0 * t * 0.16);
        CHECK(im.value == doctest::Approx(want).epsilon(1e-13));
        CHECK(im.w[0] == 1.0);
    }
    // once 1 + mu t <= 0 the dual solution is u = 0 with value theta t
    const auto edge = bw::inner_max_weights(b, mu, 1.0, 4.0);
    CHECK(edge.value == doctest::Approx(4.0).epsilon(1e-15));
    CHECK(edge.u_bar[0] == 0.0);
    CHECK(edge.support.empty());
}

TEST_CASE("inner maximum: symmetric two-asset case") {
    const auto im = bw::inner_max_weights(bw::identity(2), Vec{0.0, 0.0}, 1.0, 1.0);
    CHECK(im.value == doctest::Approx(2.0).epsilon(1e-14));
    CHECK(im.w[0] == doctest::Approx(0.5).epsilon(1e-14));
    CHECK(im.u_bar[0] == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(im.u_bar[1] == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("inner maximum: matches weight-grid search on random problems") {
    std::mt19937_64 rng(424242);
    std::uniform_real_distribution<double> md(-0.4, 0.4);
    std::uniform_real_distribution<double> td(0.2, 3.0);
    for (int rep = 0; rep < 25; ++rep) {
        const Mat b = random_spd(rng, 2, 0.1);
        const Vec mu{md(rng), md(rng)};
        const double t = td(rng);
        const auto im = bw::inner_max_weights(b, mu, 1.3, t);
        CHECK(im.value == doctest::Approx(grid_inner_n2(b, mu, 1.3, t)).epsilon(1e-6));
    }
}

TEST_CASE("saddle point: single asset closed form") {
    // c* = (sqrt(2 theta s^2 + mu^2) + mu) / s^2, t_bar = 1/sqrt(2 theta s^2 + mu^2)
    const auto sp = bw::saddle_cstar(Mat{{1.0}}, Vec{0.0}, 1.0);
    CHECK(sp.c_star == doctest::Approx(std::sqrt(2.0)).epsilon(1e-10));
    CHECK(sp.t_bar == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-7));
    CHECK(sp.w_bar[0] == 1.0);

    const auto sd = bw::saddle_cstar(Mat{{0.16}}, Vec{-0.5}, 1.0);
    const double disc = std::sqrt(2.0 * 0.16 + 0.25);
    CHECK(sd.c_star == doctest::Approx((disc - 0.5) / 0.16).epsilon(1e-10));
    CHECK(sd.t_bar == doctest::Approx(1.0 / disc).epsilon(1e-7));
}

TEST_CASE("saddle point: zero drift reduces to the simplex minimum") {
    for (double theta : {0.6, 0.9, 2.0}) {
        const Mat b = cov2(0.3, 0.2, 0.0);
        const auto sp = bw::saddle_cstar(b, Vec{0.0, 0.0}, theta);
        const double qv = bw::min_quadratic_simplex(b).value;
        CHECK(sp.c_star == doctest::Approx(std::sqrt(2.0 * theta / qv)).epsilon(1e-10));
        CHECK(sp.t_bar == doctest::Approx(1.0 / std::sqrt(2.0 * theta * qv)).epsilon(1e-6));
        CHECK(sp.w_bar[0] == doctest::Approx(4.0 / 13).epsilon(1e-8));
    }
}

TEST_CASE("saddle point: matches brute force over (t, w) grids") {
    std::mt19937_64 rng(771);
    std::uniform_real_distribution<double> sd(0.25, 0.7);
    std::uniform_real_distribution<double> rd(-0.5, 0.75);
    std::uniform_real_distribution<double> md(-0.3, 0.3);
    std::uniform_real_distribution<double> thd(0.6, 2.5);
    int done = 0;
    while (done < 12) {
        const Mat b = cov2(sd(rng), sd(rng), rd(rng));
        if (bw::min_quadratic_simplex(b).value < 0.02) continue;
        const Vec mu{md(rng), md(rng)};
        const double theta = thd(rng);
        const auto sp = bw::saddle_cstar(b, mu, theta);
        double brute = 1e300;
        for (double t = sp.t_bar / 3; t <= sp.t_bar * 3; t += sp.t_bar * 1e-4)
            brute = std::min(brute, grid_inner_n2(b, mu, theta, t));
        CHECK(sp.c_star == doctest::Approx(brute).epsilon(1e-3));
        double mw = 0.0;
        for (int i = 0; i < 2; ++i) mw += mu[i] * sp.w_bar[i];
        CHECK(1.0 + sp.t_bar * mw > 0.0);
        ++done;
    }
}

TEST_CASE("saddle point: profile is convex and c* grows with theta") {
    const Mat b = cov2(0.4, 0.25, 0.3);
    const Vec mu{0.1, -0.2};
    const auto sp = bw::saddle_cstar(b, mu, 1.0);
    // discrete convexity of t -> max_w F(t, w) around the minimiser
    for (double t = sp.t_bar * 0.2; t < sp.t_bar * 4.0; t += sp.t_bar * 0.1) {
        const double h = sp.t_bar * 0.01;
        const double second = bw::inner_max_weights(b, mu, 1.0, t - h).value -
                              2.0 * bw::inner_max_weights(b, mu, 1.0, t).value +
                              bw::inner_max_weights(b, mu, 1.0, t + h).value;
        CHECK(second >= -1e-9);
    }
    double prev = 0.0;
    for (double theta : {0.5, 1.0, 1.5, 2.0, 3.0}) {
        const double c = bw::saddle_cstar(b, mu, theta).c_star;
        CHECK(c > prev);
        prev = c;
    }
}

TEST_CASE("saddle point: bitwise deterministic") {
    const Mat b = cov2(0.35, 0.22, -0.3);
    const Vec mu{0.05, -0.12};
    const auto s1 = bw::saddle_cstar(b, mu, 1.2);
    const auto s2 = bw::saddle_cstar(b, mu, 1.2);
    CHECK(std::memcmp(&s1.c_star, &s2.c_star, sizeof(double)) == 0);
    CHECK(std::memcmp(&s1.t_bar, &s2.t_bar, sizeof(double)) == 0);
    CHECK(std::memcmp(s1.w_bar.data(), s2.w_bar.data(),
                      s1.w_bar.size() * sizeof(double)) == 0);
}
