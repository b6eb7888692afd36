#pragma once

// Shared exp kernel. Both the scalar and the vector translation units
// instantiate exp_core over their own Ops type, so every backend executes
// the same arithmetic in the same order: that is what makes the backends
// bitwise-identical, which the equivalence tests assert.
//
// Algorithm: Cephes-style exp. Split x = n log2 + r with |r| <= log2/2
// (two-part log2 constant), evaluate the (3,4) rational on r^2, reconstruct
// e^r = 1 + 2 p / (q - p), scale by 2^n in two factors so the extremes of
// the double exponent range survive.

#include <bit>
#include <cstdint>

namespace bw::simd::detail {

struct ExpConsts {
    static constexpr double log2e = 1.4426950408889634073599;
    static constexpr double ln2_hi = 6.93145751953125e-1;
    static constexpr double ln2_lo = 1.42860682030941723212e-6;
    static constexpr double p0 = 1.26177193074810590878e-4;
    static constexpr double p1 = 3.02994407707441961300e-2;
    static constexpr double p2 = 9.99999999999999999910e-1;
    static constexpr double q0 = 3.00198505138664455042e-6;
    static constexpr double q1 = 2.52448340349684104192e-3;
    static constexpr double q2 = 2.27265548208155028766e-1;
    static constexpr double q3 = 2.00000000000000000005e0;
    static constexpr double clamp_lo = -746.0;  // below: exp underflows to 0
    static constexpr double clamp_hi = 710.0;   // above: exp overflows to inf
};

// Ops contract:
//   V broadcast(double), V add(V,V), V sub(V,V), V mul(V,V), V div(V,V),
//   V fma(V,V,V)  (a*b+c, single rounding),
//   V clamp(V x, V lo, V hi), V round_even(V),
//   V pow2i(V n)  (2^n for integral-valued n in [-1022, 1023]),
//   V keep_nan(V x, V y)  (y, except NaN where x is NaN).
template <class Ops>
inline typename Ops::V exp_core(typename Ops::V x0) {
    using C = ExpConsts;
    using V = typename Ops::V;
    const V x = Ops::clamp(x0, Ops::broadcast(C::clamp_lo), Ops::broadcast(C::clamp_hi));
    const V n = Ops::round_even(Ops::mul(x, Ops::broadcast(C::log2e)));
    V r = Ops::fma(n, Ops::broadcast(-C::ln2_hi), x);
    r = Ops::fma(n, Ops::broadcast(-C::ln2_lo), r);
    const V rr = Ops::mul(r, r);
    V p = Ops::fma(Ops::broadcast(C::p0), rr, Ops::broadcast(C::p1));
    p = Ops::fma(p, rr, Ops::broadcast(C::p2));
    p = Ops::mul(p, r);
    V q = Ops::fma(Ops::broadcast(C::q0), rr, Ops::broadcast(C::q1));
    q = Ops::fma(q, rr, Ops::broadcast(C::q2));
    q = Ops::fma(q, rr, Ops::broadcast(C::q3));
    const V t = Ops::div(p, Ops::sub(q, p));
    V e = Ops::fma(Ops::broadcast(2.0), t, Ops::broadcast(1.0));
    // 2^n = 2^n1 * 2^n2 with n1 = round(n/2): both factors stay normal.
    const V n1 = Ops::round_even(Ops::mul(n, Ops::broadcast(0.5)));
    const V n2 = Ops::sub(n, n1);
    e = Ops::mul(Ops::mul(e, Ops::pow2i(n1)), Ops::pow2i(n2));
    return Ops::keep_nan(x0, e);
}

struct ScalarOps {
    using V = double;
    static inline V broadcast(double c) { return c; }
    static inline V add(V a, V b) { return a + b; }
    static inline V sub(V a, V b) { return a - b; }
    static inline V mul(V a, V b) { return a * b; }
    static inline V div(V a, V b) { return a / b; }
    static inline V fma(V a, V b, V c) { return __builtin_fma(a, b, c); }
    static inline V clamp(V x, V lo, V hi) {
        // NaN falls through untouched; keep_nan restores it anyway.
        return x < lo ? lo : (x > hi ? hi : x);
    }
    static inline V round_even(V x) { return __builtin_nearbyint(x); }
    static inline V pow2i(V n) {
        const std::int64_t ni = static_cast<std::int64_t>(n);
        return std::bit_cast<double>((ni + 1023) << 52);
    }
    static inline V keep_nan(V x, V y) { return x != x ? x : y; }
};

}  // namespace bw::simd::detail
