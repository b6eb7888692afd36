// Compiled with -mavx2 -mfma; only reached after the runtime cpuid check.

#include "bw/simd.hpp"

#include "simd_exp_core.hpp"

#include <immintrin.h>

namespace bw::simd {

namespace {

struct Avx2Ops {
    using V = __m256d;
    static inline V broadcast(double c) { return _mm256_set1_pd(c); }
    static inline V add(V a, V b) { return _mm256_add_pd(a, b); }
    static inline V sub(V a, V b) { return _mm256_sub_pd(a, b); }
    static inline V mul(V a, V b) { return _mm256_mul_pd(a, b); }
    static inline V div(V a, V b) { return _mm256_div_pd(a, b); }
    static inline V fma(V a, V b, V c) { return _mm256_fmadd_pd(a, b, c); }
    static inline V clamp(V x, V lo, V hi) {
        // mirror the scalar branch semantics: x<lo -> lo, x>hi -> hi,
        // NaN -> unchanged (comparisons are false on NaN).
        V r = _mm256_blendv_pd(x, lo, _mm256_cmp_pd(x, lo, _CMP_LT_OQ));
        r = _mm256_blendv_pd(r, hi, _mm256_cmp_pd(x, hi, _CMP_GT_OQ));
        return r;
    }
    static inline V round_even(V x) {
        return _mm256_round_pd(x, _MM_FROUND_TO_NEAREST_INT | _MM_FROUND_NO_EXC);
    }
    static inline V pow2i(V n) {
        const __m128i n32 = _mm256_cvtpd_epi32(n);
        const __m256i n64 = _mm256_cvtepi32_epi64(n32);
        const __m256i bits =
            _mm256_slli_epi64(_mm256_add_epi64(n64, _mm256_set1_epi64x(1023)), 52);
        return _mm256_castsi256_pd(bits);
    }
    static inline V keep_nan(V x, V y) {
        return _mm256_blendv_pd(y, x, _mm256_cmp_pd(x, x, _CMP_UNORD_Q));
    }
};

}  // namespace

void exp_batch_avx2(const double* x, double* y, std::size_t n) {
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d v = _mm256_loadu_pd(x + i);
        _mm256_storeu_pd(y + i, detail::exp_core<Avx2Ops>(v));
    }
    for (; i < n; ++i) y[i] = detail::exp_core<detail::ScalarOps>(x[i]);
}

}  // namespace bw::simd
