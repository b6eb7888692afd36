#pragma once

#include <cstddef>

namespace bw::simd {

/// Runtime-selected vector backend. The scalar kernel is the reference;
/// vector kernels implement the identical algorithm (same polynomial, same
/// fma/rounding sequence) so results are bitwise equal across backends.
enum class Backend { scalar, avx2 };

/// Backend chosen at first use: AVX2+FMA when the CPU supports it, unless
/// the BASKET_WING_SIMD environment variable ("scalar" or "avx2") says
/// otherwise.
Backend active_backend();

const char* backend_name(Backend b);

/// Force a backend (tests); throws DomainError if unavailable on this CPU.
void set_backend(Backend b);

bool avx2_available();

/// y[i] = exp(x[i]). Handles the full double range: overflow to +inf,
/// underflow to 0, NaN passthrough. Max error ~1 ulp relative.
void exp_batch(const double* x, double* y, std::size_t n);

/// Reference implementation, always available.
void exp_batch_scalar(const double* x, double* y, std::size_t n);

#ifdef BW_BUILD_AVX2
void exp_batch_avx2(const double* x, double* y, std::size_t n);
#endif

}  // namespace bw::simd
