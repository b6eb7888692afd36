#include "bw/simd.hpp"

#include "simd_exp_core.hpp"

namespace bw::simd {

void exp_batch_scalar(const double* x, double* y, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) y[i] = detail::exp_core<detail::ScalarOps>(x[i]);
}

}  // namespace bw::simd
