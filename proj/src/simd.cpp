#include "bw/simd.hpp"
#include "bw/errors.hpp"

#include <atomic>
#include <cstdlib>
#include <cstring>

namespace bw::simd {

bool avx2_available() {
#if defined(BW_BUILD_AVX2) && (defined(__x86_64__) || defined(__i386__))
    return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
    return false;
#endif
}

namespace {

Backend detect_backend() {
    if (const char* env = std::getenv("BASKET_WING_SIMD")) {
        if (std::strcmp(env, "scalar") == 0) return Backend::scalar;
        if (std::strcmp(env, "avx2") == 0 && avx2_available()) return Backend::avx2;
    }
    return avx2_available() ? Backend::avx2 : Backend::scalar;
}

std::atomic<Backend> g_backend{detect_backend()};

}  // namespace

Backend active_backend() { return g_backend.load(std::memory_order_relaxed); }

const char* backend_name(Backend b) {
    switch (b) {
        case Backend::avx2: return "avx2";
        default: return "scalar";
    }
}

void set_backend(Backend b) {
    if (b == Backend::avx2 && !avx2_available())
        throw DomainError("set_backend: avx2 not available on this CPU");
    g_backend.store(b, std::memory_order_relaxed);
}

void exp_batch(const double* x, double* y, std::size_t n) {
#ifdef BW_BUILD_AVX2
    if (active_backend() == Backend::avx2) {
        exp_batch_avx2(x, y, n);
        return;
    }
#endif
    exp_batch_scalar(x, y, n);
}

}  // namespace bw::simd
