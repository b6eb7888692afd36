#pragma once

/// Counter-based random numbers for reproducible parallel Monte Carlo.
///
/// A Philox-style 4x32 block cipher turns (seed, stream, block, path,
/// draw index) into uniforms, so every path owns an independent substream
/// that can be regenerated in isolation: results are bitwise identical no
/// matter how path blocks are scheduled across threads. Distribution
/// samplers below are rejection-based and consume a variable number of
/// uniforms per draw, which is harmless because nothing is shared.

#include <cmath>
#include <cstdint>

namespace bw {

class CounterRng {
  public:
    CounterRng(std::uint64_t seed, std::uint32_t stream, std::uint32_t block,
               std::uint32_t path)
        : key0_(static_cast<std::uint32_t>(seed)),
          key1_(static_cast<std::uint32_t>(seed >> 32)),
          path_(path),
          block_(block),
          stream_(stream) {}

    std::uint32_t next_u32() {
        if (have_ == 0) refill();
        return buf_[4 - have_--];
    }

    /// Uniform draw in the open interval (0,1) with 53-bit resolution.
    double uniform() {
        const std::uint64_t hi = next_u32();
        const std::uint64_t lo = next_u32();
        const std::uint64_t bits = (hi << 32) | lo;
        return static_cast<double>(bits >> 11) * 0x1p-53 + 0x1p-54;
    }

    /// Standard normal via Box-Muller; the second leg of each pair is cached.
    double normal() {
        if (have_cached_) {
            have_cached_ = false;
            return cached_;
        }
        const double r = std::sqrt(-2.0 * std::log(uniform()));
        const double a = 6.283185307179586477 * uniform();
        cached_ = r * std::sin(a);
        have_cached_ = true;
        return r * std::cos(a);
    }

  private:
    void refill() {
        std::uint32_t c0 = draw_, c1 = path_, c2 = block_, c3 = stream_;
        std::uint32_t k0 = key0_, k1 = key1_;
        for (int round = 0; round < 10; ++round) {
            const std::uint64_t p0 = std::uint64_t(0xD2511F53u) * c0;
            const std::uint64_t p1 = std::uint64_t(0xCD9E8D57u) * c2;
            const std::uint32_t n0 =
                static_cast<std::uint32_t>(p1 >> 32) ^ c1 ^ k0;
            const std::uint32_t n1 = static_cast<std::uint32_t>(p1);
            const std::uint32_t n2 =
                static_cast<std::uint32_t>(p0 >> 32) ^ c3 ^ k1;
            const std::uint32_t n3 = static_cast<std::uint32_t>(p0);
            c0 = n0;
            c1 = n1;
            c2 = n2;
            c3 = n3;
            k0 += 0x9E3779B9u;
            k1 += 0xBB67AE85u;
        }
        buf_[0] = c0;
        buf_[1] = c1;
        buf_[2] = c2;
        buf_[3] = c3;
        have_ = 4;
        ++draw_;
    }

    std::uint32_t key0_, key1_;
    std::uint32_t path_, block_, stream_;
    std::uint32_t draw_ = 0;
    std::uint32_t buf_[4] = {0, 0, 0, 0};
    int have_ = 0;
    double cached_ = 0.0;
    bool have_cached_ = false;
};

/// Gamma(shape, 1) draw by the Marsaglia-Tsang squeeze; shape < 1 handled
/// through the boosting identity G(a) = G(a+1) U^{1/a}.
inline double sample_gamma(CounterRng& rng, double shape) {
    double boost = 1.0;
    if (shape < 1.0) {
        boost = std::pow(rng.uniform(), 1.0 / shape);
        shape += 1.0;
    }
    const double d = shape - 1.0 / 3.0;
    const double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
        double x, v;
        do {
            x = rng.normal();
            v = 1.0 + c * x;
        } while (v <= 0.0);
        v = v * v * v;
        const double u = rng.uniform();
        if (u < 1.0 - 0.0331 * x * x * x * x) return boost * d * v;
        if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v)))
            return boost * d * v;
    }
}

/// Inverse-Gaussian(mean, shape) draw by the Michael-Schucany two-root
/// transform: one chi-square root, one uniform to pick the branch.
inline double sample_inverse_gaussian(CounterRng& rng, double mean,
                                      double shape) {
    const double nu = rng.normal();
    const double y = nu * nu;
    const double x =
        mean + mean * mean * y / (2.0 * shape) -
        mean / (2.0 * shape) *
            std::sqrt(4.0 * mean * shape * y + mean * mean * y * y);
    const double u = rng.uniform();
    return u <= mean / (mean + x) ? x : mean * mean / x;
}

}  // namespace bw
