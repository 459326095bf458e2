// Built with -ffast-math so the log/cos loops map onto libmvec.
#include <math.h>

#include <cstdint>
#include <numbers>

#include "wmc/rng.hpp"

namespace wmc::detail {

void normal_batch(Philox4x32::Counter start, Philox4x32::Key key, double* out) noexcept {
  constexpr int B = kNormalBatch;
  alignas(64) std::uint64_t hi[B];
  alignas(64) std::uint64_t lo[B];
#pragma omp simd
  for (int i = 0; i < B; ++i) {
    std::uint32_t x0 = start[0] + static_cast<std::uint32_t>(i), x1 = start[1], x2 = start[2], x3 = start[3];
    std::uint32_t k0 = key[0], k1 = key[1];
    for (int r = 0; r < 10; ++r) {
      if (r > 0) {
        k0 += 0x9E3779B9u;
        k1 += 0xBB67AE85u;
      }
      const std::uint64_t p0 = static_cast<std::uint64_t>(0xD2511F53u) * x0;
      const std::uint64_t p1 = static_cast<std::uint64_t>(0xCD9E8D57u) * x2;
      const std::uint32_t n0 = static_cast<std::uint32_t>(p1 >> 32) ^ x1 ^ k0;
      const std::uint32_t n2 = static_cast<std::uint32_t>(p0 >> 32) ^ x3 ^ k1;
      x1 = static_cast<std::uint32_t>(p1);
      x3 = static_cast<std::uint32_t>(p0);
      x0 = n0;
      x2 = n2;
    }
    hi[i] = (static_cast<std::uint64_t>(x0) << 32) | x1;
    lo[i] = (static_cast<std::uint64_t>(x2) << 32) | x3;
  }
  constexpr double two_pi = 2.0 * std::numbers::pi;
  constexpr double half_pi = 0.5 * std::numbers::pi;
#pragma omp simd
  for (int i = 0; i < B; ++i) {
    const double u1 = (static_cast<double>(hi[i] >> 11) + 0.5) * 0x1.0p-53;
    const double u2 = (static_cast<double>(lo[i] >> 11) + 0.5) * 0x1.0p-53;
    const double r = sqrt(-2.0 * log(u1));
    const double th = two_pi * u2;
    // cos twice rather than sin/cos: the pair would be fused into a scalar sincos
    out[i] = r * cos(th);
    out[B + i] = r * cos(th - half_pi);
  }
}

}  // namespace wmc::detail
