#pragma once

#include <array>
#include <cstdint>

namespace wmc {

// Philox4x32-10 counter-based generator.
struct Philox4x32 {
  using Counter = std::array<std::uint32_t, 4>;
  using Key = std::array<std::uint32_t, 2>;
  static Counter generate(Counter counter, Key key) noexcept;
};

std::uint64_t splitmix64(std::uint64_t x) noexcept;

// Key derivation. The ensemble id identifies one (sweep value, T, repetition)
// cell; the substream of a single loop is then (ensemble, particle, loop index).
std::uint64_t ensemble_id(std::uint64_t seed, std::uint64_t sweep_key, std::uint64_t t_key,
                          std::uint64_t repetition) noexcept;
std::uint64_t bits_of(double value) noexcept;

struct StreamKey {
  std::uint64_t ensemble = 0;
  std::uint32_t particle = 0;
  std::uint64_t loop = 0;
};

namespace detail {
constexpr int kNormalBatch = 256;
// Box-Muller over counters start, start+1, ... (block word incremented).
// out[i] = r_i cos(theta_i) and out[kNormalBatch + i] = r_i sin(theta_i).
void normal_batch(Philox4x32::Counter start, Philox4x32::Key key, double* out) noexcept;
}  // namespace detail

// Standard normals for one substream. Counter layout:
// {block, loop low word, loop high word, particle}, key = ensemble id.
// Normals are produced kNormalBatch counters at a time.
class NormalStream {
 public:
  explicit NormalStream(const StreamKey& key) noexcept;
  double next() noexcept {
    if (used_ == kBuffer) refill();
    return buffer_[used_++];
  }

 private:
  static constexpr int kBuffer = 2 * detail::kNormalBatch;
  void refill() noexcept;

  Philox4x32::Key key_{};
  Philox4x32::Counter counter_{};
  alignas(64) std::array<double, kBuffer> buffer_{};
  int used_ = kBuffer;
};

// Uniform double in (0, 1) from 64 random bits.
inline double uniform_open(std::uint64_t bits) noexcept {
  return (static_cast<double>(bits >> 11) + 0.5) * 0x1.0p-53;
}

}  // namespace wmc
