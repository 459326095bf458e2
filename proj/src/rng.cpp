#include "wmc/rng.hpp"

#include <cmath>
#include <cstring>

namespace wmc {

namespace {

constexpr std::uint32_t kM0 = 0xD2511F53u;
constexpr std::uint32_t kM1 = 0xCD9E8D57u;
constexpr std::uint32_t kW0 = 0x9E3779B9u;
constexpr std::uint32_t kW1 = 0xBB67AE85u;

inline void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& hi, std::uint32_t& lo) {
  const std::uint64_t p = static_cast<std::uint64_t>(a) * b;
  hi = static_cast<std::uint32_t>(p >> 32);
  lo = static_cast<std::uint32_t>(p);
}

}  // namespace

Philox4x32::Counter Philox4x32::generate(Counter c, Key k) noexcept {
  for (int round = 0; round < 10; ++round) {
    if (round > 0) {
      k[0] += kW0;
      k[1] += kW1;
    }
    std::uint32_t hi0, lo0, hi1, lo1;
    mulhilo(kM0, c[0], hi0, lo0);
    mulhilo(kM1, c[2], hi1, lo1);
    c = {hi1 ^ c[1] ^ k[0], lo1, hi0 ^ c[3] ^ k[1], lo0};
  }
  return c;
}

std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

std::uint64_t ensemble_id(std::uint64_t seed, std::uint64_t sweep_key, std::uint64_t t_key,
                          std::uint64_t repetition) noexcept {
  std::uint64_t h = splitmix64(seed);
  h = splitmix64(h ^ sweep_key);
  h = splitmix64(h ^ t_key);
  h = splitmix64(h ^ repetition);
  return h;
}

std::uint64_t bits_of(double value) noexcept {
  if (value == 0.0) value = 0.0;  // fold -0 onto +0
  std::uint64_t b;
  std::memcpy(&b, &value, sizeof b);
  return b;
}

NormalStream::NormalStream(const StreamKey& key) noexcept {
  key_ = {static_cast<std::uint32_t>(key.ensemble), static_cast<std::uint32_t>(key.ensemble >> 32)};
  counter_ = {0u, static_cast<std::uint32_t>(key.loop), static_cast<std::uint32_t>(key.loop >> 32),
              key.particle};
}

void NormalStream::refill() noexcept {
  detail::normal_batch(counter_, key_, buffer_.data());
  counter_[0] += detail::kNormalBatch;
  used_ = 0;
}

}  // namespace wmc
