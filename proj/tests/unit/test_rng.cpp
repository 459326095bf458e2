#include <doctest.h>

#include <cmath>
#include <vector>

#include "wmc/rng.hpp"

using namespace wmc;

// Known-answer vectors of the Random123 reference implementation.
TEST_CASE("philox known answers") {
  using C = Philox4x32::Counter;
  using K = Philox4x32::Key;
  CHECK(Philox4x32::generate(C{0, 0, 0, 0}, K{0, 0}) == C{0x6627e8d5u, 0xe169c58du, 0xbc57ac4cu, 0x9b00dbd8u});
  CHECK(Philox4x32::generate(C{0xffffffffu, 0xffffffffu, 0xffffffffu, 0xffffffffu}, K{0xffffffffu, 0xffffffffu}) ==
        C{0x408f276du, 0x41c83b0eu, 0xa20bc7c6u, 0x6d5451fdu});
  CHECK(Philox4x32::generate(C{0x243f6a88u, 0x85a308d3u, 0x13198a2eu, 0x03707344u}, K{0xa4093822u, 0x299f31d0u}) ==
        C{0xd16cfe09u, 0x94fdccebu, 0x5001e420u, 0x24126ea1u});
}

TEST_CASE("batched normals follow the scalar generator") {
  // oracle: scalar Philox + Box-Muller, no vector math
  Philox4x32::Key key{0x1234u, 0x9876u};
  Philox4x32::Counter start{0u, 7u, 0u, 2u};
  std::vector<double> out(2 * detail::kNormalBatch);
  detail::normal_batch(start, key, out.data());
  for (int i : {0, 1, 17, 255}) {
    auto c = start;
    c[0] += i;
    const auto r = Philox4x32::generate(c, key);
    const std::uint64_t u0 = (static_cast<std::uint64_t>(r[0]) << 32) | r[1];
    const std::uint64_t u1 = (static_cast<std::uint64_t>(r[2]) << 32) | r[3];
    const double rad = std::sqrt(-2.0 * std::log(uniform_open(u0)));
    const double th = 2.0 * M_PI * uniform_open(u1);
    CHECK(out[i] == doctest::Approx(rad * std::cos(th)).epsilon(1e-12));
    CHECK(out[detail::kNormalBatch + i] == doctest::Approx(rad * std::sin(th)).epsilon(1e-12));
  }
}

TEST_CASE("normal stream moments") {
  NormalStream s(StreamKey{42, 1, 3});
  const int n = 400000;
  double m1 = 0, m2 = 0, m4 = 0;
  for (int i = 0; i < n; ++i) {
    const double x = s.next();
    m1 += x;
    m2 += x * x;
    m4 += x * x * x * x;
  }
  m1 /= n;
  m2 /= n;
  m4 /= n;
  // 5 sigma bands
  CHECK(std::abs(m1) < 5.0 / std::sqrt(n));
  CHECK(std::abs(m2 - 1.0) < 5.0 * std::sqrt(2.0 / n));
  CHECK(std::abs(m4 - 3.0) < 5.0 * std::sqrt(96.0 / n));
}

TEST_CASE("streams are reproducible and distinct") {
  NormalStream a(StreamKey{5, 0, 9}), b(StreamKey{5, 0, 9}), c(StreamKey{5, 1, 9}), d(StreamKey{5, 0, 10});
  bool differ_c = false, differ_d = false;
  for (int i = 0; i < 1000; ++i) {
    const double x = a.next();
    CHECK(x == b.next());
    differ_c |= x != c.next();
    differ_d |= x != d.next();
  }
  CHECK(differ_c);
  CHECK(differ_d);
}

TEST_CASE("ensemble ids") {
  CHECK(ensemble_id(1, 2, 3, 4) == ensemble_id(1, 2, 3, 4));
  CHECK(ensemble_id(1, 2, 3, 4) != ensemble_id(1, 2, 3, 5));
  CHECK(ensemble_id(1, 2, 3, 4) != ensemble_id(2, 2, 3, 4));
  CHECK(bits_of(-0.0) == bits_of(0.0));
  CHECK(splitmix64(0) == 0xe220a8397b1dcdafull);
}
