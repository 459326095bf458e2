#pragma once

#include <cmath>
#include <limits>

namespace wmc {

// Neumaier compensated sum.
struct CompensatedSum {
  double sum = 0.0;
  double comp = 0.0;

  void add(double x) noexcept {
    const double t = sum + x;
    if (std::abs(sum) >= std::abs(x))
      comp += (sum - t) + x;
    else
      comp += (x - t) + sum;
    sum = t;
  }
  void merge(const CompensatedSum& o) noexcept {
    add(o.sum);
    comp += o.comp;
  }
  void scale(double f) noexcept {
    sum *= f;
    comp *= f;
  }
  double value() const noexcept { return sum + comp; }
};

// Sums of W and W^2 for W = exp(e), kept as exp(e - shift) so that very
// large or very small Wilson lines neither overflow nor underflow wholesale.
struct WilsonSums {
  double shift = -std::numeric_limits<double>::infinity();
  CompensatedSum w, w2;
  long long count = 0;

  // Headroom before the shift is raised; exp(2 * 200) is still finite.
  static constexpr double kSlack = 200.0;

  bool needs_shift(double max_exponent) const noexcept {
    return std::isinf(shift) || max_exponent > shift + kSlack;
  }
  // Re-express all sums relative to new_shift (>= shift); returns the factor applied.
  double rebase(double new_shift) noexcept {
    if (std::isinf(shift)) {
      shift = new_shift;
      return 0.0;
    }
    const double f = std::exp(shift - new_shift);
    w.scale(f);
    w2.scale(f * f);
    shift = new_shift;
    return f;
  }
  void add_scaled(double x) noexcept {
    w.add(x);
    w2.add(x * x);
    ++count;
  }
};

}  // namespace wmc
