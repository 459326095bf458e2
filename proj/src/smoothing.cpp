#include "wmc/smoothing.hpp"

#include "wmc/error.hpp"

namespace wmc {

SegmentIntegral inverse_distance_integral(std::span<const double> a, std::span<const double> b) {
  require(a.size() == b.size(), "segment endpoints differ in dimension");
  switch (a.size()) {
    case 1: return detail::inverse_distance_closed<1>(a.data(), b.data());
    case 2: return detail::inverse_distance_closed<2>(a.data(), b.data());
    case 3: return detail::inverse_distance_closed<3>(a.data(), b.data());
    default: fail(ErrorKind::InvalidArgument, "segment dimension must be 1, 2 or 3");
  }
}

SegmentIntegral smoothed_segment(std::span<const double> x1_prev, std::span<const double> x1_next,
                                 std::span<const double> x2_prev, std::span<const double> x2_next) {
  const std::size_t d = x1_prev.size();
  require(d >= 1 && d <= 3 && x1_next.size() == d && x2_prev.size() == d && x2_next.size() == d,
          "segment endpoints must share a dimension of 1, 2 or 3");
  double a[3], b[3];
  for (std::size_t k = 0; k < d; ++k) {
    a[k] = x1_prev[k] - x2_prev[k];
    b[k] = x1_next[k] - x2_next[k];
  }
  return inverse_distance_integral({a, d}, {b, d});
}

}  // namespace wmc
