#pragma once

#include <cmath>
#include <span>

namespace wmc {

enum class SegmentStatus { Ok, Degenerate, LogSingular };

struct SegmentIntegral {
  double value = 0.0;
  SegmentStatus status = SegmentStatus::Ok;
};

// Relative tolerance below which a segment counts as a single point.
inline constexpr double kDegenerateSegment = 1e-12;

// Integral over l in [0, 1] of 1 / |a + (b - a) l| for relative displacements
// a (previous point) and b (next point), closed form. On LogSingular the
// value is the right-endpoint Riemann value 1/|b|.
SegmentIntegral inverse_distance_integral(std::span<const double> a, std::span<const double> b);

// Same integral written in terms of the two particle positions at both ends.
SegmentIntegral smoothed_segment(std::span<const double> x1_prev, std::span<const double> x1_next,
                                 std::span<const double> x2_prev, std::span<const double> x2_next);

namespace detail {

// Closed form for fixed dimension. a, b point to D values each.
template <int D>
inline SegmentIntegral inverse_distance_closed(const double* a, const double* b) {
  double dl[D];
  double A2 = 0, B2 = 0, C = 0, ad = 0, bd = 0, ab = 0;
  for (int k = 0; k < D; ++k) {
    dl[k] = b[k] - a[k];
    A2 += a[k] * a[k];
    B2 += b[k] * b[k];
    C += dl[k] * dl[k];
    ad += a[k] * dl[k];
    bd += b[k] * dl[k];
    ab += a[k] * b[k];
  }
  const double A = std::sqrt(A2), B = std::sqrt(B2), s = std::sqrt(C);
  const double scale = A > B ? A : B;
  if (scale == 0.0) return {1.0 / B, SegmentStatus::LogSingular};
  if (s <= kDegenerateSegment * scale) return {2.0 / (A + B), SegmentStatus::Degenerate};

  double cross2 = 0.0;
  if constexpr (D == 2) {
    const double c = a[0] * dl[1] - a[1] * dl[0];
    cross2 = c * c;
  } else if constexpr (D == 3) {
    const double c0 = a[1] * dl[2] - a[2] * dl[1];
    const double c1 = a[2] * dl[0] - a[0] * dl[2];
    const double c2 = a[0] * dl[1] - a[1] * dl[0];
    cross2 = c0 * c0 + c1 * c1 + c2 * c2;
  }
  const double den = ad >= 0.0 ? ad + s * A : cross2 / (s * A - ad);
  const double num = bd >= 0.0 ? bd + s * B : cross2 / (s * B - bd);
  if (!(den > 0.0) || !(num > 0.0)) {
    // On a line through the origin.
    if (A == 0.0 || B == 0.0 || !(ab > 0.0)) return {1.0 / B, SegmentStatus::LogSingular};
    return {std::log1p((B - A) / A) / (B - A), SegmentStatus::Ok};
  }
  const double x = s * (s + (ad + bd) / (A + B)) / den;
  const double v = (std::abs(x) < 0.5 ? std::log1p(x) : std::log(num / den)) / s;
  if (!std::isfinite(v)) return {1.0 / B, SegmentStatus::LogSingular};
  return {v, SegmentStatus::Ok};
}

// Multipole form about the segment midpoint m:
//   I = (1/|m|) sum_{n even} P_n(cos) t^n / (n + 1),  t = |b - a| / (2|m|).
// Exact to rounding for t <= kSeriesMaxT (truncation below 1e-19).
inline constexpr double kSeriesMaxT = 0.1;

template <int D>
inline double inverse_distance_series(const double* a, const double* b, double& t_out) {
  double M2 = 0, C = 0, md = 0;
  for (int k = 0; k < D; ++k) {
    const double m = 0.5 * (a[k] + b[k]);
    const double dl = b[k] - a[k];
    M2 += m * m;
    C += dl * dl;
    md += m * dl;
  }
  const double M = std::sqrt(M2);
  const double s = std::sqrt(C);
  const double inv_m = 1.0 / M;
  const double t = 0.5 * s * inv_m;
  t_out = t;
  const double c = s > 0.0 ? md * inv_m / s : 0.0;
  const double t2 = t * t;
  double p_prev = 1.0, p = c, tp = 1.0, sum = 1.0;
  for (int n = 1; n < 16; ++n) {
    const double p_next = ((2 * n + 1) * c * p - n * p_prev) / (n + 1);
    p_prev = p;
    p = p_next;
    if ((n & 1) == 1) {
      tp *= t2;
      sum += p * tp / (n + 2);
    }
  }
  return sum * inv_m;
}

}  // namespace detail

}  // namespace wmc
