#include "wmc/action.hpp"

#include <cmath>
#include <limits>
#include <vector>

#include "wmc/error.hpp"
#include "wmc/smoothing.hpp"

namespace wmc {

namespace {

template <int D>
double harmonic_sum(const Harmonic& h, const double* xa, const double* xb, int np) {
  const int st = np + 1;
  double acc = 0.0;
#pragma omp simd reduction(+ : acc)
  for (int k = 1; k <= np; ++k) {
    double r2 = 0.0;
    for (int d = 0; d < D; ++d) {
      const double z = xa[d * st + k] - xb[d * st + k];
      r2 += z * z;
    }
    acc += r2;
  }
  const double c = 0.5 * h.mu * h.omega * h.omega;
  return c * acc + np * (c * h.offset * h.offset);
}

template <int D>
double soft_coulomb_sum(const SoftCoulomb& s, const double* xa, const double* xb, int np) {
  const int st = np + 1;
  const double d2 = s.softening * s.softening;
  double acc = 0.0;
#pragma omp simd reduction(+ : acc)
  for (int k = 1; k <= np; ++k) {
    double r2 = d2;
    for (int d = 0; d < D; ++d) {
      const double z = xa[d * st + k] - xb[d * st + k];
      r2 += z * z;
    }
    acc += 1.0 / std::sqrt(r2);
  }
  return -s.sign * s.alpha * acc;
}

template <int D>
double erfc_sum(const ErfcEffective& e, const double* xa, const double* xb, int np) {
  const int st = np + 1;
  const double inv = 1.0 / (e.length * std::sqrt(2.0));
  double acc = 0.0;
  for (int k = 1; k <= np; ++k) {
    double r2 = 0.0;
    for (int d = 0; d < D; ++d) {
      const double z = xa[d * st + k] - xb[d * st + k];
      r2 += z * z;
    }
    acc += erfcx(std::sqrt(r2) * inv);
  }
  return e.sign * std::sqrt(M_PI / 2.0) / e.length * acc;
}

template <int D>
double bare_coulomb_riemann(const BareCoulomb& b, const double* xa, const double* xb, int np) {
  const int st = np + 1;
  double acc = 0.0;
#pragma omp simd reduction(+ : acc)
  for (int k = 1; k <= np; ++k) {
    double r2 = 0.0;
    for (int d = 0; d < D; ++d) {
      const double z = xa[d * st + k] - xb[d * st + k];
      r2 += z * z;
    }
    acc += 1.0 / std::sqrt(r2);
  }
  if (!std::isfinite(acc)) fail(ErrorKind::Singularity, "bare Coulomb separation vanished on a worldline");
  return -b.sign * b.alpha * acc;
}

// Exact segment integrals: vectorised multipole series where the segment is
// short compared with its distance to the origin, closed form elsewhere.
template <int D>
double bare_coulomb_smoothed(const BareCoulomb& b, const double* xa, const double* xb, int np,
                             long long* flagged) {
  const int st = np + 1;
  thread_local std::vector<unsigned char> far;
  far.resize(np + 1);
  unsigned char* fl = far.data();
  double acc = 0.0;
#pragma omp simd reduction(+ : acc)
  for (int k = 1; k <= np; ++k) {
    double p[D], q[D];
    for (int d = 0; d < D; ++d) {
      p[d] = xa[d * st + k - 1] - xb[d * st + k - 1];
      q[d] = xa[d * st + k] - xb[d * st + k];
    }
    double t;
    const double v = detail::inverse_distance_series<D>(p, q, t);
    const bool ok = t <= detail::kSeriesMaxT;
    fl[k] = ok ? 0 : 1;
    acc += ok ? v : 0.0;
  }
  long long bad = 0;
  for (int k = 1; k <= np; ++k) {
    if (!fl[k]) continue;
    double p[D], q[D];
    for (int d = 0; d < D; ++d) {
      p[d] = xa[d * st + k - 1] - xb[d * st + k - 1];
      q[d] = xa[d * st + k] - xb[d * st + k];
    }
    const SegmentIntegral seg = detail::inverse_distance_closed<D>(p, q);
    if (seg.status == SegmentStatus::LogSingular) {
      ++bad;
      if (!std::isfinite(seg.value))
        fail(ErrorKind::Singularity, "bare Coulomb separation vanished at a worldline point");
    }
    acc += seg.value;
  }
  if (flagged) *flagged += bad;
  return -b.sign * b.alpha * acc;
}

template <int D>
double square_well_sum(const SquareWell& w, const double* x, int np) {
  const int st = np + 1;
  double c[D], h[D];
  for (int d = 0; d < D; ++d) {
    c[d] = w.center[d];
    h[d] = w.half_widths[d];
  }
  long long inside = 0;
#pragma omp simd reduction(+ : inside)
  for (int k = 1; k <= np; ++k) {
    bool in = true;
    for (int d = 0; d < D; ++d) in = in && (std::abs(x[d * st + k] - c[d]) < h[d]);
    inside += in ? 1 : 0;
  }
  return w.depth * static_cast<double>(inside);
}

template <int D>
double gaussian_well_sum(const GaussianWell& g, const double* x, int np) {
  const int st = np + 1;
  double acc = 0.0;
  for (int k = 1; k <= np; ++k) {
    double r2 = 0.0;
    for (int d = 0; d < D; ++d) {
      const double z = x[d * st + k] - g.center[d];
      r2 += z * z;
    }
    acc += std::exp(-g.lambda * r2);
  }
  return g.depth * acc;
}

template <int D>
double pair_sum_d(const TermShape& shape, const double* xa, const double* xb, int np, bool smoothing,
                  long long* flagged) {
  if (const auto* h = std::get_if<Harmonic>(&shape)) return harmonic_sum<D>(*h, xa, xb, np);
  if (const auto* s = std::get_if<SoftCoulomb>(&shape)) return soft_coulomb_sum<D>(*s, xa, xb, np);
  if (const auto* e = std::get_if<ErfcEffective>(&shape)) return erfc_sum<D>(*e, xa, xb, np);
  if (const auto* b = std::get_if<BareCoulomb>(&shape))
    return smoothing ? bare_coulomb_smoothed<D>(*b, xa, xb, np, flagged) : bare_coulomb_riemann<D>(*b, xa, xb, np);
  fail(ErrorKind::InvalidArgument, "not a pair term");
}

template <int D>
double external_sum_d(const TermShape& shape, const double* x, int np) {
  if (const auto* w = std::get_if<SquareWell>(&shape)) return square_well_sum<D>(*w, x, np);
  if (const auto* g = std::get_if<GaussianWell>(&shape)) return gaussian_well_sum<D>(*g, x, np);
  fail(ErrorKind::InvalidArgument, "not an external term");
}

}  // namespace

double external_path_sum(const TermShape& shape, const double* x, int n_points, int dimension) {
  switch (dimension) {
    case 1: return external_sum_d<1>(shape, x, n_points);
    case 2: return external_sum_d<2>(shape, x, n_points);
    case 3: return external_sum_d<3>(shape, x, n_points);
  }
  fail(ErrorKind::InvalidArgument, "dimension must be 1, 2 or 3");
}

double pair_path_sum(const TermShape& shape, const double* xa, const double* xb, int n_points, int dimension,
                     bool smoothing, long long* flagged) {
  switch (dimension) {
    case 1: return pair_sum_d<1>(shape, xa, xb, n_points, smoothing, flagged);
    case 2: return pair_sum_d<2>(shape, xa, xb, n_points, smoothing, flagged);
    case 3: return pair_sum_d<3>(shape, xa, xb, n_points, smoothing, flagged);
  }
  fail(ErrorKind::InvalidArgument, "dimension must be 1, 2 or 3");
}

ActionEvaluator::ActionEvaluator(const PotentialSpec& potential, int n_points, bool smoothing)
    : n_points_(n_points),
      dimension_(potential.dimension()),
      n_particles_(potential.n_particles()),
      smoothing_(smoothing),
      externals_(potential.n_particles()),
      potential_(potential) {
  require(n_points >= 2, "n_points must be >= 2");
  const auto& terms = potential_.terms();
  for (std::size_t i = 0; i < terms.size(); ++i) {
    const auto& t = terms[i];
    if (t.particles.size() == 1) {
      externals_[t.particles[0]].push_back(i);
      continue;
    }
    int a = t.particles[0], b = t.particles[1];
    if (a > b) std::swap(a, b);
    PairGroup* g = nullptr;
    for (auto& existing : groups_)
      if (existing.a == a && existing.b == b) g = &existing;
    if (!g) {
      groups_.push_back(PairGroup{a, b, {}});
      g = &groups_.back();
    }
    g->terms.push_back(i);
  }
}

double ActionEvaluator::external_sum(int particle, const double* x) const {
  double s = 0.0;
  for (std::size_t i : externals_[particle])
    s += external_path_sum(potential_.terms()[i].shape, x, n_points_, dimension_);
  return s;
}

double ActionEvaluator::group_sum(std::size_t group, const double* xa, const double* xb, long long* flagged) const {
  double s = 0.0;
  for (std::size_t i : groups_[group].terms)
    s += pair_path_sum(potential_.terms()[i].shape, xa, xb, n_points_, dimension_, smoothing_, flagged);
  return s;
}

double ActionEvaluator::total(std::span<const double* const> x, long long* flagged) const {
  require(x.size() == static_cast<std::size_t>(n_particles_), "worldline count does not match the potential");
  double s = 0.0;
  for (int j = 0; j < n_particles_; ++j) s += external_sum(j, x[j]);
  for (std::size_t g = 0; g < groups_.size(); ++g) s += group_sum(g, x[groups_[g].a], x[groups_[g].b], flagged);
  return s;
}

}  // namespace wmc
