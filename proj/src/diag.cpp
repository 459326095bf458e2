#include "wmc/diag.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "wmc/error.hpp"
#include "wmc/parallel.hpp"
#include "wmc/rng.hpp"

namespace wmc {

long long GridSpec::total() const {
  long long t = 1;
  for (int a = 0; a < axes(); ++a) {
    if (t > std::numeric_limits<long long>::max() / n) fail(ErrorKind::InvalidArgument, "grid size overflows");
    t *= n;
  }
  return t;
}

void GridSpec::validate() const {
  if (n < 3) fail(ErrorKind::InvalidArgument, "grid needs N >= 3");
  if (!(box > 0.0) || !std::isfinite(box)) fail(ErrorKind::InvalidArgument, "grid box half-width must be positive");
  if (n_particles < 1 || dimension < 1 || dimension > 3)
    fail(ErrorKind::InvalidArgument, "grid needs at least one particle and 1 <= D <= 3");
  (void)total();
}

GridHamiltonian::GridHamiltonian(GridSpec grid, std::vector<double> masses, std::vector<double> potential)
    : grid_(grid), masses_(std::move(masses)), diagonal_(std::move(potential)) {
  grid_.validate();
  require(static_cast<int>(masses_.size()) == grid_.n_particles, "one mass per particle required");
  require(static_cast<long long>(diagonal_.size()) == grid_.total(), "potential must have one value per node");
  const double h = grid_.spacing();
  const int A = grid_.axes();
  double kin = 0.0;
  coupling_.resize(A);
  stride_.assign(A, 1);
  for (int a = A - 2; a >= 0; --a) stride_[a] = stride_[a + 1] * grid_.n;
  for (int a = 0; a < A; ++a) {
    const double m = masses_[a / grid_.dimension];
    require(m > 0.0 && std::isfinite(m), "masses must be positive");
    coupling_[a] = -1.0 / (2.0 * m * h * h);
    kin += 1.0 / (m * h * h);
  }
  for (auto& v : diagonal_) v += kin;
}

void GridHamiltonian::apply(const double* in, double* out) const {
  const int A = grid_.axes();
  const long long N = grid_.n;
  const long long slab = stride_[0];
  // One slab per index along axis 0; every slab writes only its own rows.
  parallel_for(static_cast<std::size_t>(N), workers_, [&](std::size_t i0) {
    const long long base = static_cast<long long>(i0) * slab;
    double* o = out + base;
    const double* x = in + base;
    const double* d = diagonal_.data() + base;
#pragma omp simd
    for (long long t = 0; t < slab; ++t) o[t] = d[t] * x[t];
    {
      const double c = coupling_[0];
      if (i0 > 0) {
        const double* xm = x - slab;
#pragma omp simd
        for (long long t = 0; t < slab; ++t) o[t] += c * xm[t];
      }
      if (static_cast<long long>(i0) + 1 < N) {
        const double* xp = x + slab;
#pragma omp simd
        for (long long t = 0; t < slab; ++t) o[t] += c * xp[t];
      }
    }
    for (int a = 1; a < A; ++a) {
      const long long s = stride_[a];
      const long long block = s * N;
      const double c = coupling_[a];
      for (long long b = 0; b < slab; b += block) {
        double* ob = o + b;
        const double* xb = x + b;
        if (s == 1) {
          ob[0] += c * xb[1];
          for (long long i = 1; i + 1 < N; ++i) ob[i] += c * (xb[i - 1] + xb[i + 1]);
          ob[N - 1] += c * xb[N - 2];
          continue;
        }
        for (long long i = 0; i < N; ++i) {
          double* row = ob + i * s;
          const double* xr = xb + i * s;
          if (i > 0) {
#pragma omp simd
            for (long long t = 0; t < s; ++t) row[t] += c * xr[t - s];
          }
          if (i + 1 < N) {
#pragma omp simd
            for (long long t = 0; t < s; ++t) row[t] += c * xr[t + s];
          }
        }
      }
    }
  });
}

GridHamiltonian assemble(const GridSpec& grid, const GridPotential& potential, std::span<const double> masses,
                         int workers) {
  grid.validate();
  require(static_cast<int>(masses.size()) == grid.n_particles, "one mass per particle required");
  const long long total = grid.total();
  const int A = grid.axes();
  const long long N = grid.n;
  const long long slab = total / N;
  std::vector<double> v(static_cast<std::size_t>(total));
  std::vector<double> nodes(grid.n);
  for (int i = 0; i < grid.n; ++i) nodes[i] = grid.node(i);
  parallel_for(static_cast<std::size_t>(N), workers, [&](std::size_t i0) {
    std::vector<int> idx(A, 0);
    std::vector<double> x(A);
    idx[0] = static_cast<int>(i0);
    const long long base = static_cast<long long>(i0) * slab;
    for (long long t = 0; t < slab; ++t) {
      for (int a = 0; a < A; ++a) x[a] = nodes[idx[a]];
      double val;
      try {
        val = potential(x);
      } catch (const Error& e) {
        fail(ErrorKind::SingularPotentialOnGrid, e.what());
      }
      if (!std::isfinite(val)) {
        std::ostringstream msg;
        msg << "potential is not finite at node (";
        for (int a = 0; a < A; ++a) msg << (a ? ", " : "") << x[a];
        msg << ")";
        fail(ErrorKind::SingularPotentialOnGrid, msg.str());
      }
      v[static_cast<std::size_t>(base + t)] = val;
      for (int a = A - 1; a >= 1; --a) {
        if (++idx[a] < grid.n) break;
        idx[a] = 0;
      }
    }
  });
  GridHamiltonian H(grid, std::vector<double>(masses.begin(), masses.end()), std::move(v));
  H.set_workers(workers);
  return H;
}

GridHamiltonian assemble(const GridSpec& grid, const PotentialSpec& potential, std::span<const double> masses,
                         int workers) {
  require(potential.n_particles() == grid.n_particles && potential.dimension() == grid.dimension,
          "potential and grid disagree on particle count or dimension");
  return assemble(
      grid, GridPotential([&potential](std::span<const double> x) { return potential.eval(x); }), masses, workers);
}

GroundState ground_state(const LinearOperator& op, double tol, int max_iter, const LanczosOptions& options) {
  require(tol > 0.0, "tolerance must be positive");
  require(max_iter > 0, "max_iter must be positive");
  const long long n = op.size();
  require(n >= 1, "operator is empty");
  const double per_vector = 8.0 * static_cast<double>(n);
  int m = options.krylov;
  m = std::min<long long>(m, std::max<long long>(8, static_cast<long long>(options.memory_budget_bytes / per_vector) - 2));
  m = static_cast<int>(std::min<long long>(m, n));
  int keep = std::clamp(options.keep, 1, std::max(1, m - 2));
  if (m <= 2) keep = 1;

  Eigen::MatrixXd V(n, m + 1);
  Eigen::VectorXd w(n);
  Eigen::MatrixXd H = Eigen::MatrixXd::Zero(m, m);
  {
    NormalStream rng(StreamKey{splitmix64(options.seed), 0, 0});
    for (long long i = 0; i < n; ++i) V(i, 0) = rng.next();
    V.col(0).normalize();
  }

  GroundState out;
  double best = std::numeric_limits<double>::infinity();
  double best_res = std::numeric_limits<double>::infinity();
  int j0 = 0;
  for (;;) {
    // never run past max_iter inside a cycle
    const int stop = static_cast<int>(std::min<long long>(m, j0 + static_cast<long long>(max_iter - out.matvecs)));
    int used = stop;
    double beta = 0.0;
    for (int j = j0; j < stop; ++j) {
      op.apply(V.col(j).data(), w.data());
      ++out.matvecs;
      // Two Gram-Schmidt passes keep the basis orthogonal to roundoff.
      Eigen::VectorXd h = V.leftCols(j + 1).transpose() * w;
      w.noalias() -= V.leftCols(j + 1) * h;
      const Eigen::VectorXd h2 = V.leftCols(j + 1).transpose() * w;
      w.noalias() -= V.leftCols(j + 1) * h2;
      h += h2;
      for (int i = 0; i <= j; ++i) H(i, j) = h(i);
      beta = w.norm();
      const double scale = std::max(1.0, H.topLeftCorner(j + 1, j + 1).cwiseAbs().maxCoeff());
      if (beta <= 1e-13 * scale) {
        used = j + 1;
        beta = 0.0;
        break;
      }
      V.col(j + 1) = w / beta;
    }
    Eigen::MatrixXd Hs = H.topLeftCorner(used, used).triangularView<Eigen::Upper>();
    Hs.triangularView<Eigen::StrictlyLower>() = Hs.transpose().triangularView<Eigen::StrictlyLower>();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(Hs);
    const Eigen::VectorXd& theta = eig.eigenvalues();
    const Eigen::MatrixXd& S = eig.eigenvectors();
    const double est_res = beta * std::abs(S(used - 1, 0));
    if (est_res < best_res || !std::isfinite(best)) {
      best = theta(0);
      best_res = est_res;
    }
    if (est_res <= tol || beta == 0.0) {
      Eigen::VectorXd y = V.leftCols(used) * S.col(0);
      y.normalize();
      op.apply(y.data(), w.data());
      ++out.matvecs;
      const double rayleigh = y.dot(w);
      w -= rayleigh * y;
      const double res = w.norm();
      if (res <= tol || beta == 0.0) {
        out.energy = rayleigh;
        out.residual = res;
        if (options.keep_vector) out.vector.assign(y.data(), y.data() + n);
        return out;
      }
    }
    if (out.matvecs >= max_iter) {
      std::ostringstream msg;
      msg << "Lanczos did not reach residual " << tol << " within " << max_iter << " operator applications";
      throw NoConvergenceError(msg.str(), best, best_res, out.matvecs);
    }
    // Thick restart: keep the lowest Ritz pairs plus the residual direction.
    const int k = std::min(keep, used - 1);
    const Eigen::MatrixXd Vk = V.leftCols(used) * S.leftCols(k);
    V.leftCols(k) = Vk;
    V.col(k) = V.col(used);
    H.setZero();
    for (int i = 0; i < k; ++i) {
      H(i, i) = theta(i);
      H(i, k) = beta * S(used - 1, i);
    }
    j0 = k;
    ++out.restarts;
  }
}

}  // namespace wmc
