#include <Eigen/Dense>
#include <algorithm>
#include <boost/math/quadrature/tanh_sinh.hpp>
#include <cmath>
#include <sstream>

#include "wmc/error.hpp"
#include "wmc/harness.hpp"
#include "wmc/rng.hpp"
#include "wmc/smoothing.hpp"

namespace wmc {

bool VerifyReport::all_passed() const {
  return std::all_of(checks.begin(), checks.end(), [](const CheckResult& c) { return c.passed; });
}

namespace {

CheckResult bridge_covariance(int loops, double omega_scale) {
  const int np = 16;
  const YloopSource source(np, omega_scale > 0.0 ? omega_scale : kOmegaScale);
  UnitLoop u(np, 1);
  const int m = np - 1;
  Eigen::MatrixXd sum = Eigen::MatrixXd::Zero(m, m);
  for (int l = 0; l < loops; ++l) {
    source.fill(StreamKey{0xC0FFEE, 0, static_cast<std::uint64_t>(l)}, u);
    Eigen::Map<const Eigen::VectorXd> q(u.component(0) + 1, m);
    sum.noalias() += q * q.transpose();
  }
  sum /= loops;
  int bad = 0, total = 0;
  double worst = 0.0;
  for (int j = 1; j <= m; ++j)
    for (int k = j; k <= m; ++k) {
      auto c = [&](int x, int y) { return static_cast<double>(std::min(x, y)) * (np - std::max(x, y)) / (np * np); };
      const double se = std::sqrt((c(j, j) * c(k, k) + c(j, k) * c(j, k)) / loops);
      const double z = (sum(j - 1, k - 1) - c(j, k)) / se;
      worst = std::max(worst, std::abs(z));
      ++total;
      if (std::abs(z) > 3.0) ++bad;
    }
  // Under a correct sampler about 0.27% of entries exceed 3 sigma.
  const double expect = 0.0027 * total;
  const int allowed = static_cast<int>(std::ceil(expect + 4.0 * std::sqrt(expect) + 1.0));
  std::ostringstream d;
  d << bad << " of " << total << " entries beyond 3 sigma (allowed " << allowed << "), max |z| " << worst;
  return {"bridge_covariance", bad <= allowed, d.str()};
}

CheckResult zero_potential() {
  SystemSpec s;
  s.dimension = 2;
  s.particles = {{1.0, {0.0, 0.0}, {0.5, -0.25}}, {0.7, {0.1, 0.2}, {0.1, 0.2}}};
  s.potential = PotentialSpec(2, 2);
  EstimatorConfig c;
  c.loops = 20;
  c.n_points = 64;
  c.t_grid = {1.5};
  const auto e = estimate_propagator(s, c, 1.5);
  double expect = 0.0;
  for (const auto& p : s.particles) expect += log_free_kernel(p.mass, 2, p.start, p.end, 1.5);
  const double diff = std::abs(e.ln_kernel - expect);
  std::ostringstream d;
  d << "|ln K - ln K_free| = " << diff << ", sem = " << e.ln_kernel_err;
  return {"zero_potential_exact", diff <= 1e-13 * std::max(1.0, std::abs(expect)) && e.ln_kernel_err == 0.0, d.str()};
}

CheckResult harmonic_offset() {
  SystemSpec s;
  s.dimension = 1;
  s.particles = {{1.0, {0.0}, {0.0}}, {1.0, {0.0}, {0.0}}};
  EstimatorConfig c;
  c.loops = 30;
  c.n_points = 200;
  const double T = 2.0, d = 1.5, mu = 0.5, omega = 1.0;
  c.t_grid = {T};
  s.potential = make_harmonic_pair(mu, omega, 0.0, 1);
  const auto k0 = estimate_propagator(s, c, T);
  s.potential = make_harmonic_pair(mu, omega, d, 1);
  const auto kd = estimate_propagator(s, c, T);
  const double diff = std::abs((kd.ln_kernel - k0.ln_kernel) + 0.5 * mu * omega * omega * d * d * T);
  std::ostringstream dd;
  dd << "|ln K(d) - ln K(0) + mu w^2 d^2 T / 2| = " << diff;
  return {"harmonic_offset_factorisation", diff <= 1e-12, dd.str()};
}

double quadrature_oracle(const double* a, const double* b, int dim) {
  auto f = [&](double l) {
    double r2 = 0.0;
    for (int k = 0; k < dim; ++k) {
      const double x = a[k] + (b[k] - a[k]) * l;
      r2 += x * x;
    }
    return 1.0 / std::sqrt(r2);
  };
  // Split at the closest approach so each piece peaks at an end.
  double ad = 0.0, dd = 0.0;
  for (int k = 0; k < dim; ++k) {
    ad += a[k] * (b[k] - a[k]);
    dd += (b[k] - a[k]) * (b[k] - a[k]);
  }
  const double lstar = dd > 0.0 ? std::clamp(-ad / dd, 0.0, 1.0) : 0.0;
  static boost::math::quadrature::tanh_sinh<double> ts;
  double v = 0.0;
  if (lstar > 0.0) v += ts.integrate(f, 0.0, lstar, 1e-14);
  if (lstar < 1.0) v += ts.integrate(f, lstar, 1.0, 1e-14);
  return v;
}

CheckResult smoothing_oracle(int pairs) {
  NormalStream rng(StreamKey{0x5A5A, 0, 0});
  double worst = 0.0;
  int done = 0;
  while (done < pairs) {
    const int dim = (done % 2) ? 3 : 2;
    double a[3], b[3];
    for (int k = 0; k < dim; ++k) {
      a[k] = rng.next();
      b[k] = rng.next();
    }
    const auto r = inverse_distance_integral({a, static_cast<std::size_t>(dim)}, {b, static_cast<std::size_t>(dim)});
    if (r.status != SegmentStatus::Ok) continue;
    const double ref = quadrature_oracle(a, b, dim);
    worst = std::max(worst, std::abs(r.value - ref) / ref);
    ++done;
  }
  std::ostringstream d;
  d << pairs << " segments, max relative deviation " << worst;
  return {"smoothing_quadrature", worst <= 1e-10, d.str()};
}

CheckResult dense_eigensolve() {
  SystemSpec s;
  s.dimension = 1;
  s.particles = {{1.0, {0.0}, {0.0}}, {1.0, {0.0}, {0.0}}};
  s.potential = make_soft_coulomb_pair(1.0, 1.0, 1);
  const auto H = build_grid_hamiltonian(s, 14, 6.0, false);
  const long long n = H.size();
  Eigen::MatrixXd dense(n, n);
  Eigen::VectorXd e = Eigen::VectorXd::Zero(n), col(n);
  for (long long i = 0; i < n; ++i) {
    e(i) = 1.0;
    H.apply(e.data(), col.data());
    dense.col(i) = col;
    e(i) = 0.0;
  }
  const double exact = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(dense, Eigen::EigenvaluesOnly).eigenvalues()(0);
  const auto gs = ground_state(H, 1e-11);
  const double rel = std::abs(gs.energy - exact) / std::abs(exact);
  std::ostringstream d;
  d << "N_T = " << n << ", Lanczos " << gs.energy << " vs dense " << exact << ", relative " << rel;
  return {"dense_eigensolve", rel <= 1e-10, d.str()};
}

CheckResult noiseless_fit() {
  KernelSeries s;
  const double a = 0.3, e0 = -0.75, b = 0.5;
  for (int i = 0; i < 30; ++i) {
    const double t = 2.0 + 0.5 * i;
    s.points.push_back({t, -(-a + e0 * t + b * std::log(t)), 0.01});
  }
  const auto f = fit_linear_plus_log(s, {s.t_min(), s.t_max()});
  const double dev = std::max({std::abs(f.e0 - e0), std::abs(f.a - a), std::abs(f.b - b)});
  std::ostringstream d;
  d << "max parameter deviation " << dev;
  return {"noiseless_fit", dev <= 1e-9, d.str()};
}

}  // namespace

VerifyReport verify(const VerifySpec& spec) {
  VerifyReport report;
  auto guarded = [&](const char* name, auto&& fn) {
    try {
      report.checks.push_back(fn());
    } catch (const std::exception& e) {
      report.checks.push_back({name, false, e.what()});
    }
  };
  guarded("bridge_covariance", [&] { return bridge_covariance(spec.covariance_loops, spec.omega_scale); });
  guarded("zero_potential_exact", [] { return zero_potential(); });
  guarded("harmonic_offset_factorisation", [] { return harmonic_offset(); });
  guarded("smoothing_quadrature", [&] { return smoothing_oracle(spec.smoothing_pairs); });
  guarded("dense_eigensolve", [] { return dense_eigensolve(); });
  guarded("noiseless_fit", [] { return noiseless_fit(); });
  return report;
}

}  // namespace wmc
