#include "wmc/fit.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "wmc/error.hpp"

namespace wmc {

KernelSeries KernelSeries::from_estimates(std::span<const PropagatorEstimate> estimates, std::string tag,
                                          std::uint64_t config_hash) {
  KernelSeries s;
  s.tag = std::move(tag);
  s.config_hash = config_hash;
  for (const auto& e : estimates)
    if (e.valid && std::isfinite(e.ln_kernel)) s.points.push_back({e.t, e.ln_kernel, e.ln_kernel_err});
  std::sort(s.points.begin(), s.points.end(), [](const auto& a, const auto& b) { return a.t < b.t; });
  return s;
}

double KernelSeries::t_min() const {
  require(!points.empty(), "empty kernel series");
  double m = points.front().t;
  for (const auto& p : points) m = std::min(m, p.t);
  return m;
}

double KernelSeries::t_max() const {
  require(!points.empty(), "empty kernel series");
  double m = points.front().t;
  for (const auto& p : points) m = std::max(m, p.t);
  return m;
}

LinearLeastSquares weighted_least_squares(const std::vector<double>& design, int p, const std::vector<double>& y,
                                          const std::vector<double>& weights) {
  const int n = static_cast<int>(y.size());
  require(static_cast<int>(design.size()) == n * p && static_cast<int>(weights.size()) == n,
          "least squares shape mismatch");
  Eigen::MatrixXd X(n, p);
  Eigen::VectorXd b(n);
  for (int i = 0; i < n; ++i) {
    const double sw = std::sqrt(weights[i]);
    for (int j = 0; j < p; ++j) X(i, j) = sw * design[static_cast<std::size_t>(i) * p + j];
    b(i) = sw * y[i];
  }
  // Column equilibration keeps the condition number meaningful across units.
  Eigen::VectorXd colscale(p);
  for (int j = 0; j < p; ++j) {
    const double nrm = X.col(j).norm();
    colscale(j) = nrm > 0 ? 1.0 / nrm : 1.0;
  }
  const Eigen::MatrixXd Xs = X * colscale.asDiagonal();
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(Xs);
  const auto& sv = svd.singularValues();
  LinearLeastSquares out;
  out.condition = sv(p - 1) > 0 ? sv(0) / sv(p - 1) : std::numeric_limits<double>::infinity();
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(Xs);
  const Eigen::VectorXd zs = qr.solve(b);
  const Eigen::VectorXd theta = colscale.asDiagonal() * zs;
  const Eigen::VectorXd r = X * theta - b;
  out.chi2 = r.squaredNorm();
  out.dof = n - p;
  const Eigen::MatrixXd cov_s = (Xs.transpose() * Xs).inverse();
  const Eigen::MatrixXd cov = colscale.asDiagonal() * cov_s * colscale.asDiagonal();
  out.theta.assign(theta.data(), theta.data() + p);
  out.covariance.assign(p, std::vector<double>(p));
  for (int i = 0; i < p; ++i)
    for (int j = 0; j < p; ++j) out.covariance[i][j] = cov(i, j);
  return out;
}

namespace {

std::vector<KernelPoint> window_points(const KernelSeries& series, FitWindow w) {
  std::vector<KernelPoint> pts;
  const double tol = 1e-9 * std::max(1.0, std::abs(w.t_max));
  for (const auto& p : series.points)
    if (p.t >= w.t_min - tol && p.t <= w.t_max + tol) pts.push_back(p);
  // A total order makes the result independent of input order.
  std::sort(pts.begin(), pts.end(), [](const KernelPoint& a, const KernelPoint& b) {
    if (a.t != b.t) return a.t < b.t;
    if (a.ln_k != b.ln_k) return a.ln_k < b.ln_k;
    return a.ln_k_err < b.ln_k_err;
  });
  return pts;
}

std::vector<double> weights_for(const std::vector<KernelPoint>& pts) {
  bool all_zero = true;
  for (const auto& p : pts) {
    require(std::isfinite(p.ln_k_err) && p.ln_k_err >= 0.0, "ln K errors must be finite and non-negative");
    if (p.ln_k_err > 0.0) all_zero = false;
  }
  std::vector<double> w;
  for (const auto& p : pts) {
    if (all_zero) {
      w.push_back(1.0);
    } else {
      require(p.ln_k_err > 0.0, "mixed zero and non-zero ln K errors cannot be weighted");
      w.push_back(1.0 / (p.ln_k_err * p.ln_k_err));
    }
  }
  return w;
}

EnergyFitResult run_fit(const KernelSeries& series, FitWindow window, FitForm form, const FitOptions& opt) {
  const auto pts = window_points(series, window);
  const bool free_b = form == FitForm::LinearPlusLog && !opt.fixed_b;
  const int p = free_b ? 3 : 2;
  const int needed = form == FitForm::LinearPlusLog ? 4 : 3;
  const int n = static_cast<int>(pts.size());
  if (n < needed) {
    std::ostringstream msg;
    msg << "window [" << window.t_min << ", " << window.t_max << "] holds " << n << " points, need " << needed;
    fail(ErrorKind::InsufficientPoints, msg.str());
  }
  int distinct = 1;
  for (int i = 1; i < n; ++i)
    if (pts[i].t != pts[i - 1].t) ++distinct;
  if (distinct < p) {
    if (form == FitForm::Linear) fail(ErrorKind::SingularDesign, "all T values in the window coincide");
    fail(ErrorKind::IllConditioned, "too few distinct T values for the linear-plus-log basis");
  }
  const double fb = form == FitForm::LinearPlusLog && opt.fixed_b ? *opt.fixed_b : 0.0;
  std::vector<double> X, y;
  for (const auto& q : pts) {
    require(q.t > 0.0, "T must be positive");
    X.push_back(-1.0);
    X.push_back(q.t);
    if (free_b) X.push_back(std::log(q.t));
    y.push_back(-q.ln_k - fb * std::log(q.t));
  }
  const auto w = weights_for(pts);
  const auto ls = weighted_least_squares(X, p, y, w);
  if (form == FitForm::LinearPlusLog && !(ls.condition <= opt.max_condition)) {
    std::ostringstream msg;
    msg << "design condition number " << ls.condition;
    fail(ErrorKind::IllConditioned, msg.str());
  }
  if (form == FitForm::Linear && !std::isfinite(ls.condition)) fail(ErrorKind::SingularDesign, "singular design");

  EnergyFitResult r;
  r.form = form;
  r.window = {pts.front().t, pts.back().t};
  r.n_points = n;
  r.dof = ls.dof;
  r.chi2 = ls.chi2;
  r.chi2_per_dof = ls.dof > 0 ? ls.chi2 / ls.dof : 0.0;
  r.condition = ls.condition;
  const double s2 = opt.scaling == ErrorScaling::ResidualScaled && ls.dof > 0 ? r.chi2_per_dof : 1.0;
  for (int i = 0; i < p; ++i)
    for (int j = 0; j < p; ++j) r.covariance[i][j] = ls.covariance[i][j] * s2;
  r.a = ls.theta[0];
  r.e0 = ls.theta[1];
  r.b = free_b ? ls.theta[2] : fb;
  r.a_err = std::sqrt(r.covariance[0][0]);
  r.e0_err = std::sqrt(r.covariance[1][1]);
  r.b_err = free_b ? std::sqrt(r.covariance[2][2]) : 0.0;
  return r;
}

}  // namespace

EnergyFitResult fit_linear(const KernelSeries& series, FitWindow window, const FitOptions& options) {
  FitOptions o = options;
  o.fixed_b.reset();
  return run_fit(series, window, FitForm::Linear, o);
}

EnergyFitResult fit_linear_plus_log(const KernelSeries& series, FitWindow window, int /*dimension*/,
                                    const FitOptions& options) {
  return run_fit(series, window, FitForm::LinearPlusLog, options);
}

EnergyFitResult fit_energy(const KernelSeries& series, FitWindow window, FitForm form, const FitOptions& options) {
  return form == FitForm::Linear ? fit_linear(series, window, options)
                                 : fit_linear_plus_log(series, window, 0, options);
}

FitWindow select_window(const KernelSeries& series, const WindowOptions& opt) {
  auto pts = series.points;
  std::sort(pts.begin(), pts.end(), [](const auto& a, const auto& b) { return a.t < b.t; });
  if (static_cast<int>(pts.size()) < std::max(8, opt.min_points))
    fail(ErrorKind::NoStableWindow, "fewer than 8 points in the series");
  const double range = pts.back().t - pts.front().t;
  const double span = std::min(opt.span, range);
  if (span < opt.min_span - 1e-9) {
    std::ostringstream msg;
    msg << "T range " << range << " is shorter than the minimum window span " << opt.min_span;
    fail(ErrorKind::NoStableWindow, msg.str());
  }
  const double tol = 1e-9 * std::max(1.0, std::abs(pts.back().t));
  struct Candidate {
    FitWindow w;
    EnergyFitResult fit;
  };
  std::vector<Candidate> cands;
  for (const auto& start : pts) {
    if (start.t + span > pts.back().t + tol) break;
    FitWindow w{start.t, start.t + span};
    int count = 0;
    for (const auto& q : pts)
      if (q.t >= w.t_min - tol && q.t <= w.t_max + tol) ++count;
    if (count < opt.min_points) continue;
    try {
      cands.push_back({w, fit_energy(series, w, opt.form, opt.fit)});
    } catch (const Error&) {
    }
  }
  if (cands.empty()) fail(ErrorKind::NoStableWindow, "no candidate window could be fitted");
  if (cands.size() == 1) return cands.front().w;
  int best = -1;
  for (std::size_t i = 0; i < cands.size(); ++i) {
    const auto& c = cands[i];
    const auto& other = i + 1 < cands.size() ? cands[i + 1] : cands[i > 0 ? i - 1 : i];
    if (&other == &c) continue;
    const bool stable = std::abs(c.fit.e0 - other.fit.e0) < c.fit.e0_err ||
                        (c.fit.e0_err == 0.0 && std::abs(c.fit.e0 - other.fit.e0) <= 1e-12 * std::abs(c.fit.e0));
    if (!stable) continue;
    if (best < 0 || c.fit.chi2_per_dof <= cands[best].fit.chi2_per_dof * (1 + 1e-12) + 1e-300) best = static_cast<int>(i);
  }
  if (best < 0) fail(ErrorKind::NoStableWindow, "no window with E0 stable under a one-step shift");
  return cands[best].w;
}

PowerLawFit fit_power_law(std::span<const PowerLawPoint> points) {
  if (points.size() < 2) fail(ErrorKind::InsufficientPoints, "power law needs at least two points");
  const bool neg = points[0].e0 < 0;
  bool any_err = false;
  for (const auto& p : points) {
    require(p.d > 0.0, "power law needs d > 0");
    if (p.e0 == 0.0 || (p.e0 < 0) != neg) fail(ErrorKind::SignMixture, "E0 values do not share one sign");
    if (p.err > 0.0) any_err = true;
  }
  std::vector<double> X, y, w;
  for (const auto& p : points) {
    X.push_back(1.0);
    X.push_back(std::log(p.d));
    y.push_back(std::log(std::abs(p.e0)));
    const double rel = any_err ? p.err / std::abs(p.e0) : 1.0;
    require(rel > 0.0, "power law errors must be all positive or all zero");
    w.push_back(1.0 / (rel * rel));
  }
  const auto ls = weighted_least_squares(X, 2, y, w);
  if (!std::isfinite(ls.condition)) fail(ErrorKind::SingularDesign, "all d values coincide");
  PowerLawFit f;
  f.log_prefactor = ls.theta[0];
  f.exponent = ls.theta[1];
  f.chi2_per_dof = ls.dof > 0 ? ls.chi2 / ls.dof : 0.0;
  const double s2 = ls.dof > 0 ? f.chi2_per_dof : 1.0;
  f.exponent_err = std::sqrt(ls.covariance[1][1] * s2);
  return f;
}

}  // namespace wmc
