#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "wmc/diag.hpp"
#include "wmc/error.hpp"

namespace wmc {

namespace {

double poly(const std::vector<double>& c, double z) {
  double s = 0.0;
  for (auto it = c.rbegin(); it != c.rend(); ++it) s = s * z + *it;
  return s;
}

}  // namespace

double PadeModel::operator()(double x) const {
  const double z = x / x_scale;
  return poly(p, z) / poly(q, z);
}

PadeModel extrapolate(std::span<const ConvergencePoint> points, int order) {
  require(order >= 1 && order <= 6, "Pade order must be between 1 and 6");
  const int n = static_cast<int>(points.size());
  const int unknowns = 2 * order + 1;
  if (n < unknowns) {
    std::ostringstream msg;
    msg << "Pade order " << order << " needs at least " << unknowns << " points, got " << n;
    fail(ErrorKind::InsufficientPoints, msg.str());
  }
  double x_max = 0.0, x_min = std::numeric_limits<double>::infinity();
  for (const auto& pt : points) {
    require(pt.n > 0.0 && std::isfinite(pt.e0), "convergence points need N > 0 and finite E0");
    x_max = std::max(x_max, 1.0 / pt.n);
    x_min = std::min(x_min, 1.0 / pt.n);
  }
  // y Q(z) = P(z) with q_0 = 1:  sum_k p_k z^k - y sum_{k>=1} q_k z^k = y
  Eigen::MatrixXd A(n, unknowns);
  Eigen::VectorXd rhs(n);
  for (int i = 0; i < n; ++i) {
    const double z = (1.0 / points[i].n) / x_max;
    const double y = points[i].e0;
    double zk = 1.0;
    for (int k = 0; k <= order; ++k) {
      A(i, k) = zk;
      if (k >= 1) A(i, order + k) = -y * zk;
      zk *= z;
    }
    rhs(i) = y;
  }
  const Eigen::VectorXd c = A.completeOrthogonalDecomposition().solve(rhs);
  PadeModel model;
  model.m = model.n = order;
  model.x_scale = x_max;
  model.p.assign(c.data(), c.data() + order + 1);
  model.q.assign(1, 1.0);
  for (int k = 1; k <= order; ++k) model.q.push_back(c(order + k));
  model.asymptote = model.p[0];

  // The denominator must keep one sign over the sampled range.
  const double z0 = x_min / x_max;
  const int probes = 4000;
  const double q_start = poly(model.q, z0);
  for (int i = 0; i <= probes; ++i) {
    const double z = z0 + (1.0 - z0) * i / probes;
    const double qz = poly(model.q, z);
    if (!(qz * q_start > 0.0)) {
      std::ostringstream msg;
      msg << "Pade denominator vanishes near 1/N = " << z * x_max;
      fail(ErrorKind::PolesOnRange, msg.str());
    }
  }
  for (const auto& pt : points) {
    const double qz = poly(model.q, (1.0 / pt.n) / x_max);
    if (!(qz * q_start > 0.0)) fail(ErrorKind::PolesOnRange, "Pade denominator vanishes at a sampled N");
  }
  return model;
}

QuadraticErrorModel error_model(std::span<const std::pair<double, double>> samples) {
  if (samples.size() != 3) fail(ErrorKind::DegenerateNodes, "the error model takes exactly three (d, error) pairs");
  for (std::size_t i = 0; i < 3; ++i) {
    require(std::isfinite(samples[i].first) && std::isfinite(samples[i].second), "error model inputs must be finite");
    for (std::size_t j = i + 1; j < 3; ++j)
      if (samples[i].first == samples[j].first) fail(ErrorKind::DegenerateNodes, "error model nodes must be distinct");
  }
  Eigen::Matrix3d A;
  Eigen::Vector3d b;
  for (int i = 0; i < 3; ++i) {
    const double d = samples[i].first;
    A(i, 0) = 1.0;
    A(i, 1) = d;
    A(i, 2) = d * d;
    b(i) = samples[i].second;
  }
  const Eigen::Vector3d c = A.fullPivLu().solve(b);
  return {c(0), c(1), c(2)};
}

}  // namespace wmc
