#include <doctest.h>

#include <cmath>
#include <random>

#include "wmc/error.hpp"
#include "wmc/fit.hpp"

using namespace wmc;

namespace {

KernelSeries model_series(double a, double e0, double b, double t0, double t1, double dt, double err) {
  KernelSeries s;
  for (double t = t0; t <= t1 + 1e-9; t += dt) s.points.push_back({t, a - e0 * t - b * std::log(t), err});
  return s;
}

}  // namespace

TEST_CASE("noiseless recovery") {
  const auto s = model_series(0.3, -0.75, 0.5, 2.0, 16.0, 0.5, 0.01);
  const auto f = fit_linear_plus_log(s, {2.0, 16.0});
  CHECK(f.e0 == doctest::Approx(-0.75).epsilon(1e-10));
  CHECK(f.a == doctest::Approx(0.3).epsilon(1e-9));
  CHECK(f.b == doctest::Approx(0.5).epsilon(1e-9));
  CHECK(f.chi2 < 1e-18);
  CHECK(f.n_points == 29);
  CHECK(f.dof == 26);

  const auto l = fit_linear(model_series(1.0, 2.0, 0.0, 1.0, 5.0, 1.0, 0.1), {1.0, 5.0});
  CHECK(l.e0 == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(l.b == 0.0);
}

TEST_CASE("fixed b") {
  const auto s = model_series(0.2, 1.5, 1.0, 1.0, 10.0, 1.0, 0.05);
  FitOptions o;
  o.fixed_b = 1.0;
  const auto f = fit_linear_plus_log(s, {1.0, 10.0}, 2, o);
  CHECK(f.e0 == doctest::Approx(1.5).epsilon(1e-12));
  CHECK(f.b == 1.0);
  CHECK(f.b_err == 0.0);
}

TEST_CASE("absolute errors match the textbook covariance") {
  // two points, linear model: exact interpolation, sigma_E0 = sqrt(s1^2 + s2^2) / dT
  KernelSeries s;
  s.points = {{1.0, -1.0, 0.3}, {3.0, -2.0, 0.4}};
  FitOptions o;
  o.scaling = ErrorScaling::Absolute;
  CHECK_THROWS_AS(fit_linear(s, {1.0, 3.0}, o), Error);  // needs 3 points
  s.points.push_back({5.0, -3.0, 0.5});
  const auto f = fit_linear(s, {1.0, 5.0}, o);
  // oracle: weighted normal equations by hand
  double sw = 0, swt = 0, swtt = 0;
  for (const auto& p : s.points) {
    const double w = 1 / (p.ln_k_err * p.ln_k_err);
    sw += w;
    swt += w * p.t;
    swtt += w * p.t * p.t;
  }
  CHECK(f.e0_err == doctest::Approx(std::sqrt(sw / (sw * swtt - swt * swt))).epsilon(1e-12));
  CHECK(f.e0 == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("residual scaling") {
  std::mt19937_64 g(5);
  std::normal_distribution<double> n(0.0, 0.02);
  auto s = model_series(0.0, 1.0, 0.5, 1.0, 20.0, 0.5, 0.01);
  for (auto& p : s.points) p.ln_k += n(g);
  FitOptions abs;
  abs.scaling = ErrorScaling::Absolute;
  const auto fa = fit_linear_plus_log(s, {1.0, 20.0}, 1, abs);
  const auto fr = fit_linear_plus_log(s, {1.0, 20.0});
  CHECK(fr.e0_err == doctest::Approx(fa.e0_err * std::sqrt(fa.chi2_per_dof)).epsilon(1e-12));
  CHECK(std::abs(fr.e0 - 1.0) < 4 * fr.e0_err);
}

TEST_CASE("fit errors") {
  auto s = model_series(0.0, 1.0, 0.0, 1.0, 3.0, 1.0, 0.1);
  CHECK_THROWS_AS(fit_linear_plus_log(s, {1.0, 3.0}), Error);
  KernelSeries same;
  same.points = {{2.0, 1.0, 0.1}, {2.0, 1.1, 0.1}, {2.0, 0.9, 0.1}, {2.0, 1.0, 0.1}};
  try {
    fit_linear(same, {1.0, 3.0});
    FAIL("expected SingularDesign");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::SingularDesign);
  }
  try {
    fit_linear_plus_log(same, {1.0, 3.0});
    FAIL("expected IllConditioned");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::IllConditioned);
  }
}

TEST_CASE("window selection") {
  // two-state data: the contamination dies out before the chosen window
  KernelSeries s;
  for (double t = 1.0; t <= 30.0 + 1e-9; t += 0.5) {
    const double v = std::exp(-(-1.0) * t) * (1.0 + 0.8 * std::exp(-1.5 * t));
    s.points.push_back({t, std::log(v), 1e-6});
  }
  WindowOptions wo;
  wo.fit.scaling = ErrorScaling::Absolute;
  const auto w = select_window(s, wo);
  CHECK(w.t_max - w.t_min == doctest::Approx(15.0));
  CHECK(0.8 * std::exp(-1.5 * w.t_min) < 1e-6);
  const auto f = fit_linear_plus_log(s, w);
  CHECK(f.e0 == doctest::Approx(-1.0).epsilon(1e-6));

  KernelSeries few = model_series(0, 1, 0, 1, 7, 1, 0.1);
  CHECK_THROWS_AS(select_window(few), Error);
  KernelSeries shortr = model_series(0, 1, 0, 1, 5, 0.5, 0.1);
  CHECK_THROWS_AS(select_window(shortr), Error);
}

TEST_CASE("power law") {
  std::vector<PowerLawPoint> p;
  for (double d : {0.5, 1.0, 1.5, 2.0}) p.push_back({d, -1.3 * std::pow(d, -0.77), 0.0});
  const auto f = fit_power_law(p);
  CHECK(f.exponent == doctest::Approx(-0.77).epsilon(1e-12));
  CHECK(std::exp(f.log_prefactor) == doctest::Approx(1.3).epsilon(1e-12));
  p.push_back({3.0, 0.2, 0.0});
  CHECK_THROWS_AS(fit_power_law(p), Error);
}

TEST_CASE("series from estimates keeps valid points in T order") {
  std::vector<PropagatorEstimate> e(3);
  e[0].t = 2.0;
  e[0].valid = true;
  e[1].t = 1.0;
  e[1].valid = true;
  e[2].t = 3.0;
  const auto s = KernelSeries::from_estimates(e);
  REQUIRE(s.points.size() == 2);
  CHECK(s.t_min() == 1.0);
  CHECK(s.t_max() == 2.0);
}
