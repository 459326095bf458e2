#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <random>

#include "wmc/error.hpp"
#include "wmc/diag.hpp"

using namespace wmc;

namespace {

Eigen::MatrixXd dense_of(const LinearOperator& op) {
  const long long n = op.size();
  Eigen::MatrixXd M(n, n);
  Eigen::VectorXd e = Eigen::VectorXd::Zero(n), col(n);
  for (long long i = 0; i < n; ++i) {
    e(i) = 1.0;
    op.apply(e.data(), col.data());
    M.col(i) = col;
    e(i) = 0.0;
  }
  return M;
}

}  // namespace

TEST_CASE("grid geometry") {
  GridSpec g{9, 5.0, 2, 1};
  CHECK(g.spacing() == doctest::Approx(1.0));
  CHECK(g.node(0) == doctest::Approx(-4.0));
  CHECK(g.node(8) == doctest::Approx(4.0));
  CHECK(g.total() == 81);
  CHECK_THROWS_AS((GridSpec{2, 1.0, 1, 1}.validate()), Error);
  CHECK_THROWS_AS((GridSpec{1000000, 1.0, 4, 3}.validate()), Error);
}

TEST_CASE("free particle levels match the discrete Laplacian") {
  // eigenvalues of the Dirichlet 3-point Laplacian are known in closed form
  const double m = 0.7;
  GridSpec g{40, 3.0, 1, 2};
  const std::vector<double> masses{m};
  const auto H = assemble(g, [](std::span<const double>) { return 0.0; }, masses);
  const double h = g.spacing();
  const double e1 = (1.0 - std::cos(M_PI / (g.n + 1))) / (m * h * h);
  const auto gs = ground_state(H, 1e-10);
  CHECK(gs.energy == doctest::Approx(2.0 * e1).epsilon(1e-10));
  CHECK(gs.residual <= 1e-10 * 2 * e1 * 10);
}

TEST_CASE("stencil matches a dense assembly") {
  GridSpec g{5, 2.0, 2, 2};
  const std::vector<double> masses{1.0, 0.5};
  PotentialSpec v(2, 2);
  v.add_pair(0, 1, SoftCoulomb{1.0, 0.7, 1});
  const auto H = assemble(g, v, masses);
  const auto M = dense_of(H);
  CHECK((M - M.transpose()).cwiseAbs().maxCoeff() == 0.0);
  const double h = g.spacing();
  // node (0,0,0,0) couples to (0,0,0,1) through particle 1, axis y
  CHECK(M(0, 1) == doctest::Approx(-1.0 / (2 * 0.5 * h * h)));
  CHECK(M(0, 125) == doctest::Approx(-1.0 / (2 * 1.0 * h * h)));
  CHECK(M(0, 0) == doctest::Approx(2.0 / (h * h) + 4.0 / (h * h) + pair_value(SoftCoulomb{1.0, 0.7, 1}, 0.0)));
  // worker count does not change the product
  auto H2 = assemble(g, v, masses, 3);
  H2.set_workers(3);
  CHECK((dense_of(H2) - M).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("lanczos agrees with a dense eigensolver") {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  GridSpec g{12, 4.0, 1, 2};
  std::vector<double> pot(static_cast<std::size_t>(g.total()));
  for (auto& x : pot) x = u(rng);
  GridHamiltonian H(g, {1.3}, pot);
  const double exact = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(dense_of(H)).eigenvalues()(0);
  LanczosOptions o;
  o.keep_vector = true;
  const auto gs = ground_state(H, 1e-11, 20000, o);
  CHECK(gs.energy == doctest::Approx(exact).epsilon(1e-12));
  REQUIRE(gs.vector.size() == pot.size());
  std::vector<double> hv(pot.size());
  H.apply(gs.vector.data(), hv.data());
  double r = 0, nv = 0;
  for (std::size_t i = 0; i < pot.size(); ++i) {
    r += (hv[i] - gs.energy * gs.vector[i]) * (hv[i] - gs.energy * gs.vector[i]);
    nv += gs.vector[i] * gs.vector[i];
  }
  CHECK(std::sqrt(r / nv) <= 1e-9);
}

TEST_CASE("harmonic oscillator on the grid") {
  GridSpec g{300, 10.0, 1, 1};
  const std::vector<double> masses{1.0};
  const auto H = assemble(g, [](std::span<const double> x) { return 0.5 * x[0] * x[0]; }, masses);
  const auto gs = ground_state(H, 1e-10);
  CHECK(gs.energy == doctest::Approx(0.5).epsilon(5e-4));
}

TEST_CASE("no convergence keeps the best estimate") {
  GridSpec g{60, 5.0, 1, 2};
  const std::vector<double> masses{1.0};
  const auto H = assemble(g, [](std::span<const double> x) { return x[0] * x[0] + x[1] * x[1]; }, masses);
  try {
    ground_state(H, 1e-14, 30);
    FAIL("expected NoConvergence");
  } catch (const NoConvergenceError& e) {
    CHECK(e.kind() == ErrorKind::NoConvergence);
    CHECK(std::isfinite(e.estimate()));
    CHECK(e.iterations() <= 31);
  }
}

TEST_CASE("singular potential on the grid") {
  GridSpec g{5, 2.0, 2, 1};  // odd N puts a node at 0 for both particles
  const std::vector<double> masses{1.0, 1.0};
  try {
    assemble(g, make_bare_coulomb_pair(1.0, 1), masses);
    FAIL("expected SingularPotentialOnGrid");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::SingularPotentialOnGrid);
  }
  CHECK_THROWS_AS(assemble(GridSpec{5, 2.0, 1, 1}, [](std::span<const double>) { return NAN; }, std::vector<double>{1.0}),
                  Error);
}

TEST_CASE("pade recovers an exact rational sequence") {
  // E(N) = (-1 + 3x) / (1 + 5x), x = 1/N: asymptote -1
  std::vector<ConvergencePoint> pts;
  for (int n = 50; n <= 300; n += 25) {
    const double x = 1.0 / n;
    pts.push_back({double(n), (-1.0 + 3.0 * x) / (1.0 + 5.0 * x)});
  }
  for (int order : {1, 2, 3}) {
    const auto m = extrapolate(pts, order);
    CHECK(m.asymptote == doctest::Approx(-1.0).epsilon(1e-9));
    CHECK(m.at_n(75.0) == doctest::Approx((-1.0 + 3.0 / 75) / (1.0 + 5.0 / 75)).epsilon(1e-10));
  }
  CHECK_THROWS_AS(extrapolate(std::span(pts).first(4), 2), Error);
}

TEST_CASE("pade reports a pole inside the data range") {
  std::vector<ConvergencePoint> pts;
  for (int n : {10, 12, 14, 16, 18, 22, 25, 30}) {
    const double z = (1.0 / n) / 0.1;
    pts.push_back({double(n), 1.0 / (1.0 - 2.0 * z)});
  }
  try {
    extrapolate(pts, 1);
    FAIL("expected PolesOnRange");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::PolesOnRange);
  }
}

TEST_CASE("quadratic error model") {
  const std::vector<std::pair<double, double>> s{{0.5, 0.01}, {1.0, 0.02}, {2.0, 0.05}};
  const auto q = error_model(s);
  for (const auto& [d, e] : s) CHECK(q(d) == doctest::Approx(e).epsilon(1e-12));
  const std::vector<std::pair<double, double>> bad{{1.0, 0.01}, {1.0, 0.02}, {2.0, 0.05}};
  try {
    error_model(bad);
    FAIL("expected DegenerateNodes");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::DegenerateNodes);
  }
}
