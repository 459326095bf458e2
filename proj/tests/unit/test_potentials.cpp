#include <doctest.h>

#include <boost/math/special_functions/erf.hpp>
#include <cmath>
#include <limits>

#include "wmc/error.hpp"
#include "wmc/potentials.hpp"

using namespace wmc;

TEST_CASE("erfcx against long double erfc and the asymptotic series") {
  for (double x : {0.0, 0.3, 1.0, 2.5, 6.0, 9.5, 12.0, 20.0}) {
    const long double ref = std::exp(static_cast<long double>(x) * x) * boost::math::erfc(static_cast<long double>(x));
    CHECK(erfcx(x) == doctest::Approx(static_cast<double>(ref)).epsilon(1e-13));
  }
  for (double x : {40.0, 1e4}) {
    const double u = 1.0 / (2.0 * x * x);
    const double ref = (1.0 - u + 3.0 * u * u - 15.0 * u * u * u + 105.0 * u * u * u * u) / (x * std::sqrt(M_PI));
    CHECK(erfcx(x) == doctest::Approx(ref).epsilon(1e-12));
  }
  CHECK(erfcx(-1.0) == doctest::Approx(std::exp(1.0) * std::erfc(-1.0)).epsilon(1e-14));
}

TEST_CASE("pair values") {
  CHECK(pair_value(Harmonic{0.5, 1.0, 2.0}, 0.0) == doctest::Approx(1.0));
  CHECK(pair_value(Harmonic{0.5, 2.0, 0.0}, 9.0) == doctest::Approx(9.0));
  CHECK(pair_value(SoftCoulomb{2.0, 1.0, 1}, 3.0) == doctest::Approx(-1.0));
  CHECK(pair_value(SoftCoulomb{2.0, 1.0, -1}, 3.0) == doctest::Approx(1.0));
  CHECK(pair_value(BareCoulomb{1.0, 1}, 4.0) == doctest::Approx(-0.5));
  CHECK_THROWS_AS(pair_value(BareCoulomb{}, 0.0), Error);
  // erfc term: finite at contact, Coulomb-like tail, repulsive for sign +1
  CHECK(pair_value(ErfcEffective{0.5, 1}, 0.0) == doctest::Approx(std::sqrt(M_PI / 2.0) / 0.5));
  CHECK(pair_value(ErfcEffective{1.0, 1}, 400.0 * 400.0) == doctest::Approx(1.0 / 400.0).epsilon(1e-5));
  CHECK(pair_value(ErfcEffective{1.0, -1}, 1.0) < 0.0);
}

TEST_CASE("external wells") {
  const double inf = std::numeric_limits<double>::infinity();
  SquareWell w{-3.0, {1.0, inf}, {0.0, 0.0}};
  CHECK(external_value(w, std::vector<double>{0.5, 100.0}) == -3.0);
  CHECK(external_value(w, std::vector<double>{1.5, 0.0}) == 0.0);
  CHECK(external_value(w, std::vector<double>{1.0, 0.0}) == 0.0);  // open interval
  GaussianWell g{-2.0, 0.5, {1.0}};
  CHECK(external_value(g, std::vector<double>{3.0}) == doctest::Approx(-2.0 * std::exp(-2.0)));
}

TEST_CASE("potential spec composition and checks") {
  PotentialSpec v(3, 2);
  v.add_pair(0, 1, SoftCoulomb{1.0, 1.0, 1}).add_external(2, GaussianWell{-1.0, 1.0, {0.0, 0.0}});
  const std::vector<double> x{0, 0, 0, 0, 0, 0};
  CHECK(v.eval(x) == doctest::Approx(-2.0));
  CHECK_THROWS_AS(v.add_pair(0, 0, Harmonic{}), Error);
  CHECK_THROWS_AS(v.add_pair(0, 3, Harmonic{}), Error);
  CHECK_THROWS_AS(v.add_external(0, SquareWell{-1.0, {1.0}, {0.0}}), Error);
  CHECK_THROWS_AS(v.add_pair(0, 1, SoftCoulomb{1.0, 0.0, 1}), Error);
  CHECK_THROWS_AS(v.add_pair(0, 1, SoftCoulomb{1.0, 1.0, 2}), Error);
  CHECK_THROWS_AS(v.eval(std::vector<double>{0, 0}), Error);
  CHECK_FALSE(v.has_bare_coulomb());
}

TEST_CASE("presets") {
  // positive trion: e-h attractive, h-h repulsive
  const auto t = make_trion_soft(1.0, 1.0);
  CHECK(t.eval(std::vector<double>{0.0, 0.0, 0.0}) == doctest::Approx(-1.0));
  CHECK(t.terms().size() == 3);
  // negative trion: e-e repulsive, e-h attractive
  const auto m = make_trion_erfc(1.0);
  const double c = std::sqrt(M_PI / 2.0);
  CHECK(m.eval(std::vector<double>{0.0, 0.0, 0.0}) == doctest::Approx(-c));
  CHECK_THROWS_AS(make_trion_soft(1.0, 0.0), Error);

  const auto e = make_3d_confined_exciton(1.0, -10.0, -10.0, 1.0, 2.0);
  // electron inside its well at z = -1, hole inside its well at z = +1
  CHECK(e.eval(std::vector<double>{0, 0, -1.2, 5, 5, 1.3}) ==
        doctest::Approx(-20.0 - 1.0 / std::sqrt(25 + 25 + 2.5 * 2.5)));
  CHECK(e.eval(std::vector<double>{0, 0, 0.0, 0, 0, 1.0}) == doctest::Approx(-10.0 - 1.0));
  CHECK(e.has_bare_coulomb());

  const auto s = make_exciton_sqwell(-1.0, 0.5, 2.0, 4.0, 1.0, 1.0, 2);
  CHECK(s.eval(std::vector<double>{0.9, 1.9, 0.9, 1.9}) == doctest::Approx(-1.0 + 0.5 - 1.0));
  CHECK_THROWS_AS(make_exciton_sqwell(-1, 1, 1, 1, 1, 1, 3), Error);
}
