#include <doctest.h>

#include <cmath>
#include <string>

#include "wmc/config.hpp"
#include "wmc/error.hpp"

using namespace wmc;

namespace {

const char* kBasic = R"(
name: basic
system:
  dimension: 1
  preset: soft_coulomb_pair
  d: $d
wmc:
  loops: 10
  points: 20
  t_range: {min: 1, max: 3, step: 0.5}
  seed: 7
sweep:
  name: d
  values: [0.5, 1.0]
fit:
  form: linear_plus_log
  window: [1, 3]
diag:
  n: {min: 20, max: 40, step: 10}
  reduce: relative
)";

ErrorKind kind_of(const std::string& text) {
  try {
    parse_config(text);
  } catch (const Error& e) {
    return e.kind();
  }
  return ErrorKind::InvalidArgument;
}

std::string message_of(const std::string& text) {
  try {
    parse_config(text);
  } catch (const Error& e) {
    return e.what();
  }
  return {};
}

}  // namespace

TEST_CASE("fnv1a reference values") {
  CHECK(fnv1a64("") == 0xcbf29ce484222325ull);
  CHECK(fnv1a64("a") == 0xaf63dc4c8601ec8cull);
  CHECK(fnv1a64("foobar") == 0x85944171f73967e8ull);
}

TEST_CASE("basic config") {
  const auto c = parse_config(kBasic);
  CHECK(c.name == "basic");
  REQUIRE(c.sweep);
  CHECK(c.sweep->values.size() == 2);
  const auto s = c.system(1.0);
  CHECK(s.n_particles() == 2);
  CHECK(std::get<SoftCoulomb>(s.potential.terms()[0].shape).softening == 1.0);
  CHECK(std::get<SoftCoulomb>(c.system(0.5).potential.terms()[0].shape).softening == 0.5);
  const auto e = c.estimator(0.5);
  CHECK(e.t_grid == std::vector<double>{1.0, 1.5, 2.0, 2.5, 3.0});
  CHECK(e.seed == 7);
  REQUIRE(c.fit);
  REQUIRE(c.fit->window);
  CHECK(c.fit->window->t_max == 3.0);
  REQUIRE(c.diag);
  CHECK(c.diag->n == std::vector<int>{20, 30, 40});
  CHECK(c.diag->reduce_relative);
}

TEST_CASE("hash ignores key order and formatting but not values") {
  const auto a = parse_config("name: x\nsystem: {dimension: 1, preset: harmonic_pair}\nwmc: {t_grid: [1, 2], loops: 5}\n");
  const auto b = parse_config("wmc:\n  loops: 5\n  t_grid: [1.0, 2.0]\nsystem:\n  preset: harmonic_pair\n  dimension: 1\nname: x\n");
  const auto c = parse_config("name: x\nsystem: {dimension: 1, preset: harmonic_pair}\nwmc: {t_grid: [1, 2], loops: 6}\n");
  CHECK(a.hash == b.hash);
  CHECK(a.hash != c.hash);
}

TEST_CASE("overrides") {
  ConfigOverrides o;
  o.seed = 99;
  o.workers = 3;
  o.out_dir = "elsewhere";
  const auto c = parse_config(kBasic, "<string>", o);
  CHECK(c.estimator(0.5).seed == 99);
  CHECK(c.estimator(0.5).workers == 3);
  CHECK(c.out_dir == "elsewhere");
  CHECK(c.hash != parse_config(kBasic).hash);
}

TEST_CASE("explicit particles and terms") {
  const auto c = parse_config(R"(
system:
  dimension: 2
  particles:
    - {name: e, mass: 0.5, start: [0.1, 0], end: [0, 0]}
    - {name: h, mass: 1.5}
  potential:
    - {type: soft_coulomb, particles: [0, 1], alpha: 2, softening: 0.3}
    - {type: square_well, particles: [0], depth: -1, half_widths: [1, .inf]}
wmc: {t_grid: [1]}
)");
  const auto s = c.system();
  CHECK(s.particles[0].mass == 0.5);
  CHECK(s.particles[0].start == std::vector<double>{0.1, 0.0});
  CHECK(s.particles[1].end == std::vector<double>{0.0, 0.0});
  CHECK(s.potential.terms().size() == 2);
  CHECK(std::isinf(std::get<SquareWell>(s.potential.terms()[1].shape).half_widths[1]));
}

TEST_CASE("presets") {
  auto c = parse_config("system: {dimension: 3, preset: exciton_3d_confined, Ve: -10, Vh: -10, Lz: 1, d: 2}\nwmc: {t_grid: [1]}\n");
  auto s = c.system();
  CHECK(s.particles[0].start[2] == -1.0);
  CHECK(s.particles[1].start[2] == 1.0);
  c = parse_config("system: {dimension: 1, preset: trion_erfc, d: 1}\nwmc: {t_grid: [1]}\n");
  CHECK(c.system().n_particles() == 3);
  CHECK(kind_of("system: {dimension: 2, preset: trion_soft, d: 1}\nwmc: {t_grid: [1]}\n") == ErrorKind::ConfigError);
}

TEST_CASE("config errors name the field and line") {
  CHECK(kind_of("system: {dimension: 1, preset: harmonic_pair}\nwmc: {t_grid: [1], loops: -3}\n") == ErrorKind::ConfigError);
  const auto m = message_of("system:\n  dimension: 1\n  preset: soft_coulomb_pair\n  d: 0\nwmc:\n  t_grid: [1]\n");
  CHECK(m.find("softening") != std::string::npos);
  const auto u = message_of("system:\n  dimension: 1\n  preset: harmonic_pair\nwmc:\n  t_grid: [1]\n  lops: 4\n");
  CHECK(u.find("unknown key 'lops'") != std::string::npos);
  CHECK(u.find("line 6") != std::string::npos);
  CHECK(message_of("wmc: {t_grid: [1]}\n").find("system") != std::string::npos);
  CHECK(message_of("system: {dimension: 1, preset: soft_coulomb_pair, d: $d}\nwmc: {t_grid: [1]}\n").find("$d") !=
        std::string::npos);
  CHECK(kind_of("a: [1,\n") == ErrorKind::ConfigError);
  // every sweep value is checked up front
  CHECK(kind_of("system: {dimension: 1, preset: soft_coulomb_pair, d: $d}\nwmc: {t_grid: [1]}\nsweep: {name: d, values: [1, 0]}\n") ==
        ErrorKind::ConfigError);
  CHECK(kind_of("system: {dimension: 1, preset: harmonic_pair}\nwmc: {t_grid: [2, 1]}\n") == ErrorKind::ConfigError);
  CHECK(kind_of("system: {dimension: 1, preset: harmonic_pair}\nwmc: {t_grid: [1], sum_mode: fast}\n") ==
        ErrorKind::ConfigError);
}

TEST_CASE("negated placeholder") {
  const auto c = parse_config(R"(
system: {dimension: 2, preset: exciton_gaussian, Ve: -$v, Vh: $v, lambda_e: 1, lambda_h: 1, d: 1}
wmc: {t_grid: [1]}
sweep: {name: v, range: {min: 1, max: 2, step: 1}}
)");
  const auto s = c.system(2.0);
  CHECK(std::get<GaussianWell>(s.potential.terms()[1].shape).depth == -2.0);
  CHECK(std::get<GaussianWell>(s.potential.terms()[2].shape).depth == 2.0);
}

TEST_CASE("load_config reports missing files") {
  try {
    load_config("/nonexistent/file.yaml");
    FAIL("expected ConfigError");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::ConfigError);
  }
}
