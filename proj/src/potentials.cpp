#include "wmc/potentials.hpp"

#include <cmath>
#include <limits>
#include <numbers>

#include "wmc/error.hpp"

namespace wmc {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

void check_sign(int sign, const char* what) {
  require(sign == 1 || sign == -1, std::string(what) + ": sign must be +1 or -1");
}

}  // namespace

bool is_pair_shape(const TermShape& shape) noexcept {
  return std::holds_alternative<Harmonic>(shape) || std::holds_alternative<SoftCoulomb>(shape) ||
         std::holds_alternative<BareCoulomb>(shape) || std::holds_alternative<ErfcEffective>(shape);
}

const char* shape_name(const TermShape& shape) noexcept {
  return std::visit(overloaded{[](const Harmonic&) { return "harmonic"; },
                               [](const SoftCoulomb&) { return "soft_coulomb"; },
                               [](const BareCoulomb&) { return "bare_coulomb"; },
                               [](const ErfcEffective&) { return "erfc_effective"; },
                               [](const SquareWell&) { return "square_well"; },
                               [](const GaussianWell&) { return "gaussian_well"; }},
                    shape);
}

// exp(x^2) erfc(x) for x >= 0; continued fraction where the product would lose digits.
double erfcx(double x) {
  if (x < 0.0) return 2.0 * std::exp(x * x) - erfcx(-x);
  if (x < 10.0) return std::exp(x * x) * std::erfc(x);
  // Lentz evaluation of x + (1/2)/(x + 1/(x + (3/2)/(x + ...)))
  const double tiny = 1e-300;
  double f = x, c = x, dd = 0.0;
  for (int k = 1; k < 200; ++k) {
    const double ak = 0.5 * k;
    dd = x + ak * dd;
    if (dd == 0.0) dd = tiny;
    c = x + ak / c;
    if (c == 0.0) c = tiny;
    dd = 1.0 / dd;
    const double delta = c * dd;
    f *= delta;
    if (std::abs(delta - 1.0) < 1e-16) break;
  }
  return 1.0 / (std::sqrt(std::numbers::pi) * f);
}

double erfc_effective(double r, double length) {
  const double s = r / (length * std::numbers::sqrt2);
  return std::sqrt(std::numbers::pi / 2.0) / length * erfcx(s);
}

double pair_value(const TermShape& shape, double r2) {
  return std::visit(
      overloaded{
          [&](const Harmonic& h) { return 0.5 * h.mu * h.omega * h.omega * (r2 + h.offset * h.offset); },
          [&](const SoftCoulomb& s) { return -s.sign * s.alpha / std::sqrt(r2 + s.softening * s.softening); },
          [&](const BareCoulomb& b) {
            if (r2 == 0.0) fail(ErrorKind::Singularity, "bare Coulomb term at zero separation");
            return -b.sign * b.alpha / std::sqrt(r2);
          },
          [&](const ErfcEffective& e) { return e.sign * erfc_effective(std::sqrt(r2), e.length); },
          [&](const SquareWell&) -> double { fail(ErrorKind::InvalidArgument, "square_well is not a pair term"); },
          [&](const GaussianWell&) -> double {
            fail(ErrorKind::InvalidArgument, "gaussian_well is not a pair term");
          }},
      shape);
}

double external_value(const TermShape& shape, std::span<const double> x) {
  if (const auto* w = std::get_if<SquareWell>(&shape)) {
    for (std::size_t k = 0; k < x.size(); ++k)
      if (!(std::abs(x[k] - w->center[k]) < w->half_widths[k])) return 0.0;
    return w->depth;
  }
  if (const auto* g = std::get_if<GaussianWell>(&shape)) {
    double r2 = 0.0;
    for (std::size_t k = 0; k < x.size(); ++k) r2 += (x[k] - g->center[k]) * (x[k] - g->center[k]);
    return g->depth * std::exp(-g->lambda * r2);
  }
  fail(ErrorKind::InvalidArgument, std::string(shape_name(shape)) + " is not an external term");
}

PotentialSpec::PotentialSpec(int n_particles, int dimension) : n_particles_(n_particles), dimension_(dimension) {
  require(n_particles >= 1, "potential needs at least one particle");
  require(dimension >= 1 && dimension <= 3, "dimension must be 1, 2 or 3");
}

void PotentialSpec::check(const PotentialTerm& t) const {
  const std::string name = t.label.empty() ? shape_name(t.shape) : t.label;
  for (int p : t.particles)
    require(p >= 0 && p < n_particles_, name + ": particle index " + std::to_string(p) + " out of range");
  if (is_pair_shape(t.shape)) {
    require(t.particles.size() == 2 && t.particles[0] != t.particles[1],
            name + ": pair term needs two distinct particles");
  } else {
    require(t.particles.size() == 1, name + ": external term acts on exactly one particle");
  }
  const auto dim = static_cast<std::size_t>(dimension_);
  std::visit(overloaded{[&](const Harmonic& h) {
                          require(h.mu > 0 && std::isfinite(h.omega), name + ": needs mu > 0");
                        },
                        [&](const SoftCoulomb& s) {
                          require(s.softening > 0, name + ": softening length d must be > 0");
                          check_sign(s.sign, name.c_str());
                        },
                        [&](const BareCoulomb& b) { check_sign(b.sign, name.c_str()); },
                        [&](const ErfcEffective& e) {
                          require(e.length > 0, name + ": length d must be > 0");
                          check_sign(e.sign, name.c_str());
                        },
                        [&](const SquareWell& w) {
                          require(w.half_widths.size() == dim && w.center.size() == dim,
                                  name + ": half_widths and center need one entry per dimension");
                          for (double h : w.half_widths) require(h > 0, name + ": half widths must be > 0");
                        },
                        [&](const GaussianWell& g) {
                          require(g.center.size() == dim, name + ": center needs one entry per dimension");
                          require(g.lambda > 0, name + ": lambda must be > 0");
                        }},
             t.shape);
}

PotentialSpec& PotentialSpec::add(PotentialTerm term) {
  check(term);
  terms_.push_back(std::move(term));
  return *this;
}

PotentialSpec& PotentialSpec::add_pair(int i, int j, TermShape shape, std::string label) {
  return add(PotentialTerm{std::move(shape), {i, j}, std::move(label)});
}

PotentialSpec& PotentialSpec::add_external(int i, TermShape shape, std::string label) {
  return add(PotentialTerm{std::move(shape), {i}, std::move(label)});
}

double PotentialSpec::eval(std::span<const double> x) const {
  const auto dim = static_cast<std::size_t>(dimension_);
  require(x.size() == dim * n_particles_, "configuration size does not match the potential");
  double v = 0.0;
  for (const auto& t : terms_) {
    if (t.particles.size() == 2) {
      const auto a = x.subspan(t.particles[0] * dim, dim);
      const auto b = x.subspan(t.particles[1] * dim, dim);
      double r2 = 0.0;
      for (std::size_t k = 0; k < dim; ++k) r2 += (a[k] - b[k]) * (a[k] - b[k]);
      v += pair_value(t.shape, r2);
    } else {
      v += external_value(t.shape, x.subspan(t.particles[0] * dim, dim));
    }
  }
  return v;
}

bool PotentialSpec::has_bare_coulomb() const noexcept {
  for (const auto& t : terms_)
    if (std::holds_alternative<BareCoulomb>(t.shape)) return true;
  return false;
}

PotentialSpec make_exciton_sqwell(double Ve, double Vh, double Lx, double Ly, double alpha, double d,
                                  int dimension) {
  require(dimension == 1 || dimension == 2, "square-well exciton is 1D or 2D");
  PotentialSpec v(2, dimension);
  std::vector<double> half{Lx / 2};
  if (dimension == 2) half.push_back(Ly / 2);
  const std::vector<double> origin(dimension, 0.0);
  v.add_pair(0, 1, SoftCoulomb{alpha, d, 1}, "coulomb");
  v.add_external(0, SquareWell{Ve, half, origin}, "electron_well");
  v.add_external(1, SquareWell{Vh, half, origin}, "hole_barrier");
  return v;
}

PotentialSpec make_exciton_gaussian(double Ve, double Vh, double lambda_e, double lambda_h, double alpha,
                                    double d, int dimension) {
  PotentialSpec v(2, dimension);
  const std::vector<double> origin(dimension, 0.0);
  v.add_pair(0, 1, SoftCoulomb{alpha, d, 1}, "coulomb");
  v.add_external(0, GaussianWell{Ve, lambda_e, origin}, "electron_well");
  v.add_external(1, GaussianWell{Vh, lambda_h, origin}, "hole_barrier");
  return v;
}

PotentialSpec make_harmonic_pair(double mu, double omega, double d, int dimension) {
  PotentialSpec v(2, dimension);
  v.add_pair(0, 1, Harmonic{mu, omega, d}, "harmonic");
  return v;
}

PotentialSpec make_soft_coulomb_pair(double alpha, double d, int dimension) {
  PotentialSpec v(2, dimension);
  v.add_pair(0, 1, SoftCoulomb{alpha, d, 1}, "coulomb");
  return v;
}

PotentialSpec make_bare_coulomb_pair(double alpha, int dimension) {
  PotentialSpec v(2, dimension);
  v.add_pair(0, 1, BareCoulomb{alpha, 1}, "coulomb");
  return v;
}

PotentialSpec make_trion_soft(double alpha, double d) {
  require(d > 0, "trion d must be > 0");
  PotentialSpec v(3, 1);
  v.add_pair(0, 1, SoftCoulomb{alpha, d, 1}, "e_h1");
  v.add_pair(0, 2, SoftCoulomb{alpha, d, 1}, "e_h2");
  v.add_pair(1, 2, SoftCoulomb{alpha, d, -1}, "h1_h2");
  return v;
}

PotentialSpec make_trion_erfc(double d) {
  require(d > 0, "trion d must be > 0");
  PotentialSpec v(3, 1);
  v.add_pair(0, 1, ErfcEffective{d, 1}, "e1_e2");
  v.add_pair(0, 2, ErfcEffective{d, -1}, "e1_h");
  v.add_pair(1, 2, ErfcEffective{d, -1}, "e2_h");
  return v;
}

PotentialSpec make_3d_confined_exciton(double alpha, double Ve, double Vh, double Lz, double d) {
  require(Lz > 0, "Lz must be > 0");
  const double inf = std::numeric_limits<double>::infinity();
  PotentialSpec v(2, 3);
  v.add_pair(0, 1, BareCoulomb{alpha, 1}, "coulomb");
  v.add_external(0, SquareWell{Ve, {inf, inf, Lz / 2}, {0.0, 0.0, -d / 2}}, "electron_well");
  v.add_external(1, SquareWell{Vh, {inf, inf, Lz / 2}, {0.0, 0.0, d / 2}}, "hole_well");
  return v;
}

}  // namespace wmc
