#pragma once

#include <span>
#include <string>
#include <variant>
#include <vector>

namespace wmc {

// Pair terms depend on the separation r = |x_i - x_j| only.
struct Harmonic {
  double mu = 0.5;
  double omega = 1.0;
  double offset = 0.0;  // d: adds 1/2 mu omega^2 d^2
};

// sign * (-alpha / sqrt(r^2 + d^2)); sign = +1 is attractive.
struct SoftCoulomb {
  double alpha = 1.0;
  double softening = 1.0;
  int sign = 1;
};

// sign * (-alpha / r). Singular at r = 0; Wilson lines use smoothing for it.
struct BareCoulomb {
  double alpha = 1.0;
  int sign = 1;
};

// sign * (1/d) sqrt(pi/2) erfc(r/(d sqrt 2)) exp(r^2/(2 d^2)); sign = +1 is repulsive.
struct ErfcEffective {
  double length = 1.0;
  int sign = 1;
};

// depth inside |x_k - c_k| < half_width_k for every axis k, else 0.
// An infinite half width leaves that axis unconstrained.
struct SquareWell {
  double depth = -1.0;
  std::vector<double> half_widths;
  std::vector<double> center;
};

struct GaussianWell {
  double depth = -1.0;
  double lambda = 1.0;
  std::vector<double> center;
};

using TermShape = std::variant<Harmonic, SoftCoulomb, BareCoulomb, ErfcEffective, SquareWell, GaussianWell>;

struct PotentialTerm {
  TermShape shape;
  std::vector<int> particles;  // one index for external terms, two for pair terms
  std::string label;
};

bool is_pair_shape(const TermShape& shape) noexcept;
const char* shape_name(const TermShape& shape) noexcept;

// Value of a pair term at squared separation r2.
double pair_value(const TermShape& shape, double r2);
// Value of an external term at a single particle position.
double external_value(const TermShape& shape, std::span<const double> x);

double erfcx(double x);
double erfc_effective(double r, double length);

class PotentialSpec {
 public:
  PotentialSpec() = default;
  PotentialSpec(int n_particles, int dimension);

  int n_particles() const noexcept { return n_particles_; }
  int dimension() const noexcept { return dimension_; }
  const std::vector<PotentialTerm>& terms() const noexcept { return terms_; }
  bool empty() const noexcept { return terms_.empty(); }

  PotentialSpec& add_pair(int i, int j, TermShape shape, std::string label = {});
  PotentialSpec& add_external(int i, TermShape shape, std::string label = {});
  PotentialSpec& add(PotentialTerm term);

  // configuration holds particle-major positions: x[j * D + k].
  double eval(std::span<const double> configuration) const;

  bool has_bare_coulomb() const noexcept;

 private:
  void check(const PotentialTerm& term) const;

  int n_particles_ = 0;
  int dimension_ = 0;
  std::vector<PotentialTerm> terms_;
};

// Particle 0 is the electron and particle 1 the hole; square wells of width
// L centred at the origin. dimension 1 ignores Ly.
PotentialSpec make_exciton_sqwell(double Ve, double Vh, double Lx, double Ly, double alpha, double d,
                                  int dimension = 2);
PotentialSpec make_exciton_gaussian(double Ve, double Vh, double lambda_e, double lambda_h, double alpha,
                                    double d, int dimension = 2);
PotentialSpec make_harmonic_pair(double mu, double omega, double d, int dimension);
PotentialSpec make_soft_coulomb_pair(double alpha, double d, int dimension);
PotentialSpec make_bare_coulomb_pair(double alpha, int dimension);
// Positive trion: particle 0 electron, 1 and 2 holes.
PotentialSpec make_trion_soft(double alpha, double d);
// Negative trion: particles 0 and 1 electrons, 2 the hole.
PotentialSpec make_trion_erfc(double d);
// 3D pair with bare Coulomb attraction and z wells centred at -d/2 (electron)
// and +d/2 (hole), each of width Lz.
PotentialSpec make_3d_confined_exciton(double alpha, double Ve, double Vh, double Lz, double d);

}  // namespace wmc
