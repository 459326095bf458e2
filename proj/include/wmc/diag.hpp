#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <utility>
#include <vector>

#include "wmc/potentials.hpp"

namespace wmc {

// N interior nodes per axis on (-box, box): x_i = -box + (i + 1) h with
// h = 2 box / (N + 1); the wavefunction vanishes at +-box.
struct GridSpec {
  int n = 50;
  double box = 10.0;
  int n_particles = 1;
  int dimension = 1;

  int axes() const noexcept { return n_particles * dimension; }
  long long total() const;
  double spacing() const noexcept { return 2.0 * box / (n + 1); }
  double node(int i) const noexcept { return -box + (i + 1) * spacing(); }
  void validate() const;
};

class LinearOperator {
 public:
  virtual ~LinearOperator() = default;
  virtual long long size() const = 0;
  virtual void apply(const double* in, double* out) const = 0;
};

// -sum_j lap_j / (2 m_j) with the 3-point stencil per axis, plus the potential
// on the diagonal. Applied matrix-free; axis 0 is the slowest index.
class GridHamiltonian final : public LinearOperator {
 public:
  GridHamiltonian(GridSpec grid, std::vector<double> masses, std::vector<double> potential);

  long long size() const override { return static_cast<long long>(diagonal_.size()); }
  void apply(const double* in, double* out) const override;

  const GridSpec& grid() const noexcept { return grid_; }
  const std::vector<double>& diagonal() const noexcept { return diagonal_; }
  double off_diagonal(int axis) const { return coupling_[axis]; }
  void set_workers(int workers) noexcept { workers_ = workers; }

 private:
  GridSpec grid_;
  std::vector<double> masses_;
  std::vector<double> diagonal_;
  std::vector<double> coupling_;  // per axis
  std::vector<long long> stride_;
  int workers_ = 1;
};

// Potential as a function of the particle-major configuration x[j * D + k].
using GridPotential = std::function<double(std::span<const double>)>;

GridHamiltonian assemble(const GridSpec& grid, const PotentialSpec& potential, std::span<const double> masses,
                         int workers = 1);
GridHamiltonian assemble(const GridSpec& grid, const GridPotential& potential, std::span<const double> masses,
                         int workers = 1);

struct LanczosOptions {
  int krylov = 40;   // basis size before a restart
  int keep = 12;     // Ritz vectors kept across a restart
  std::uint64_t seed = 0x5eed;
  double memory_budget_bytes = 1.5e9;
  bool keep_vector = false;
};

struct GroundState {
  double energy = 0.0;
  double residual = 0.0;
  int matvecs = 0;
  int restarts = 0;
  std::vector<double> vector;  // filled when LanczosOptions::keep_vector
};

// Smallest eigenvalue of a symmetric operator by thick-restart Lanczos with
// full reorthogonalisation. max_iter bounds the number of operator applications
// (one more may be spent checking the final residual).
GroundState ground_state(const LinearOperator& op, double tol = 1e-9, int max_iter = 20000,
                         const LanczosOptions& options = {});

struct ConvergencePoint {
  double n = 0.0;
  double e0 = 0.0;
};

// R(x) = P(z) / Q(z) with z = x / x_scale, x = 1/N, q_0 = 1.
struct PadeModel {
  int m = 0, n = 0;
  std::vector<double> p, q;
  double x_scale = 1.0;
  double asymptote = 0.0;  // R(0)

  double operator()(double x) const;
  double at_n(double grid_n) const { return (*this)(1.0 / grid_n); }
};

PadeModel extrapolate(std::span<const ConvergencePoint> points, int order);

struct QuadraticErrorModel {
  double a = 0.0, b = 0.0, c = 0.0;
  double operator()(double d) const noexcept { return a + b * d + c * d * d; }
};

QuadraticErrorModel error_model(std::span<const std::pair<double, double>> samples);

}  // namespace wmc
