#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "wmc/rng.hpp"

namespace wmc {

struct LoopConfig {
  int n_points = 5000;
  int n_particles = 1;
  int dimension = 1;
  std::uint64_t seed = 0;

  void validate() const;
};

// Discrete Brownian bridge of one particle. Storage is component-major:
// value (k, d) lives at d * (n_points + 1) + k.
class UnitLoop {
 public:
  UnitLoop() = default;
  UnitLoop(int n_points, int dimension);

  int n_points() const noexcept { return n_points_; }
  int dimension() const noexcept { return dimension_; }
  int stride() const noexcept { return n_points_ + 1; }

  double operator()(int k, int d) const { return q_[static_cast<std::size_t>(d) * stride() + k]; }
  double& operator()(int k, int d) { return q_[static_cast<std::size_t>(d) * stride() + k]; }
  const double* component(int d) const { return q_.data() + static_cast<std::size_t>(d) * stride(); }
  double* component(int d) { return q_.data() + static_cast<std::size_t>(d) * stride(); }
  std::span<const double> values() const noexcept { return q_; }

 private:
  int n_points_ = 0;
  int dimension_ = 0;
  std::vector<double> q_;
};

struct UnitLoopSet {
  std::vector<UnitLoop> particles;
};

// Standard deviation of omega for P(omega) ~ exp(-omega^2).
inline constexpr double kOmegaScale = 0.70710678118654752440;

// Recursion coefficients for a fixed N_p:
//   qbar_i = a_i * omega_i,  q_i = qbar_i + b_i * q_{i-1}.
class YloopTable {
 public:
  explicit YloopTable(int n_points);
  int n_points() const noexcept { return n_points_; }
  const std::vector<double>& a() const noexcept { return a_; }
  const std::vector<double>& b() const noexcept { return b_; }

 private:
  int n_points_;
  std::vector<double> a_, b_;
};

// Fill `loop` from any callable returning standard normals.
template <class NormalSource>
void fill_unit_loop(const YloopTable& table, NormalSource&& normal, UnitLoop& loop,
                    double omega_scale = kOmegaScale) {
  const int np = loop.n_points();
  const auto& a = table.a();
  const auto& b = table.b();
  for (int d = 0; d < loop.dimension(); ++d) {
    double* q = loop.component(d);
    q[0] = 0.0;
    double prev = 0.0;
    for (int i = 1; i < np; ++i) {
      const double w = omega_scale * normal();
      prev = a[i] * w + b[i] * prev;
      q[i] = prev;
    }
    q[np] = 0.0;
  }
}

// Where unit loops come from. The estimator asks for loops by stream key so
// results do not depend on the order loops are requested in.
class LoopSource {
 public:
  virtual ~LoopSource() = default;
  virtual void fill(const StreamKey& key, UnitLoop& out) const = 0;
};

class YloopSource final : public LoopSource {
 public:
  explicit YloopSource(int n_points, double omega_scale = kOmegaScale);
  void fill(const StreamKey& key, UnitLoop& out) const override;

 private:
  YloopTable table_;
  double omega_scale_;
};

// Every loop identically zero: straight-line worldlines only.
class ZeroLoopSource final : public LoopSource {
 public:
  void fill(const StreamKey& key, UnitLoop& out) const override;
};

UnitLoop generate_unit_loop(const LoopConfig& config, int particle_index, std::uint64_t loop_index,
                            std::uint64_t ensemble);

// Sequential stream of loop sets: set i holds loop index i of every particle.
class EnsembleStream {
 public:
  explicit EnsembleStream(const LoopConfig& config);
  EnsembleStream(const LoopConfig& config, std::uint64_t ensemble);
  UnitLoopSet next();
  std::uint64_t position() const noexcept { return index_; }

 private:
  LoopConfig config_;
  std::uint64_t ensemble_;
  std::uint64_t index_ = 0;
  YloopTable table_;
};

EnsembleStream generate_ensemble(const LoopConfig& config);

class Worldline {
 public:
  Worldline(int n_points, int dimension, double T, double mass, std::vector<double> start,
            std::vector<double> end);

  int n_points() const noexcept { return n_points_; }
  int dimension() const noexcept { return dimension_; }
  double time() const noexcept { return time_; }
  double mass() const noexcept { return mass_; }
  const std::vector<double>& start() const noexcept { return start_; }
  const std::vector<double>& end() const noexcept { return end_; }

  double operator()(int k, int d) const { return x_[static_cast<std::size_t>(d) * (n_points_ + 1) + k]; }
  const double* component(int d) const { return x_.data() + static_cast<std::size_t>(d) * (n_points_ + 1); }
  double* component(int d) { return x_.data() + static_cast<std::size_t>(d) * (n_points_ + 1); }
  std::span<const double> values() const noexcept { return x_; }

 private:
  int n_points_, dimension_;
  double time_, mass_;
  std::vector<double> start_, end_;
  std::vector<double> x_;
};

// x(u_k) = x + (x' - x) u_k + sqrt(T/m) q(u_k), written component-major into
// `out` (dimension * (n_points + 1) values). Endpoints are copied exactly.
void rescale_into(const UnitLoop& unit, std::span<const double> start, std::span<const double> end,
                  double mass, double T, double* out);

Worldline rescale(const UnitLoop& unit, std::span<const double> start, std::span<const double> end,
                  double mass, double T);

}  // namespace wmc
