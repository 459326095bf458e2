#pragma once

#include <span>
#include <vector>

#include "wmc/potentials.hpp"

namespace wmc {

// Riemann sums sum_{k=1}^{N_p} V(x(u_k)) along discretised worldlines. A
// worldline is passed as a pointer to component-major storage
// (dimension * (n_points + 1) values). Bare Coulomb pair terms use the exact
// segment integral when smoothing is on.
class ActionEvaluator {
 public:
  struct PairGroup {
    int a = 0, b = 0;
    std::vector<std::size_t> terms;  // indices into potential().terms()
  };

  ActionEvaluator(const PotentialSpec& potential, int n_points, bool smoothing);

  int n_points() const noexcept { return n_points_; }
  int dimension() const noexcept { return dimension_; }
  int n_particles() const noexcept { return n_particles_; }
  bool smoothing() const noexcept { return smoothing_; }

  bool has_external(int particle) const { return !externals_[particle].empty(); }
  const std::vector<PairGroup>& groups() const noexcept { return groups_; }
  const PotentialSpec& potential() const noexcept { return potential_; }

  // All external terms acting on `particle`.
  double external_sum(int particle, const double* x) const;
  // All pair terms of one group. `flagged` counts LogSingular fallbacks.
  double group_sum(std::size_t group, const double* xa, const double* xb, long long* flagged) const;
  // Full sum: externals in particle order, then groups in order.
  double total(std::span<const double* const> worldlines, long long* flagged) const;

 private:
  int n_points_, dimension_, n_particles_;
  bool smoothing_;
  std::vector<std::vector<std::size_t>> externals_;
  std::vector<PairGroup> groups_;
  PotentialSpec potential_;
};

double external_path_sum(const TermShape& shape, const double* x, int n_points, int dimension);
double pair_path_sum(const TermShape& shape, const double* xa, const double* xb, int n_points, int dimension,
                     bool smoothing, long long* flagged);

}  // namespace wmc
