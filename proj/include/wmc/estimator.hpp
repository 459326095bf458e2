#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "wmc/potentials.hpp"
#include "wmc/worldline.hpp"

namespace wmc {

struct Particle {
  double mass = 1.0;
  std::vector<double> start;
  std::vector<double> end;
};

struct SystemSpec {
  int dimension = 1;
  std::vector<Particle> particles;
  PotentialSpec potential;
  std::string tag;

  int n_particles() const noexcept { return static_cast<int>(particles.size()); }
  void validate() const;
};

enum class SumMode { Nested, Flat };
enum class RepetitionCombine { InverseVariance, Pooled };

struct EstimatorConfig {
  long long loops = 1000;        // N_L per particle
  long long flat_samples = 0;    // Flat mode tuple count; 0 means N_L^n
  int n_points = 5000;           // N_p
  int repetitions = 1;
  std::vector<double> t_grid;
  SumMode sum_mode = SumMode::Nested;
  bool smoothing = false;
  std::uint64_t seed = 0;
  std::uint64_t sweep_key = 0;   // mixed into stream keys; see rng.hpp
  bool common_streams = false;   // reuse the same loops at every T
  RepetitionCombine combine = RepetitionCombine::InverseVariance;
  int workers = 1;

  void validate() const;
  long long samples(int n_particles) const;
};

struct RepetitionEstimate {
  double log_wilson_mean = 0.0;
  double rel_sem = 0.0;      // effective SEM / mean
  double rel_sem_iid = 0.0;  // expanded-form SEM / mean
  long long n_samples = 0;
  long long n_flagged = 0;
  bool valid = false;
};

struct PropagatorEstimate {
  double t = 0.0;
  double wilson_mean = 0.0;
  double log_wilson_mean = 0.0;
  double wilson_sem = 0.0;      // error used for ln K (see README)
  double wilson_sem_iid = 0.0;  // expanded SEM formula treating samples as independent
  double ln_free = 0.0;         // sum of log free kernels
  double kernel = 0.0;
  double ln_kernel = 0.0;
  double ln_kernel_err = 0.0;
  long long n_samples = 0;
  int n_repetitions = 0;
  int n_excluded = 0;
  long long n_flagged = 0;
  bool valid = false;
  std::vector<RepetitionEstimate> repetitions;
};

double free_kernel(double mass, int dimension, std::span<const double> x, std::span<const double> x_end, double T);
double log_free_kernel(double mass, int dimension, std::span<const double> x, std::span<const double> x_end,
                       double T);

double wilson_line(std::span<const Worldline> worldlines, const PotentialSpec& potential, double T, int n_points,
                   bool smoothing);

PropagatorEstimate estimate_propagator(const SystemSpec& system, const EstimatorConfig& cfg, double T);
PropagatorEstimate estimate_propagator(const SystemSpec& system, const EstimatorConfig& cfg, double T,
                                       const LoopSource& loops);
std::vector<PropagatorEstimate> estimate_series(const SystemSpec& system, const EstimatorConfig& cfg);

// Read-only view of one sample: n worldlines in component-major storage.
struct PathView {
  std::span<const double* const> x;
  int n_points = 0;
  int dimension = 0;
  double t = 0.0;
  double operator()(int particle, int k, int d) const {
    return x[particle][static_cast<std::size_t>(d) * (n_points + 1) + k];
  }
};

using Observable = std::function<double(const PathView&)>;

// <O W> / <W> over the same samples estimate_propagator would use.
double reweighted_expectation(const Observable& observable, const SystemSpec& system, const EstimatorConfig& cfg,
                              double T);
double reweighted_expectation(const Observable& observable, const SystemSpec& system, const EstimatorConfig& cfg,
                              double T, const LoopSource& loops);

}  // namespace wmc
