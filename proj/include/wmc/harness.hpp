#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "wmc/config.hpp"
#include "wmc/diag.hpp"
#include "wmc/estimator.hpp"
#include "wmc/fit.hpp"

namespace wmc {

struct RunOptions {
  bool write_files = true;
  std::ostream* log = nullptr;  // progress lines; null for silence
};

// ---- diagonalisation baseline

struct DiagPoint {
  int n = 0;
  long long n_total = 0;
  double e0 = 0.0;
  double residual = 0.0;
  int matvecs = 0;
  double wall_time = 0.0;
};

struct PadeAsymptote {
  int order = 0;
  double e_inf = 0.0;
  std::string status;  // "ok" or the error text
};

struct DiagOutcome {
  std::vector<DiagPoint> points;
  std::vector<PadeAsymptote> pade;
  double e_inf = 0.0;      // highest successful order
  double e_inf_err = 0.0;  // largest spread to the other successful orders
  bool has_asymptote = false;
};

// Grid problem for a system: either every coordinate of every particle, or
// for a pair with only pair terms the relative coordinate with the reduced mass.
GridHamiltonian build_grid_hamiltonian(const SystemSpec& system, int n, double box, bool reduce_relative,
                                       int workers = 1);
DiagOutcome diagonalise(const SystemSpec& system, const DiagSpec& spec, int workers = 1);

// ---- WMC run with energy fit

struct WmcOutcome {
  std::vector<PropagatorEstimate> estimates;
  KernelSeries series;
  std::optional<EnergyFitResult> fit;
  std::string fit_status = "ok";
  std::vector<double> wall_times;
};

WmcOutcome run_wmc(const SystemSpec& system, const EstimatorConfig& cfg, const FitSpec& fit);

// ---- experiments

struct SummaryRow {
  std::optional<double> sweep_value;
  double e0_wmc = 0.0, e0_wmc_err = 0.0;
  double e0_diag = 0.0, e0_diag_err = 0.0;
  bool has_wmc = false, has_diag = false;
  std::string status = "ok";
};

struct ExperimentResult {
  std::vector<SummaryRow> summary;
  int failures = 0;
  std::vector<std::string> files;
};

std::uint64_t sweep_key(const std::string& name, double value) noexcept;

ExperimentResult run_experiment(const ExperimentConfig& config, const RunOptions& options = {});

// ---- timing benchmark

struct TimingRecord {
  std::string method;  // "wmc" or "diag"
  int dimension = 0;
  double size = 0.0;   // tuples for wmc, N_T for diag
  int repeat = 0;
  double wall_time = 0.0;
};

struct ScalingFit {
  std::string method;
  int dimension = 0;
  double exponent = 0.0;
  double exponent_err = 0.0;
  int points = 0;
};

struct BenchmarkResult {
  std::vector<TimingRecord> records;
  std::vector<ScalingFit> fits;
};

// Wall time of one Flat-mode estimate of a soft-Coulomb pair with the given
// tuple count.
double time_wmc_estimate(int dimension, long long samples, int n_points, double t, int workers = 1);
// Wall time of assembling and solving one soft-Coulomb pair grid problem.
double time_diag_solve(int dimension, int n, double box, bool reduce_relative, double tol, int workers = 1,
                       long long* n_total = nullptr);
// Least-squares slope of log(time) against log(size), residual-scaled error.
ScalingFit fit_scaling(const std::string& method, int dimension, const std::vector<TimingRecord>& records);

BenchmarkResult benchmark(const ExperimentConfig& config, const RunOptions& options = {});

// ---- verification suite

struct CheckResult {
  std::string name;
  bool passed = false;
  std::string detail;
};

struct VerifyReport {
  std::vector<CheckResult> checks;
  bool all_passed() const;
};

VerifyReport verify(const VerifySpec& spec = {});

std::string describe(const ExperimentConfig& config);

}  // namespace wmc
