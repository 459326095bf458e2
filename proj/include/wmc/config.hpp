#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "wmc/estimator.hpp"
#include "wmc/fit.hpp"

namespace wmc {

struct SweepSpec {
  std::string name;
  std::vector<double> values;
};

struct FitSpec {
  FitForm form = FitForm::LinearPlusLog;
  std::optional<FitWindow> window;  // unset: chosen by select_window
  WindowOptions window_search;
  FitOptions options;
};

struct DiagSpec {
  std::vector<int> n;
  double box = 10.0;
  double tolerance = 1e-9;
  int max_iter = 50000;
  bool reduce_relative = false;  // solve the two-body problem in r = x_0 - x_1
  std::vector<int> pade_orders{3, 4};
  int krylov = 40;
};

struct BenchmarkSpec {
  std::vector<long long> samples;  // total tuples per estimate
  std::vector<int> dimensions{1, 2, 3};
  int n_points = 100;
  double t = 1.0;
  int repeats = 3;
  std::vector<int> diag_n;
  int diag_dimension = 2;
  bool diag_reduce_relative = false;
  double diag_box = 10.0;
  double diag_tolerance = 1e-8;
};

struct VerifySpec {
  double omega_scale = 0.0;  // 0 means the correct loop scale
  int covariance_loops = 20000;
  int smoothing_pairs = 1000;
};

// One parsed experiment. The system and wmc blocks may contain "$name"
// placeholders that are bound per sweep value by system()/estimator().
struct ExperimentConfig {
  std::string name;
  std::string source;         // path or "<string>"
  std::string canonical;      // sorted-key JSON of the resolved document
  std::uint64_t hash = 0;
  std::optional<SweepSpec> sweep;
  bool has_system = false;
  bool has_wmc = false;
  std::optional<FitSpec> fit;
  std::optional<DiagSpec> diag;
  std::optional<BenchmarkSpec> benchmark;
  VerifySpec verify;
  std::string out_dir = "results";
  int workers = 1;

  SystemSpec system(std::optional<double> sweep_value = std::nullopt) const;
  EstimatorConfig estimator(std::optional<double> sweep_value = std::nullopt) const;

  // Internal: the original YAML text, re-read per sweep value.
  std::string document;
  std::optional<std::uint64_t> seed_override;
};

struct ConfigOverrides {
  std::optional<std::uint64_t> seed;
  std::optional<int> workers;
  std::optional<std::string> out_dir;
};

ExperimentConfig parse_config(const std::string& text, const std::string& origin = "<string>",
                              const ConfigOverrides& overrides = {});
ExperimentConfig load_config(const std::string& path, const ConfigOverrides& overrides = {});

std::uint64_t fnv1a64(const std::string& bytes) noexcept;

}  // namespace wmc
