#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "wmc/estimator.hpp"

namespace wmc {

struct KernelPoint {
  double t = 0.0;
  double ln_k = 0.0;
  double ln_k_err = 0.0;
};

struct KernelSeries {
  std::vector<KernelPoint> points;
  std::string tag;
  std::uint64_t config_hash = 0;

  // Valid estimates only, in T order.
  static KernelSeries from_estimates(std::span<const PropagatorEstimate> estimates, std::string tag = {},
                                     std::uint64_t config_hash = 0);
  double t_min() const;
  double t_max() const;
};

enum class FitForm { Linear, LinearPlusLog };

// Absolute: covariance from the weights alone. ResidualScaled: multiplied by
// chi2/dof, the convention of common weighted fitting packages.
enum class ErrorScaling { Absolute, ResidualScaled };

struct FitWindow {
  double t_min = 0.0;
  double t_max = 0.0;
};

struct FitOptions {
  ErrorScaling scaling = ErrorScaling::ResidualScaled;
  std::optional<double> fixed_b;  // LinearPlusLog with b held fixed
  double max_condition = 1e12;
};

// Model: -ln K(T) = -a + E0 T + b ln T.
struct EnergyFitResult {
  FitForm form = FitForm::Linear;
  double e0 = 0.0, e0_err = 0.0;
  double a = 0.0, a_err = 0.0;
  double b = 0.0, b_err = 0.0;
  FitWindow window;
  int n_points = 0;
  int dof = 0;
  double chi2 = 0.0;
  double chi2_per_dof = 0.0;
  double condition = 0.0;
  std::array<std::array<double, 3>, 3> covariance{};  // order (a, E0, b)
};

EnergyFitResult fit_linear(const KernelSeries& series, FitWindow window, const FitOptions& options = {});
// dimension is informational; b stays a free parameter unless options.fixed_b is set.
EnergyFitResult fit_linear_plus_log(const KernelSeries& series, FitWindow window, int dimension = 0,
                                    const FitOptions& options = {});
EnergyFitResult fit_energy(const KernelSeries& series, FitWindow window, FitForm form,
                           const FitOptions& options = {});

struct WindowOptions {
  FitForm form = FitForm::LinearPlusLog;
  double span = 15.0;
  double min_span = 10.0;
  int min_points = 8;
  FitOptions fit;
};

FitWindow select_window(const KernelSeries& series, const WindowOptions& options = {});

struct PowerLawPoint {
  double d = 0.0;
  double e0 = 0.0;
  double err = 0.0;
};

struct PowerLawFit {
  double exponent = 0.0;
  double exponent_err = 0.0;
  double log_prefactor = 0.0;  // ln|E0| at d = 1
  double chi2_per_dof = 0.0;
};

PowerLawFit fit_power_law(std::span<const PowerLawPoint> points);

// Weighted linear least squares used by the fitters above.
struct LinearLeastSquares {
  std::vector<double> theta;
  std::vector<std::vector<double>> covariance;  // unscaled (X^T W X)^-1
  double chi2 = 0.0;
  int dof = 0;
  double condition = 0.0;
};

// design is row-major n x p; weights are 1/err^2.
LinearLeastSquares weighted_least_squares(const std::vector<double>& design, int p, const std::vector<double>& y,
                                          const std::vector<double>& weights);

}  // namespace wmc
