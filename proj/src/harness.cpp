#include "wmc/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <limits>
#include <ostream>
#include <sstream>

#include <json.hpp>

#include "wmc/error.hpp"
#include "wmc/results.hpp"
#include "wmc/rng.hpp"

namespace wmc {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string status_of(const std::exception& e) {
  if (const auto* w = dynamic_cast<const Error*>(&e)) return to_string(w->kind());
  return "Error";
}

}  // namespace

GridHamiltonian build_grid_hamiltonian(const SystemSpec& system, int n, double box, bool reduce_relative,
                                       int workers) {
  system.validate();
  GridSpec grid;
  grid.n = n;
  grid.box = box;
  grid.dimension = system.dimension;
  if (!reduce_relative) {
    grid.n_particles = system.n_particles();
    std::vector<double> masses;
    for (const auto& p : system.particles) masses.push_back(p.mass);
    return assemble(grid, system.potential, masses, workers);
  }
  if (system.n_particles() != 2)
    fail(ErrorKind::InvalidArgument, "relative-coordinate reduction needs exactly two particles");
  for (const auto& t : system.potential.terms())
    if (!is_pair_shape(t.shape))
      fail(ErrorKind::InvalidArgument, "relative-coordinate reduction needs pair terms only; '" +
                                           std::string(shape_name(t.shape)) + "' is external");
  const double m0 = system.particles[0].mass, m1 = system.particles[1].mass;
  const std::vector<double> mu{m0 * m1 / (m0 + m1)};
  grid.n_particles = 1;
  const auto& terms = system.potential.terms();
  const GridPotential v = [&terms](std::span<const double> r) {
    double r2 = 0.0;
    for (double x : r) r2 += x * x;
    double s = 0.0;
    for (const auto& t : terms) s += pair_value(t.shape, r2);
    return s;
  };
  return assemble(grid, v, mu, workers);
}

DiagOutcome diagonalise(const SystemSpec& system, const DiagSpec& spec, int workers) {
  require(!spec.n.empty(), "diag needs at least one grid size");
  DiagOutcome out;
  LanczosOptions lo;
  lo.krylov = spec.krylov;
  for (int n : spec.n) {
    const auto t0 = Clock::now();
    const auto H = build_grid_hamiltonian(system, n, spec.box, spec.reduce_relative, workers);
    const auto gs = ground_state(H, spec.tolerance, spec.max_iter, lo);
    out.points.push_back({n, H.size(), gs.energy, gs.residual, gs.matvecs, seconds_since(t0)});
  }
  std::vector<ConvergencePoint> conv;
  for (const auto& p : out.points) conv.push_back({static_cast<double>(p.n), p.e0});
  std::vector<int> orders = spec.pade_orders;
  std::sort(orders.begin(), orders.end());
  for (int order : orders) {
    PadeAsymptote a;
    a.order = order;
    try {
      a.e_inf = extrapolate(conv, order).asymptote;
      a.status = "ok";
    } catch (const Error& e) {
      a.status = to_string(e.kind());
      a.e_inf = std::numeric_limits<double>::quiet_NaN();
    }
    out.pade.push_back(a);
  }
  for (auto it = out.pade.rbegin(); it != out.pade.rend(); ++it) {
    if (it->status != "ok") continue;
    out.has_asymptote = true;
    out.e_inf = it->e_inf;
    for (const auto& other : out.pade)
      if (other.status == "ok") out.e_inf_err = std::max(out.e_inf_err, std::abs(other.e_inf - out.e_inf));
    break;
  }
  return out;
}

WmcOutcome run_wmc(const SystemSpec& system, const EstimatorConfig& cfg, const FitSpec& fit) {
  WmcOutcome out;
  const YloopSource source(cfg.n_points);
  for (double T : cfg.t_grid) {
    const auto t0 = Clock::now();
    out.estimates.push_back(estimate_propagator(system, cfg, T, source));
    out.wall_times.push_back(seconds_since(t0));
  }
  out.series = KernelSeries::from_estimates(out.estimates, system.tag, 0);
  try {
    const FitWindow w = fit.window ? *fit.window : select_window(out.series, fit.window_search);
    out.fit = fit_energy(out.series, w, fit.form, fit.options);
    out.fit_status = "ok";
  } catch (const Error& e) {
    out.fit_status = to_string(e.kind());
  }
  return out;
}

std::uint64_t sweep_key(const std::string& name, double value) noexcept {
  return splitmix64(fnv1a64(name) ^ splitmix64(bits_of(value)));
}

ExperimentResult run_experiment(const ExperimentConfig& config, const RunOptions& options) {
  ExperimentResult result;
  const auto dir = std::filesystem::path(config.out_dir);
  const bool files = options.write_files;
  CsvSink kernel, energy, diag_sink, pade, summary;
  auto open = [&](CsvSink& sink, const std::string& kind, std::vector<std::string> cols) {
    if (!files) return;
    sink = CsvSink((dir / (kind + ".csv")).string(), kind, config.hash, std::move(cols));
    result.files.push_back(sink.path());
  };
  const std::string sweep_col = config.sweep ? config.sweep->name : "sweep";
  if (config.has_wmc) {
    open(kernel, "kernel",
         {"run_id", sweep_col, "t", "ln_k", "ln_k_err", "wilson_mean", "log_wilson_mean", "wilson_sem",
          "wilson_sem_iid", "ln_free", "n_samples", "n_repetitions", "n_excluded", "n_flagged", "valid",
          "wall_time", "seed"});
    open(energy, "energy",
         {"run_id", sweep_col, "form", "e0", "e0_err", "a", "a_err", "b", "b_err", "t_min", "t_max", "n_points",
          "dof", "chi2_per_dof", "condition", "status"});
  }
  if (config.diag) {
    open(diag_sink, "diag", {"run_id", sweep_col, "n", "n_total", "e0", "residual", "matvecs", "wall_time"});
    open(pade, "pade", {"run_id", sweep_col, "order", "e_inf", "status"});
  }
  open(summary, "summary", {"run_id", sweep_col, "e0_wmc", "e0_wmc_err", "e0_diag", "e0_diag_err", "status"});

  std::vector<std::optional<double>> points;
  if (config.sweep)
    for (double v : config.sweep->values) points.emplace_back(v);
  else
    points.emplace_back(std::nullopt);

  const FitSpec fit_spec = config.fit ? *config.fit : FitSpec{};
  const double nan = std::numeric_limits<double>::quiet_NaN();
  for (std::size_t run = 0; run < points.size(); ++run) {
    const auto& value = points[run];
    const std::string id = std::to_string(run);
    const std::string sv = value ? fmt(*value) : "nan";
    SummaryRow row;
    row.sweep_value = value;
    std::vector<std::string> problems;
    const auto system = config.system(value);

    if (config.has_wmc) {
      auto cfg = config.estimator(value);
      cfg.sweep_key = value ? sweep_key(config.sweep->name, *value) : 0;
      try {
        const auto w = run_wmc(system, cfg, fit_spec);
        if (files) {
          for (std::size_t i = 0; i < w.estimates.size(); ++i) {
            const auto& e = w.estimates[i];
            kernel.row({id, sv, fmt(e.t), fmt(e.ln_kernel), fmt(e.ln_kernel_err), fmt(e.wilson_mean),
                        fmt(e.log_wilson_mean), fmt(e.wilson_sem), fmt(e.wilson_sem_iid), fmt(e.ln_free),
                        fmt(e.n_samples), fmt(static_cast<long long>(e.n_repetitions)),
                        fmt(static_cast<long long>(e.n_excluded)), fmt(e.n_flagged), e.valid ? "1" : "0",
                        fmt(w.wall_times[i]), std::to_string(cfg.seed)});
          }
        }
        if (w.fit) {
          const auto& f = *w.fit;
          row.has_wmc = true;
          row.e0_wmc = f.e0;
          row.e0_wmc_err = f.e0_err;
          if (files)
            energy.row({id, sv, f.form == FitForm::Linear ? "linear" : "linear_plus_log", fmt(f.e0), fmt(f.e0_err),
                        fmt(f.a), fmt(f.a_err), fmt(f.b), fmt(f.b_err), fmt(f.window.t_min), fmt(f.window.t_max),
                        fmt(static_cast<long long>(f.n_points)), fmt(static_cast<long long>(f.dof)),
                        fmt(f.chi2_per_dof), fmt(f.condition), "ok"});
        } else {
          problems.push_back("wmc " + w.fit_status);
          if (files)
            energy.row({id, sv, fit_spec.form == FitForm::Linear ? "linear" : "linear_plus_log", "nan", "nan", "nan",
                        "nan", "nan", "nan", "nan", "nan", "0", "0", "nan", "nan", w.fit_status});
        }
      } catch (const std::exception& e) {
        problems.push_back("wmc " + status_of(e));
        if (options.log) *options.log << "run " << id << ": wmc failed: " << e.what() << "\n";
      }
    }

    if (config.diag) {
      try {
        const auto d = diagonalise(system, *config.diag, config.workers);
        if (files) {
          for (const auto& p : d.points)
            diag_sink.row({id, sv, std::to_string(p.n), fmt(p.n_total), fmt(p.e0), fmt(p.residual),
                           std::to_string(p.matvecs), fmt(p.wall_time)});
          for (const auto& a : d.pade) pade.row({id, sv, std::to_string(a.order), fmt(a.e_inf), a.status});
        }
        if (d.has_asymptote) {
          row.has_diag = true;
          row.e0_diag = d.e_inf;
          row.e0_diag_err = d.e_inf_err;
        } else {
          problems.push_back("diag PolesOnRange");
        }
      } catch (const std::exception& e) {
        problems.push_back("diag " + status_of(e));
        if (options.log) *options.log << "run " << id << ": diag failed: " << e.what() << "\n";
      }
    }

    if (!problems.empty()) {
      std::string s;
      for (const auto& p : problems) s += (s.empty() ? "" : "; ") + p;
      row.status = s;
      ++result.failures;
    }
    if (files)
      summary.row({id, sv, row.has_wmc ? fmt(row.e0_wmc) : fmt(nan), row.has_wmc ? fmt(row.e0_wmc_err) : fmt(nan),
                   row.has_diag ? fmt(row.e0_diag) : fmt(nan), row.has_diag ? fmt(row.e0_diag_err) : fmt(nan),
                   row.status});
    if (options.log) {
      auto& log = *options.log;
      log << (config.sweep ? config.sweep->name + " = " + sv : std::string("run")) << ":";
      if (row.has_wmc) log << "  E0_wmc = " << row.e0_wmc << " +- " << row.e0_wmc_err;
      if (row.has_diag) log << "  E0_diag = " << row.e0_diag << " +- " << row.e0_diag_err;
      if (row.status != "ok") log << "  [" << row.status << "]";
      log << "\n";
    }
    result.summary.push_back(row);
  }
  return result;
}

double time_wmc_estimate(int dimension, long long samples, int n_points, double t, int workers) {
  SystemSpec s;
  s.dimension = dimension;
  s.particles.assign(2, Particle{1.0, std::vector<double>(dimension, 0.0), std::vector<double>(dimension, 0.0)});
  s.potential = make_soft_coulomb_pair(1.0, 1.0, dimension);
  EstimatorConfig c;
  c.sum_mode = SumMode::Flat;
  c.loops = 1;
  c.flat_samples = samples;
  c.n_points = n_points;
  c.t_grid = {t};
  c.workers = workers;
  const auto t0 = Clock::now();
  const auto e = estimate_propagator(s, c, t);
  const double dt = seconds_since(t0);
  if (!e.valid) fail(ErrorKind::NonPositiveMean, "benchmark estimate is not valid");
  return dt;
}

double time_diag_solve(int dimension, int n, double box, bool reduce_relative, double tol, int workers,
                       long long* n_total) {
  SystemSpec s;
  s.dimension = dimension;
  s.particles.assign(2, Particle{1.0, std::vector<double>(dimension, 0.0), std::vector<double>(dimension, 0.0)});
  s.potential = make_soft_coulomb_pair(1.0, 1.0, dimension);
  const auto t0 = Clock::now();
  const auto H = build_grid_hamiltonian(s, n, box, reduce_relative, workers);
  ground_state(H, tol, 1000000);
  if (n_total) *n_total = H.size();
  return seconds_since(t0);
}

ScalingFit fit_scaling(const std::string& method, int dimension, const std::vector<TimingRecord>& records) {
  std::vector<double> X, y, w;
  for (const auto& r : records) {
    if (r.method != method || r.dimension != dimension) continue;
    require(r.size > 0 && r.wall_time > 0, "timing records need positive size and time");
    X.push_back(1.0);
    X.push_back(std::log(r.size));
    y.push_back(std::log(r.wall_time));
    w.push_back(1.0);
  }
  if (y.size() < 3) fail(ErrorKind::InsufficientPoints, "scaling fit needs at least three timings");
  const auto ls = weighted_least_squares(X, 2, y, w);
  if (!std::isfinite(ls.condition)) fail(ErrorKind::SingularDesign, "all sizes coincide");
  ScalingFit f;
  f.method = method;
  f.dimension = dimension;
  f.exponent = ls.theta[1];
  const double s2 = ls.dof > 0 ? ls.chi2 / ls.dof : 1.0;
  f.exponent_err = std::sqrt(ls.covariance[1][1] * s2);
  f.points = static_cast<int>(y.size());
  return f;
}

BenchmarkResult benchmark(const ExperimentConfig& config, const RunOptions& options) {
  if (!config.benchmark) fail(ErrorKind::ConfigError, "config has no benchmark block");
  const auto& b = *config.benchmark;
  BenchmarkResult out;
  CsvSink timing, scaling;
  if (options.write_files) {
    const auto dir = std::filesystem::path(config.out_dir);
    timing = CsvSink((dir / "timing.csv").string(), "timing", config.hash,
                     {"method", "dimension", "size", "repeat", "wall_time"});
    scaling = CsvSink((dir / "scaling.csv").string(), "scaling", config.hash,
                      {"method", "dimension", "exponent", "exponent_err", "points"});
  }
  auto record = [&](const TimingRecord& r) {
    out.records.push_back(r);
    if (timing.is_open())
      timing.row({r.method, std::to_string(r.dimension), fmt(r.size), std::to_string(r.repeat), fmt(r.wall_time)});
    if (options.log)
      *options.log << r.method << " D=" << r.dimension << " size=" << r.size << " repeat=" << r.repeat
                   << " time=" << r.wall_time << " s\n";
  };
  auto add_fit = [&](const std::string& method, int dim) {
    try {
      // Median over repeats per size keeps one slow outlier from tilting the slope.
      std::vector<TimingRecord> med;
      std::vector<double> sizes;
      for (const auto& r : out.records)
        if (r.method == method && r.dimension == dim &&
            std::find(sizes.begin(), sizes.end(), r.size) == sizes.end())
          sizes.push_back(r.size);
      for (double s : sizes) {
        std::vector<double> t;
        for (const auto& r : out.records)
          if (r.method == method && r.dimension == dim && r.size == s) t.push_back(r.wall_time);
        std::sort(t.begin(), t.end());
        med.push_back({method, dim, s, 0, t[t.size() / 2]});
      }
      const auto f = fit_scaling(method, dim, med);
      out.fits.push_back(f);
      if (scaling.is_open())
        scaling.row({method, std::to_string(dim), fmt(f.exponent), fmt(f.exponent_err), std::to_string(f.points)});
      if (options.log)
        *options.log << method << " D=" << dim << ": exponent " << f.exponent << " +- " << f.exponent_err << "\n";
    } catch (const Error& e) {
      if (options.log) *options.log << method << " D=" << dim << ": " << e.what() << "\n";
    }
  };
  for (int dim : b.dimensions) {
    if (b.samples.empty()) break;
    for (long long s : b.samples)
      for (int r = 0; r < b.repeats; ++r)
        record({"wmc", dim, static_cast<double>(s), r, time_wmc_estimate(dim, s, b.n_points, b.t, config.workers)});
    add_fit("wmc", dim);
  }
  if (!b.diag_n.empty()) {
    for (int n : b.diag_n)
      for (int r = 0; r < b.repeats; ++r) {
        long long total = 0;
        const double dt =
            time_diag_solve(b.diag_dimension, n, b.diag_box, b.diag_reduce_relative, b.diag_tolerance, config.workers,
                            &total);
        record({"diag", b.diag_dimension, static_cast<double>(total), r, dt});
      }
    add_fit("diag", b.diag_dimension);
  }
  return out;
}

std::string describe(const ExperimentConfig& config) {
  std::ostringstream os;
  os << "name: " << (config.name.empty() ? "(unnamed)" : config.name) << "\n";
  os << "source: " << config.source << "\n";
  os << "version: " << version() << "\n";
  os << "config_hash: " << hex_hash(config.hash) << "\n";
  os << "workers: " << config.workers << "\n";
  os << "output: " << config.out_dir << "\n";
  if (config.sweep) {
    os << "sweep: " << config.sweep->name << " =";
    for (double v : config.sweep->values) os << " " << v;
    os << "\n";
  }
  if (config.has_system) {
    const auto first = config.sweep ? std::optional<double>(config.sweep->values.front()) : std::nullopt;
    const auto s = config.system(first);
    os << "system (" << (first ? "first sweep value" : "resolved") << "): D=" << s.dimension << ", "
       << s.n_particles() << " particles\n";
    for (int j = 0; j < s.n_particles(); ++j) {
      os << "  particle " << j << ": mass " << s.particles[j].mass << ", start (";
      for (std::size_t k = 0; k < s.particles[j].start.size(); ++k) os << (k ? ", " : "") << s.particles[j].start[k];
      os << "), end (";
      for (std::size_t k = 0; k < s.particles[j].end.size(); ++k) os << (k ? ", " : "") << s.particles[j].end[k];
      os << ")\n";
    }
    for (const auto& t : s.potential.terms()) {
      os << "  term " << shape_name(t.shape) << " on (";
      for (std::size_t k = 0; k < t.particles.size(); ++k) os << (k ? ", " : "") << t.particles[k];
      os << ")" << (t.label.empty() ? "" : " " + t.label) << "\n";
    }
  }
  if (config.has_wmc) {
    const auto first = config.sweep ? std::optional<double>(config.sweep->values.front()) : std::nullopt;
    const auto c = config.estimator(first);
    os << "wmc: N_L=" << c.loops << " N_p=" << c.n_points << " repetitions=" << c.repetitions << " T points="
       << c.t_grid.size() << " [" << c.t_grid.front() << ", " << c.t_grid.back() << "] mode="
       << (c.sum_mode == SumMode::Nested ? "nested" : "flat") << " samples=" << c.samples(config.system(first).n_particles())
       << " smoothing=" << (c.smoothing ? "on" : "off") << " seed=" << c.seed << "\n";
  }
  if (config.diag) {
    os << "diag: N =";
    for (int n : config.diag->n) os << " " << n;
    os << ", box " << config.diag->box << ", tolerance " << config.diag->tolerance
       << (config.diag->reduce_relative ? ", relative coordinate" : "") << "\n";
  }
  os << "resolved:\n" << nlohmann::json::parse(config.canonical).dump(2) << "\n";
  return os.str();
}

}  // namespace wmc
