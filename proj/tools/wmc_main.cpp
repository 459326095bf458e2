// wmc command line: run, benchmark, verify, describe.
#include <CLI11.hpp>

#include <filesystem>
#include <iostream>

#include "wmc/config.hpp"
#include "wmc/error.hpp"
#include "wmc/harness.hpp"
#include "wmc/results.hpp"

namespace {

constexpr int kOk = 0;
constexpr int kConfigError = 1;
constexpr int kRuntimeError = 2;

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Worldline Monte Carlo propagators, energies and grid baselines"};
  app.set_version_flag("--version", wmc::version());
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir;
  int workers = 0;
  std::uint64_t seed = 0;
  bool quiet = false;
  double omega_scale = 0.0;

  std::vector<CLI::Option*> seed_opts;
  auto add_common = [&](CLI::App* sub, bool needs_config) {
    auto* opt = sub->add_option("--config", config_path, "experiment file (YAML)");
    if (needs_config) opt->required();
    sub->add_option("--workers", workers, "worker threads")->check(CLI::PositiveNumber);
    seed_opts.push_back(sub->add_option("--seed", seed, "override the master seed"));
    sub->add_option("--out", out_dir, "output directory");
    sub->add_flag("--quiet,-q", quiet, "no progress output");
  };
  auto* run = app.add_subcommand("run", "run the WMC and grid calculations of a config");
  add_common(run, true);
  auto* bench = app.add_subcommand("benchmark", "time the estimator and the grid solver");
  add_common(bench, true);
  auto* ver = app.add_subcommand("verify", "run the invariant suite");
  add_common(ver, false);
  ver->add_option("--omega-scale", omega_scale, "override the loop scale constant (mutation check)");
  auto* desc = app.add_subcommand("describe", "print the resolved config");
  add_common(desc, true);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kOk : kConfigError;
  }

  wmc::ConfigOverrides ov;
  if (workers > 0) ov.workers = workers;
  if (!out_dir.empty()) ov.out_dir = out_dir;
  for (auto* o : seed_opts)
    if (o->count() > 0) ov.seed = seed;

  wmc::ExperimentConfig cfg;
  if (!config_path.empty()) {
    if (!std::filesystem::exists(config_path)) {
      std::cerr << "config file '" << config_path << "' not found\n\n" << app.help();
      return kConfigError;
    }
    try {
      cfg = wmc::load_config(config_path, ov);
    } catch (const wmc::Error& e) {
      std::cerr << e.what() << "\n";
      return kConfigError;
    }
  }

  wmc::RunOptions opts;
  opts.log = quiet ? nullptr : &std::cerr;
  try {
    if (app.got_subcommand(desc)) {
      std::cout << wmc::describe(cfg);
      return kOk;
    }
    if (app.got_subcommand(ver)) {
      wmc::VerifySpec spec = config_path.empty() ? wmc::VerifySpec{} : cfg.verify;
      if (ver->count("--omega-scale")) spec.omega_scale = omega_scale;
      const auto report = wmc::verify(spec);
      for (const auto& c : report.checks)
        std::cout << (c.passed ? "PASS " : "FAIL ") << c.name << ": " << c.detail << "\n";
      return report.all_passed() ? kOk : kRuntimeError;
    }
    if (app.got_subcommand(bench)) {
      const auto r = wmc::benchmark(cfg, opts);
      for (const auto& f : r.fits)
        std::cout << f.method << " D=" << f.dimension << " exponent " << f.exponent << " +- " << f.exponent_err
                  << "\n";
      return kOk;
    }
    const auto r = wmc::run_experiment(cfg, opts);
    std::cout << (cfg.sweep ? cfg.sweep->name : std::string("run")) << ",e0_wmc,e0_wmc_err,e0_diag,e0_diag_err,status\n";
    for (const auto& row : r.summary) {
      std::cout << (row.sweep_value ? wmc::fmt(*row.sweep_value) : std::string("-")) << ","
                << (row.has_wmc ? wmc::fmt(row.e0_wmc) : "nan") << ","
                << (row.has_wmc ? wmc::fmt(row.e0_wmc_err) : "nan") << ","
                << (row.has_diag ? wmc::fmt(row.e0_diag) : "nan") << ","
                << (row.has_diag ? wmc::fmt(row.e0_diag_err) : "nan") << "," << row.status << "\n";
    }
    return r.failures == 0 ? kOk : kRuntimeError;
  } catch (const wmc::Error& e) {
    std::cerr << e.what() << "\n";
    return e.kind() == wmc::ErrorKind::ConfigError ? kConfigError : kRuntimeError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kRuntimeError;
  }
}
