// Python module wmc._core: thin wrappers over the C++ library.
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "wmc/config.hpp"
#include "wmc/diag.hpp"
#include "wmc/error.hpp"
#include "wmc/estimator.hpp"
#include "wmc/fit.hpp"
#include "wmc/harness.hpp"
#include "wmc/potentials.hpp"
#include "wmc/results.hpp"
#include "wmc/smoothing.hpp"
#include "wmc/worldline.hpp"

namespace py = pybind11;
using namespace wmc;

namespace {

Particle make_particle(double mass, std::vector<double> start, std::optional<std::vector<double>> end) {
  Particle p;
  p.mass = mass;
  p.start = start;
  p.end = end ? *end : start;
  return p;
}

py::array_t<double> unit_loop_array(const UnitLoop& u) {
  py::array_t<double> out({u.n_points() + 1, u.dimension()});
  auto a = out.mutable_unchecked<2>();
  for (int k = 0; k <= u.n_points(); ++k)
    for (int d = 0; d < u.dimension(); ++d) a(k, d) = u(k, d);
  return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "worldline Monte Carlo core";
  m.attr("__version__") = version();

  static PyObject* error_type = py::register_exception<Error>(m, "WmcError", PyExc_RuntimeError).ptr();
  // message carries the error kind so callers can tell failures apart
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      PyErr_SetString(error_type, (std::string(to_string(e.kind())) + ": " + e.what()).c_str());
    }
  });

  // ---- potentials
  py::class_<Harmonic>(m, "Harmonic")
      .def(py::init([](double mu, double omega, double offset) { return Harmonic{mu, omega, offset}; }),
           py::arg("mu") = 0.5, py::arg("omega") = 1.0, py::arg("offset") = 0.0)
      .def_readwrite("mu", &Harmonic::mu)
      .def_readwrite("omega", &Harmonic::omega)
      .def_readwrite("offset", &Harmonic::offset);
  py::class_<SoftCoulomb>(m, "SoftCoulomb")
      .def(py::init([](double alpha, double softening, int sign) { return SoftCoulomb{alpha, softening, sign}; }),
           py::arg("alpha") = 1.0, py::arg("softening") = 1.0, py::arg("sign") = 1)
      .def_readwrite("alpha", &SoftCoulomb::alpha)
      .def_readwrite("softening", &SoftCoulomb::softening)
      .def_readwrite("sign", &SoftCoulomb::sign);
  py::class_<BareCoulomb>(m, "BareCoulomb")
      .def(py::init([](double alpha, int sign) { return BareCoulomb{alpha, sign}; }), py::arg("alpha") = 1.0,
           py::arg("sign") = 1)
      .def_readwrite("alpha", &BareCoulomb::alpha)
      .def_readwrite("sign", &BareCoulomb::sign);
  py::class_<ErfcEffective>(m, "ErfcEffective")
      .def(py::init([](double length, int sign) { return ErfcEffective{length, sign}; }), py::arg("length") = 1.0,
           py::arg("sign") = 1)
      .def_readwrite("length", &ErfcEffective::length)
      .def_readwrite("sign", &ErfcEffective::sign);
  py::class_<SquareWell>(m, "SquareWell")
      .def(py::init([](double depth, std::vector<double> hw, std::vector<double> c) {
             return SquareWell{depth, std::move(hw), std::move(c)};
           }),
           py::arg("depth"), py::arg("half_widths"), py::arg("center") = std::vector<double>{})
      .def_readwrite("depth", &SquareWell::depth)
      .def_readwrite("half_widths", &SquareWell::half_widths)
      .def_readwrite("center", &SquareWell::center);
  py::class_<GaussianWell>(m, "GaussianWell")
      .def(py::init([](double depth, double lambda, std::vector<double> c) {
             return GaussianWell{depth, lambda, std::move(c)};
           }),
           py::arg("depth"), py::arg("lambda_"), py::arg("center") = std::vector<double>{})
      .def_readwrite("depth", &GaussianWell::depth)
      .def_readwrite("lambda_", &GaussianWell::lambda)
      .def_readwrite("center", &GaussianWell::center);

  py::class_<PotentialSpec>(m, "PotentialSpec")
      .def(py::init<int, int>(), py::arg("n_particles"), py::arg("dimension"))
      .def_property_readonly("n_particles", &PotentialSpec::n_particles)
      .def_property_readonly("dimension", &PotentialSpec::dimension)
      .def_property_readonly("n_terms", [](const PotentialSpec& p) { return p.terms().size(); })
      .def("term_names",
           [](const PotentialSpec& p) {
             std::vector<std::string> out;
             for (const auto& t : p.terms()) out.emplace_back(shape_name(t.shape));
             return out;
           })
      .def(
          "add_pair",
          [](PotentialSpec& p, int i, int j, TermShape s, std::string label) -> PotentialSpec& {
            return p.add_pair(i, j, std::move(s), std::move(label));
          },
          py::arg("i"), py::arg("j"), py::arg("shape"), py::arg("label") = "", py::return_value_policy::reference)
      .def(
          "add_external",
          [](PotentialSpec& p, int i, TermShape s, std::string label) -> PotentialSpec& {
            return p.add_external(i, std::move(s), std::move(label));
          },
          py::arg("i"), py::arg("shape"), py::arg("label") = "", py::return_value_policy::reference)
      .def("eval", [](const PotentialSpec& p, std::vector<double> x) { return p.eval(x); })
      .def("has_bare_coulomb", &PotentialSpec::has_bare_coulomb);

  m.def("harmonic_pair", &make_harmonic_pair, py::arg("mu"), py::arg("omega"), py::arg("d"), py::arg("dimension"));
  m.def("soft_coulomb_pair", &make_soft_coulomb_pair, py::arg("alpha"), py::arg("d"), py::arg("dimension"));
  m.def("bare_coulomb_pair", &make_bare_coulomb_pair, py::arg("alpha"), py::arg("dimension"));
  m.def("trion_soft", &make_trion_soft, py::arg("alpha"), py::arg("d"));
  m.def("trion_erfc", &make_trion_erfc, py::arg("d"));
  m.def("exciton_sqwell", &make_exciton_sqwell, py::arg("Ve"), py::arg("Vh"), py::arg("Lx"), py::arg("Ly"),
        py::arg("alpha"), py::arg("d"), py::arg("dimension") = 2);
  m.def("exciton_gaussian", &make_exciton_gaussian, py::arg("Ve"), py::arg("Vh"), py::arg("lambda_e"),
        py::arg("lambda_h"), py::arg("alpha"), py::arg("d"), py::arg("dimension") = 2);
  m.def("confined_exciton_3d", &make_3d_confined_exciton, py::arg("alpha"), py::arg("Ve"), py::arg("Vh"),
        py::arg("Lz"), py::arg("d"));
  m.def("erfcx", &erfcx);

  // ---- systems and the estimator
  py::class_<Particle>(m, "Particle")
      .def(py::init(&make_particle), py::arg("mass"), py::arg("start"), py::arg("end") = py::none())
      .def_readwrite("mass", &Particle::mass)
      .def_readwrite("start", &Particle::start)
      .def_readwrite("end", &Particle::end);

  py::class_<SystemSpec>(m, "SystemSpec")
      .def(py::init([](int dim, std::vector<Particle> ps, PotentialSpec pot, std::string tag) {
             SystemSpec s;
             s.dimension = dim;
             s.particles = std::move(ps);
             s.potential = std::move(pot);
             s.tag = std::move(tag);
             s.validate();
             return s;
           }),
           py::arg("dimension"), py::arg("particles"), py::arg("potential"), py::arg("tag") = "")
      .def_readwrite("dimension", &SystemSpec::dimension)
      .def_readwrite("particles", &SystemSpec::particles)
      .def_readwrite("potential", &SystemSpec::potential)
      .def_readwrite("tag", &SystemSpec::tag);

  py::enum_<SumMode>(m, "SumMode").value("Nested", SumMode::Nested).value("Flat", SumMode::Flat);
  py::enum_<RepetitionCombine>(m, "RepetitionCombine")
      .value("InverseVariance", RepetitionCombine::InverseVariance)
      .value("Pooled", RepetitionCombine::Pooled);

  py::class_<EstimatorConfig>(m, "EstimatorConfig")
      .def(py::init<>())
      .def_readwrite("loops", &EstimatorConfig::loops)
      .def_readwrite("flat_samples", &EstimatorConfig::flat_samples)
      .def_readwrite("n_points", &EstimatorConfig::n_points)
      .def_readwrite("repetitions", &EstimatorConfig::repetitions)
      .def_readwrite("t_grid", &EstimatorConfig::t_grid)
      .def_readwrite("sum_mode", &EstimatorConfig::sum_mode)
      .def_readwrite("smoothing", &EstimatorConfig::smoothing)
      .def_readwrite("seed", &EstimatorConfig::seed)
      .def_readwrite("sweep_key", &EstimatorConfig::sweep_key)
      .def_readwrite("common_streams", &EstimatorConfig::common_streams)
      .def_readwrite("combine", &EstimatorConfig::combine)
      .def_readwrite("workers", &EstimatorConfig::workers)
      .def("validate", &EstimatorConfig::validate);

  py::class_<PropagatorEstimate>(m, "PropagatorEstimate")
      .def_readonly("t", &PropagatorEstimate::t)
      .def_readonly("wilson_mean", &PropagatorEstimate::wilson_mean)
      .def_readonly("log_wilson_mean", &PropagatorEstimate::log_wilson_mean)
      .def_readonly("wilson_sem", &PropagatorEstimate::wilson_sem)
      .def_readonly("wilson_sem_iid", &PropagatorEstimate::wilson_sem_iid)
      .def_readonly("ln_free", &PropagatorEstimate::ln_free)
      .def_readonly("kernel", &PropagatorEstimate::kernel)
      .def_readonly("ln_kernel", &PropagatorEstimate::ln_kernel)
      .def_readonly("ln_kernel_err", &PropagatorEstimate::ln_kernel_err)
      .def_readonly("n_samples", &PropagatorEstimate::n_samples)
      .def_readonly("n_repetitions", &PropagatorEstimate::n_repetitions)
      .def_readonly("n_flagged", &PropagatorEstimate::n_flagged)
      .def_readonly("valid", &PropagatorEstimate::valid)
      .def("__repr__", [](const PropagatorEstimate& e) {
        return "<PropagatorEstimate T=" + fmt(e.t) + " lnK=" + fmt(e.ln_kernel) + " +- " + fmt(e.ln_kernel_err) +
               ">";
      });

  m.def(
      "estimate_propagator",
      [](const SystemSpec& s, const EstimatorConfig& c, double T) {
        py::gil_scoped_release nogil;
        return estimate_propagator(s, c, T);
      },
      py::arg("system"), py::arg("config"), py::arg("T"));
  m.def(
      "estimate_series",
      [](const SystemSpec& s, const EstimatorConfig& c) {
        py::gil_scoped_release nogil;
        return estimate_series(s, c);
      },
      py::arg("system"), py::arg("config"));
  m.def(
      "log_free_kernel",
      [](double mass, int dim, std::vector<double> x, std::vector<double> y, double T) {
        return log_free_kernel(mass, dim, x, y, T);
      },
      py::arg("mass"), py::arg("dimension"), py::arg("x"), py::arg("x_end"), py::arg("T"));

  m.def(
      "unit_loop",
      [](int n_points, int dimension, std::uint64_t seed, int particle, std::uint64_t index,
         std::uint64_t ensemble) {
        LoopConfig c;
        c.n_points = n_points;
        c.dimension = dimension;
        c.n_particles = particle + 1;
        c.seed = seed;
        return unit_loop_array(generate_unit_loop(c, particle, index, ensemble));
      },
      py::arg("n_points"), py::arg("dimension") = 1, py::arg("seed") = 0, py::arg("particle") = 0,
      py::arg("index") = 0, py::arg("ensemble") = 0,
      "one discrete bridge, shape (n_points + 1, dimension)");

  m.def(
      "inverse_distance_integral",
      [](std::vector<double> a, std::vector<double> b) {
        const auto r = inverse_distance_integral(a, b);
        return py::make_tuple(r.value, r.status == SegmentStatus::Ok ? "ok"
                                       : r.status == SegmentStatus::Degenerate ? "degenerate"
                                                                               : "log_singular");
      },
      py::arg("a"), py::arg("b"));

  // ---- fitting
  py::enum_<FitForm>(m, "FitForm").value("Linear", FitForm::Linear).value("LinearPlusLog", FitForm::LinearPlusLog);
  py::enum_<ErrorScaling>(m, "ErrorScaling")
      .value("Absolute", ErrorScaling::Absolute)
      .value("ResidualScaled", ErrorScaling::ResidualScaled);

  py::class_<FitOptions>(m, "FitOptions")
      .def(py::init<>())
      .def_readwrite("scaling", &FitOptions::scaling)
      .def_readwrite("fixed_b", &FitOptions::fixed_b)
      .def_readwrite("max_condition", &FitOptions::max_condition);

  py::class_<KernelSeries>(m, "KernelSeries")
      .def(py::init([](std::vector<double> t, std::vector<double> lnk, std::vector<double> err) {
             require(t.size() == lnk.size() && t.size() == err.size(), "t, ln_k and err differ in length");
             KernelSeries s;
             for (std::size_t i = 0; i < t.size(); ++i) s.points.push_back({t[i], lnk[i], err[i]});
             return s;
           }),
           py::arg("t"), py::arg("ln_k"), py::arg("err"))
      .def_static("from_estimates",
                  [](const std::vector<PropagatorEstimate>& e) { return KernelSeries::from_estimates(e); })
      .def_property_readonly("t", [](const KernelSeries& s) {
        std::vector<double> v;
        for (const auto& p : s.points) v.push_back(p.t);
        return v;
      })
      .def_property_readonly("ln_k", [](const KernelSeries& s) {
        std::vector<double> v;
        for (const auto& p : s.points) v.push_back(p.ln_k);
        return v;
      })
      .def("__len__", [](const KernelSeries& s) { return s.points.size(); });

  py::class_<EnergyFitResult>(m, "EnergyFitResult")
      .def_readonly("form", &EnergyFitResult::form)
      .def_readonly("e0", &EnergyFitResult::e0)
      .def_readonly("e0_err", &EnergyFitResult::e0_err)
      .def_readonly("a", &EnergyFitResult::a)
      .def_readonly("a_err", &EnergyFitResult::a_err)
      .def_readonly("b", &EnergyFitResult::b)
      .def_readonly("b_err", &EnergyFitResult::b_err)
      .def_property_readonly("window",
                             [](const EnergyFitResult& f) { return py::make_tuple(f.window.t_min, f.window.t_max); })
      .def_readonly("n_points", &EnergyFitResult::n_points)
      .def_readonly("chi2", &EnergyFitResult::chi2)
      .def_readonly("chi2_per_dof", &EnergyFitResult::chi2_per_dof)
      .def("__repr__", [](const EnergyFitResult& f) {
        return "<EnergyFitResult E0=" + fmt(f.e0) + " +- " + fmt(f.e0_err) + ">";
      });

  m.def(
      "fit_energy",
      [](const KernelSeries& s, std::optional<std::pair<double, double>> window, FitForm form,
         const FitOptions& opts) {
        FitWindow w{s.t_min(), s.t_max()};
        if (window) w = {window->first, window->second};
        return fit_energy(s, w, form, opts);
      },
      py::arg("series"), py::arg("window") = py::none(), py::arg("form") = FitForm::LinearPlusLog,
      py::arg("options") = FitOptions{});
  m.def(
      "select_window",
      [](const KernelSeries& s, double span, double min_span, int min_points, FitForm form) {
        WindowOptions o;
        o.span = span;
        o.min_span = min_span;
        o.min_points = min_points;
        o.form = form;
        const auto w = select_window(s, o);
        return py::make_tuple(w.t_min, w.t_max);
      },
      py::arg("series"), py::arg("span") = 15.0, py::arg("min_span") = 10.0, py::arg("min_points") = 8,
      py::arg("form") = FitForm::LinearPlusLog);
  m.def(
      "fit_power_law",
      [](std::vector<double> d, std::vector<double> e0, std::vector<double> err) {
        require(d.size() == e0.size() && d.size() == err.size(), "d, e0 and err differ in length");
        std::vector<PowerLawPoint> pts;
        for (std::size_t i = 0; i < d.size(); ++i) pts.push_back({d[i], e0[i], err[i]});
        const auto f = fit_power_law(pts);
        return py::dict(py::arg("exponent") = f.exponent, py::arg("exponent_err") = f.exponent_err,
                        py::arg("log_prefactor") = f.log_prefactor, py::arg("chi2_per_dof") = f.chi2_per_dof);
      },
      py::arg("d"), py::arg("e0"), py::arg("err"));

  // ---- grid baseline
  py::class_<DiagSpec>(m, "DiagSpec")
      .def(py::init<>())
      .def_readwrite("n", &DiagSpec::n)
      .def_readwrite("box", &DiagSpec::box)
      .def_readwrite("tolerance", &DiagSpec::tolerance)
      .def_readwrite("max_iter", &DiagSpec::max_iter)
      .def_readwrite("reduce_relative", &DiagSpec::reduce_relative)
      .def_readwrite("pade_orders", &DiagSpec::pade_orders)
      .def_readwrite("krylov", &DiagSpec::krylov);

  m.def(
      "grid_ground_state",
      [](const SystemSpec& s, int n, double box, bool reduce_relative, double tol) {
        py::gil_scoped_release nogil;
        const auto H = build_grid_hamiltonian(s, n, box, reduce_relative);
        const auto g = ground_state(H, tol);
        return std::make_tuple(g.energy, g.residual, g.matvecs);
      },
      py::arg("system"), py::arg("n"), py::arg("box") = 10.0, py::arg("reduce_relative") = false,
      py::arg("tol") = 1e-9, "(energy, residual, matvecs) of one grid problem");

  m.def(
      "diagonalise",
      [](const SystemSpec& s, const DiagSpec& spec) {
        DiagOutcome o;
        {
          py::gil_scoped_release nogil;
          o = diagonalise(s, spec);
        }
        py::list pts, pade;
        for (const auto& p : o.points)
          pts.append(py::dict(py::arg("n") = p.n, py::arg("n_total") = p.n_total, py::arg("e0") = p.e0,
                              py::arg("residual") = p.residual, py::arg("matvecs") = p.matvecs));
        for (const auto& p : o.pade)
          pade.append(py::dict(py::arg("order") = p.order, py::arg("e_inf") = p.e_inf, py::arg("status") = p.status));
        py::dict out;
        out["points"] = pts;
        out["pade"] = pade;
        if (o.has_asymptote) {
          out["e_inf"] = o.e_inf;
          out["e_inf_err"] = o.e_inf_err;
        } else {
          out["e_inf"] = py::none();
          out["e_inf_err"] = py::none();
        }
        return out;
      },
      py::arg("system"), py::arg("spec"));

  m.def(
      "pade_extrapolate",
      [](std::vector<double> n, std::vector<double> e0, int order) {
        require(n.size() == e0.size(), "n and e0 differ in length");
        std::vector<ConvergencePoint> pts;
        for (std::size_t i = 0; i < n.size(); ++i) pts.push_back({n[i], e0[i]});
        return extrapolate(pts, order).asymptote;
      },
      py::arg("n"), py::arg("e0"), py::arg("order"));

  // ---- configs and the harness
  py::class_<ExperimentConfig>(m, "ExperimentConfig")
      .def_readonly("name", &ExperimentConfig::name)
      .def_readonly("hash", &ExperimentConfig::hash)
      .def_readonly("canonical", &ExperimentConfig::canonical)
      .def_readwrite("out_dir", &ExperimentConfig::out_dir)
      .def_readwrite("workers", &ExperimentConfig::workers)
      .def_property_readonly("sweep",
                             [](const ExperimentConfig& c) -> py::object {
                               if (!c.sweep) return py::none();
                               return py::make_tuple(c.sweep->name, c.sweep->values);
                             })
      .def("system", &ExperimentConfig::system, py::arg("sweep_value") = py::none())
      .def("estimator", &ExperimentConfig::estimator, py::arg("sweep_value") = py::none());

  m.def(
      "parse_config",
      [](const std::string& text, std::optional<std::uint64_t> seed) {
        ConfigOverrides ov;
        ov.seed = seed;
        return parse_config(text, "<string>", ov);
      },
      py::arg("text"), py::arg("seed") = py::none());
  m.def(
      "load_config",
      [](const std::string& path, std::optional<std::uint64_t> seed) {
        ConfigOverrides ov;
        ov.seed = seed;
        return load_config(path, ov);
      },
      py::arg("path"), py::arg("seed") = py::none());

  m.def(
      "run_experiment",
      [](const ExperimentConfig& c, bool write_files) {
        RunOptions o;
        o.write_files = write_files;
        ExperimentResult r;
        {
          py::gil_scoped_release nogil;
          r = run_experiment(c, o);
        }
        py::list rows;
        for (const auto& s : r.summary) {
          py::dict d;
          d["sweep_value"] = s.sweep_value ? py::cast(*s.sweep_value) : py::none();
          d["e0_wmc"] = s.has_wmc ? py::cast(s.e0_wmc) : py::none();
          d["e0_wmc_err"] = s.has_wmc ? py::cast(s.e0_wmc_err) : py::none();
          d["e0_diag"] = s.has_diag ? py::cast(s.e0_diag) : py::none();
          d["e0_diag_err"] = s.has_diag ? py::cast(s.e0_diag_err) : py::none();
          d["status"] = s.status;
          rows.append(d);
        }
        return py::make_tuple(rows, r.files);
      },
      py::arg("config"), py::arg("write_files") = false, "(summary rows, written files)");

  m.def(
      "verify",
      [](double omega_scale) {
        VerifySpec v;
        v.omega_scale = omega_scale;
        const auto r = verify(v);
        py::list out;
        for (const auto& c : r.checks) out.append(py::make_tuple(c.name, c.passed, c.detail));
        return out;
      },
      py::arg("omega_scale") = 0.0, "list of (name, passed, detail)");
  m.def("describe", &describe);
}
