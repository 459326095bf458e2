#include "wmc/config.hpp"

#include <yaml-cpp/yaml.h>

#include <cmath>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

#include <json.hpp>

#include "wmc/error.hpp"

namespace wmc {

std::uint64_t fnv1a64(const std::string& bytes) noexcept {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

namespace {

using Vars = std::map<std::string, double>;

[[noreturn]] void config_error(const YAML::Node& node, const std::string& path, const std::string& what) {
  std::ostringstream msg;
  msg << path << ": " << what;
  if (node.IsDefined() && node.Mark().line >= 0) msg << " (line " << node.Mark().line + 1 << ")";
  fail(ErrorKind::ConfigError, msg.str());
}

std::optional<double> parse_double(const std::string& s) {
  if (s == "inf" || s == ".inf" || s == "+inf" || s == "Inf") return std::numeric_limits<double>::infinity();
  if (s == "-inf" || s == "-.inf" || s == "-Inf") return -std::numeric_limits<double>::infinity();
  if (s.empty()) return std::nullopt;
  std::size_t used = 0;
  try {
    const double v = std::stod(s, &used);
    if (used != s.size()) return std::nullopt;
    return v;
  } catch (...) {
    return std::nullopt;
  }
}

// Reads typed values out of YAML with placeholder substitution and a dotted
// path for diagnostics.
struct Reader {
  const Vars* vars = nullptr;
  bool allow_unbound = false;  // true while only checking structure

  double number(const YAML::Node& n, const std::string& path) const {
    if (!n.IsScalar()) config_error(n, path, "expected a number");
    std::string s = n.Scalar();
    double sign = 1.0;
    if (s.size() > 1 && s[0] == '-' && s[1] == '$') {
      sign = -1.0;
      s = s.substr(1);
    }
    if (!s.empty() && s[0] == '$') {
      const std::string name = s.substr(1);
      if (vars) {
        auto it = vars->find(name);
        if (it != vars->end()) return sign * it->second;
      }
      if (allow_unbound) return sign * 1.0;
      config_error(n, path, "placeholder $" + name + " is not bound by the sweep block");
    }
    auto v = parse_double(s);
    if (!v) config_error(n, path, "expected a number, got '" + n.Scalar() + "'");
    return *v;
  }

  double number_or(const YAML::Node& parent, const char* key, double fallback, const std::string& path) const {
    const auto n = parent[key];
    if (!n) return fallback;
    return number(n, path + "." + key);
  }

  double required(const YAML::Node& parent, const char* key, const std::string& path) const {
    const auto n = parent[key];
    if (!n) config_error(parent, path, std::string("missing field '") + key + "'");
    return number(n, path + "." + key);
  }

  long long integer(const YAML::Node& n, const std::string& path) const {
    const double v = number(n, path);
    if (!(std::abs(v) < 9.0e15) || v != std::floor(v)) config_error(n, path, "expected an integer");
    return static_cast<long long>(v);
  }

  std::vector<double> numbers(const YAML::Node& n, const std::string& path) const {
    std::vector<double> out;
    if (n.IsScalar()) {
      out.push_back(number(n, path));
      return out;
    }
    if (!n.IsSequence()) config_error(n, path, "expected a list of numbers");
    for (std::size_t i = 0; i < n.size(); ++i) out.push_back(number(n[i], path + "[" + std::to_string(i) + "]"));
    return out;
  }

  bool boolean(const YAML::Node& n, const std::string& path) const {
    if (!n.IsScalar()) config_error(n, path, "expected true or false");
    const auto& s = n.Scalar();
    if (s == "true" || s == "on" || s == "yes") return true;
    if (s == "false" || s == "off" || s == "no") return false;
    config_error(n, path, "expected true or false, got '" + s + "'");
  }

  std::string text(const YAML::Node& n, const std::string& path) const {
    if (!n.IsScalar()) config_error(n, path, "expected a string");
    return n.Scalar();
  }
};

void check_keys(const YAML::Node& n, const std::string& path, const std::set<std::string>& allowed) {
  if (!n.IsMap()) config_error(n, path, "expected a mapping");
  for (const auto& kv : n) {
    const auto key = kv.first.Scalar();
    if (!allowed.count(key)) config_error(kv.first, path, "unknown key '" + key + "'");
  }
}

std::vector<double> range_values(const Reader& r, const YAML::Node& n, const std::string& path) {
  check_keys(n, path, {"min", "max", "step"});
  const double lo = r.required(n, "min", path), hi = r.required(n, "max", path), step = r.required(n, "step", path);
  if (!(step > 0.0) || hi < lo) config_error(n, path, "range needs step > 0 and max >= min");
  std::vector<double> v;
  const long long count = static_cast<long long>(std::floor((hi - lo) / step + 1e-9)) + 1;
  if (count > 100000) config_error(n, path, "range has too many values");
  // Values are computed from the index so they do not drift.
  for (long long i = 0; i < count; ++i) v.push_back(lo + static_cast<double>(i) * step);
  return v;
}

TermShape parse_shape(const Reader& r, const YAML::Node& n, const std::string& type, const std::string& path,
                      int dimension) {
  auto sign_of = [&](const YAML::Node& node) {
    const double s = r.number_or(node, "sign", 1.0, path);
    if (s != 1.0 && s != -1.0) config_error(node["sign"], path + ".sign", "sign must be +1 or -1");
    return static_cast<int>(s);
  };
  auto vec_or = [&](const char* key, double fill) {
    if (!n[key]) return std::vector<double>(dimension, fill);
    auto v = r.numbers(n[key], path + "." + key);
    if (static_cast<int>(v.size()) != dimension)
      config_error(n[key], path + "." + key, "needs " + std::to_string(dimension) + " entries");
    return v;
  };
  if (type == "harmonic") {
    check_keys(n, path, {"type", "particles", "label", "mu", "omega", "offset"});
    return Harmonic{r.required(n, "mu", path), r.required(n, "omega", path), r.number_or(n, "offset", 0.0, path)};
  }
  if (type == "soft_coulomb") {
    check_keys(n, path, {"type", "particles", "label", "alpha", "softening", "sign"});
    return SoftCoulomb{r.required(n, "alpha", path), r.required(n, "softening", path), sign_of(n)};
  }
  if (type == "bare_coulomb") {
    check_keys(n, path, {"type", "particles", "label", "alpha", "sign"});
    return BareCoulomb{r.required(n, "alpha", path), sign_of(n)};
  }
  if (type == "erfc") {
    check_keys(n, path, {"type", "particles", "label", "length", "sign"});
    return ErfcEffective{r.required(n, "length", path), sign_of(n)};
  }
  if (type == "square_well") {
    check_keys(n, path, {"type", "particles", "label", "depth", "half_widths", "center"});
    if (!n["half_widths"]) config_error(n, path, "missing field 'half_widths'");
    return SquareWell{r.required(n, "depth", path), vec_or("half_widths", 0.0), vec_or("center", 0.0)};
  }
  if (type == "gaussian_well") {
    check_keys(n, path, {"type", "particles", "label", "depth", "lambda", "center"});
    return GaussianWell{r.required(n, "depth", path), r.required(n, "lambda", path), vec_or("center", 0.0)};
  }
  config_error(n["type"], path + ".type", "unknown potential type '" + type + "'");
}

struct Preset {
  PotentialSpec potential;
  std::vector<std::vector<double>> endpoints;  // per particle start = end
};

Preset parse_preset(const Reader& r, const YAML::Node& sys, const std::string& name, int dimension,
                    const std::vector<double>& masses) {
  const std::string path = "system";
  auto num = [&](const char* key, double fallback) { return r.number_or(sys, key, fallback, path); };
  auto req = [&](const char* key) { return r.required(sys, key, path); };
  Preset p;
  auto origin = [&](int n) { p.endpoints.assign(n, std::vector<double>(dimension, 0.0)); };
  try {
    if (name == "harmonic_pair") {
      const double mu = masses.size() == 2 ? masses[0] * masses[1] / (masses[0] + masses[1]) : 0.5;
      p.potential = make_harmonic_pair(num("mu", mu), num("omega", 1.0), num("d", 0.0), dimension);
      origin(2);
    } else if (name == "soft_coulomb_pair") {
      p.potential = make_soft_coulomb_pair(num("alpha", 1.0), req("d"), dimension);
      origin(2);
    } else if (name == "bare_coulomb_pair") {
      p.potential = make_bare_coulomb_pair(num("alpha", 1.0), dimension);
      origin(2);
    } else if (name == "exciton_square_well") {
      const double lx = req("Lx");
      p.potential = make_exciton_sqwell(req("Ve"), req("Vh"), lx, num("Ly", lx), num("alpha", 1.0), req("d"),
                                        dimension);
      origin(2);
    } else if (name == "exciton_gaussian") {
      p.potential = make_exciton_gaussian(req("Ve"), req("Vh"), req("lambda_e"), req("lambda_h"),
                                          num("alpha", 1.0), req("d"), dimension);
      origin(2);
    } else if (name == "trion_soft") {
      if (dimension != 1) config_error(sys["dimension"], "system.dimension", "trion presets are 1D");
      p.potential = make_trion_soft(num("alpha", 1.0), req("d"));
      origin(3);
    } else if (name == "trion_erfc") {
      if (dimension != 1) config_error(sys["dimension"], "system.dimension", "trion presets are 1D");
      p.potential = make_trion_erfc(req("d"));
      origin(3);
    } else if (name == "exciton_3d_confined") {
      if (dimension != 3) config_error(sys["dimension"], "system.dimension", "exciton_3d_confined is 3D");
      const double d = req("d");
      p.potential = make_3d_confined_exciton(num("alpha", 1.0), req("Ve"), req("Vh"), req("Lz"), d);
      p.endpoints = {{0.0, 0.0, -d / 2}, {0.0, 0.0, d / 2}};
    } else {
      config_error(sys["preset"], "system.preset", "unknown preset '" + name + "'");
    }
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::ConfigError) throw;
    config_error(sys["preset"], "system.preset", e.what());
  }
  return p;
}

const std::set<std::string> kPresetKeys = {"mu", "omega", "d", "alpha", "Ve", "Vh", "Lx", "Ly", "Lz",
                                           "lambda_e", "lambda_h"};

SystemSpec parse_system(const Reader& r, const YAML::Node& sys) {
  const std::string path = "system";
  std::set<std::string> allowed = {"dimension", "particles", "potential", "preset", "masses", "tag"};
  if (sys["preset"]) allowed.insert(kPresetKeys.begin(), kPresetKeys.end());
  check_keys(sys, path, allowed);
  SystemSpec s;
  if (!sys["dimension"]) config_error(sys, path, "missing field 'dimension'");
  s.dimension = static_cast<int>(r.integer(sys["dimension"], "system.dimension"));
  if (s.dimension < 1 || s.dimension > 3) config_error(sys["dimension"], "system.dimension", "must be 1, 2 or 3");
  if (sys["tag"]) s.tag = r.text(sys["tag"], "system.tag");

  std::vector<double> masses;
  if (sys["masses"]) masses = r.numbers(sys["masses"], "system.masses");

  std::optional<Preset> preset;
  if (sys["preset"]) preset = parse_preset(r, sys, r.text(sys["preset"], "system.preset"), s.dimension, masses);

  const auto parts = sys["particles"];
  int n = 0;
  if (parts) {
    if (!parts.IsSequence() || parts.size() == 0) config_error(parts, "system.particles", "expected a list");
    n = static_cast<int>(parts.size());
  } else if (preset) {
    n = static_cast<int>(preset->endpoints.size());
  } else if (!masses.empty()) {
    n = static_cast<int>(masses.size());
  } else {
    config_error(sys, path, "missing field 'particles'");
  }
  if (preset && static_cast<int>(preset->endpoints.size()) != n)
    config_error(parts, "system.particles", "preset defines " + std::to_string(preset->endpoints.size()) +
                                                " particles");
  if (!masses.empty() && static_cast<int>(masses.size()) != n)
    config_error(sys["masses"], "system.masses", "needs one mass per particle");

  for (int j = 0; j < n; ++j) {
    Particle p;
    p.mass = masses.empty() ? 1.0 : masses[j];
    p.start = preset ? preset->endpoints[j] : std::vector<double>(s.dimension, 0.0);
    p.end = p.start;
    if (parts) {
      const auto pj = parts[j];
      const std::string pp = "system.particles[" + std::to_string(j) + "]";
      check_keys(pj, pp, {"name", "mass", "start", "end"});
      p.mass = r.number_or(pj, "mass", p.mass, pp);
      if (pj["start"]) p.start = r.numbers(pj["start"], pp + ".start");
      p.end = pj["end"] ? r.numbers(pj["end"], pp + ".end") : p.start;
      if (static_cast<int>(p.start.size()) != s.dimension || static_cast<int>(p.end.size()) != s.dimension)
        config_error(pj, pp, "endpoints need " + std::to_string(s.dimension) + " coordinates");
    }
    if (!(p.mass > 0.0)) config_error(parts ? parts[j] : sys, path, "masses must be positive");
    s.particles.push_back(std::move(p));
  }

  s.potential = preset ? preset->potential : PotentialSpec(n, s.dimension);
  if (const auto terms = sys["potential"]) {
    if (!terms.IsSequence()) config_error(terms, "system.potential", "expected a list of terms");
    for (std::size_t i = 0; i < terms.size(); ++i) {
      const auto t = terms[i];
      std::string tp = "system.potential[" + std::to_string(i) + "]";
      if (!t.IsMap() || !t["type"]) config_error(t, tp, "term needs a 'type'");
      const std::string type = r.text(t["type"], tp + ".type");
      tp += " (" + type + ")";
      PotentialTerm term;
      term.shape = parse_shape(r, t, type, tp, s.dimension);
      if (!t["particles"]) config_error(t, tp, "missing field 'particles'");
      for (double v : r.numbers(t["particles"], tp + ".particles")) {
        if (v != std::floor(v)) config_error(t["particles"], tp + ".particles", "particle indices are integers");
        term.particles.push_back(static_cast<int>(v));
      }
      if (t["label"]) term.label = r.text(t["label"], tp + ".label");
      try {
        s.potential.add(std::move(term));
      } catch (const Error& e) {
        config_error(t, tp, e.what());
      }
    }
  }
  try {
    s.validate();
  } catch (const Error& e) {
    config_error(sys, path, e.what());
  }
  return s;
}

EstimatorConfig parse_wmc(const Reader& r, const YAML::Node& w) {
  const std::string path = "wmc";
  check_keys(w, path,
             {"loops", "flat_samples", "points", "repetitions", "t_grid", "t_range", "sum_mode", "smoothing", "seed",
              "common_streams", "combine"});
  EstimatorConfig c;
  if (w["loops"]) c.loops = r.integer(w["loops"], "wmc.loops");
  if (w["flat_samples"]) c.flat_samples = r.integer(w["flat_samples"], "wmc.flat_samples");
  if (w["points"]) c.n_points = static_cast<int>(r.integer(w["points"], "wmc.points"));
  if (w["repetitions"]) c.repetitions = static_cast<int>(r.integer(w["repetitions"], "wmc.repetitions"));
  if (w["t_grid"] && w["t_range"]) config_error(w, path, "give either t_grid or t_range, not both");
  if (w["t_grid"]) c.t_grid = r.numbers(w["t_grid"], "wmc.t_grid");
  if (w["t_range"]) c.t_grid = range_values(r, w["t_range"], "wmc.t_range");
  if (c.t_grid.empty()) config_error(w, path, "missing field 't_grid' or 't_range'");
  if (w["sum_mode"]) {
    const auto m = r.text(w["sum_mode"], "wmc.sum_mode");
    if (m == "nested") c.sum_mode = SumMode::Nested;
    else if (m == "flat") c.sum_mode = SumMode::Flat;
    else config_error(w["sum_mode"], "wmc.sum_mode", "expected nested or flat");
  }
  if (w["smoothing"]) c.smoothing = r.boolean(w["smoothing"], "wmc.smoothing");
  if (w["seed"]) {
    const auto& s = w["seed"].Scalar();
    try {
      std::size_t used = 0;
      c.seed = std::stoull(s, &used, 0);
      if (used != s.size()) throw std::invalid_argument(s);
    } catch (...) {
      config_error(w["seed"], "wmc.seed", "expected an unsigned integer");
    }
  }
  if (w["common_streams"]) c.common_streams = r.boolean(w["common_streams"], "wmc.common_streams");
  if (w["combine"]) {
    const auto m = r.text(w["combine"], "wmc.combine");
    if (m == "inverse_variance") c.combine = RepetitionCombine::InverseVariance;
    else if (m == "pooled") c.combine = RepetitionCombine::Pooled;
    else config_error(w["combine"], "wmc.combine", "expected inverse_variance or pooled");
  }
  try {
    c.validate();
  } catch (const Error& e) {
    config_error(w, path, e.what());
  }
  return c;
}

FitSpec parse_fit(const Reader& r, const YAML::Node& f) {
  check_keys(f, "fit", {"form", "window", "span", "min_span", "min_points", "scaling", "fixed_b", "max_condition"});
  FitSpec s;
  if (f["form"]) {
    const auto m = r.text(f["form"], "fit.form");
    if (m == "linear") s.form = FitForm::Linear;
    else if (m == "linear_plus_log") s.form = FitForm::LinearPlusLog;
    else config_error(f["form"], "fit.form", "expected linear or linear_plus_log");
  }
  if (f["window"] && !(f["window"].IsScalar() && f["window"].Scalar() == "auto")) {
    const auto v = r.numbers(f["window"], "fit.window");
    if (v.size() != 2 || !(v[0] < v[1])) config_error(f["window"], "fit.window", "expected [t_min, t_max]");
    s.window = FitWindow{v[0], v[1]};
  }
  s.window_search.span = r.number_or(f, "span", s.window_search.span, "fit");
  s.window_search.min_span = r.number_or(f, "min_span", s.window_search.min_span, "fit");
  if (f["min_points"]) s.window_search.min_points = static_cast<int>(r.integer(f["min_points"], "fit.min_points"));
  if (f["scaling"]) {
    const auto m = r.text(f["scaling"], "fit.scaling");
    if (m == "residual") s.options.scaling = ErrorScaling::ResidualScaled;
    else if (m == "absolute") s.options.scaling = ErrorScaling::Absolute;
    else config_error(f["scaling"], "fit.scaling", "expected residual or absolute");
  }
  if (f["fixed_b"]) s.options.fixed_b = r.number(f["fixed_b"], "fit.fixed_b");
  s.options.max_condition = r.number_or(f, "max_condition", s.options.max_condition, "fit");
  s.window_search.form = s.form;
  s.window_search.fit = s.options;
  return s;
}

DiagSpec parse_diag(const Reader& r, const YAML::Node& d) {
  check_keys(d, "diag", {"n", "box", "tolerance", "max_iter", "reduce", "pade_orders", "krylov"});
  DiagSpec s;
  if (!d["n"]) config_error(d, "diag", "missing field 'n'");
  if (d["n"].IsMap()) {
    for (double v : range_values(r, d["n"], "diag.n")) s.n.push_back(static_cast<int>(std::lround(v)));
  } else {
    for (double v : r.numbers(d["n"], "diag.n")) {
      if (v != std::floor(v) || v < 3) config_error(d["n"], "diag.n", "grid sizes are integers >= 3");
      s.n.push_back(static_cast<int>(v));
    }
  }
  s.box = r.number_or(d, "box", s.box, "diag");
  s.tolerance = r.number_or(d, "tolerance", s.tolerance, "diag");
  if (d["max_iter"]) s.max_iter = static_cast<int>(r.integer(d["max_iter"], "diag.max_iter"));
  if (d["krylov"]) s.krylov = static_cast<int>(r.integer(d["krylov"], "diag.krylov"));
  if (d["reduce"]) {
    const auto m = r.text(d["reduce"], "diag.reduce");
    if (m == "relative") s.reduce_relative = true;
    else if (m == "none") s.reduce_relative = false;
    else config_error(d["reduce"], "diag.reduce", "expected none or relative");
  }
  if (d["pade_orders"]) {
    s.pade_orders.clear();
    for (double v : r.numbers(d["pade_orders"], "diag.pade_orders")) {
      if (v != 2 && v != 3 && v != 4) config_error(d["pade_orders"], "diag.pade_orders", "orders are 2, 3 or 4");
      s.pade_orders.push_back(static_cast<int>(v));
    }
  }
  if (!(s.box > 0.0)) config_error(d, "diag.box", "must be positive");
  if (!(s.tolerance > 0.0)) config_error(d, "diag.tolerance", "must be positive");
  return s;
}

BenchmarkSpec parse_benchmark(const Reader& r, const YAML::Node& b) {
  check_keys(b, "benchmark", {"samples", "dimensions", "points", "t", "repeats", "diag_n", "diag_dimension",
                              "diag_reduce", "diag_box", "diag_tolerance"});
  BenchmarkSpec s;
  if (b["samples"])
    for (double v : r.numbers(b["samples"], "benchmark.samples")) {
      if (!(v >= 1)) config_error(b["samples"], "benchmark.samples", "sample counts must be >= 1");
      s.samples.push_back(static_cast<long long>(std::llround(v)));
    }
  if (b["dimensions"]) {
    s.dimensions.clear();
    for (double v : r.numbers(b["dimensions"], "benchmark.dimensions")) s.dimensions.push_back(static_cast<int>(v));
  }
  if (b["points"]) s.n_points = static_cast<int>(r.integer(b["points"], "benchmark.points"));
  s.t = r.number_or(b, "t", s.t, "benchmark");
  if (b["repeats"]) s.repeats = static_cast<int>(r.integer(b["repeats"], "benchmark.repeats"));
  if (b["diag_n"])
    for (double v : r.numbers(b["diag_n"], "benchmark.diag_n")) s.diag_n.push_back(static_cast<int>(v));
  if (b["diag_dimension"]) s.diag_dimension = static_cast<int>(r.integer(b["diag_dimension"], "benchmark.diag_dimension"));
  if (b["diag_reduce"]) s.diag_reduce_relative = r.text(b["diag_reduce"], "benchmark.diag_reduce") == "relative";
  s.diag_box = r.number_or(b, "diag_box", s.diag_box, "benchmark");
  s.diag_tolerance = r.number_or(b, "diag_tolerance", s.diag_tolerance, "benchmark");
  if (s.samples.empty() && s.diag_n.empty()) config_error(b, "benchmark", "list samples and/or diag_n");
  if (s.repeats < 1) config_error(b, "benchmark.repeats", "must be >= 1");
  return s;
}

nlohmann::json to_json(const YAML::Node& n) {
  switch (n.Type()) {
    case YAML::NodeType::Map: {
      nlohmann::json j = nlohmann::json::object();
      for (const auto& kv : n) j[kv.first.Scalar()] = to_json(kv.second);
      return j;
    }
    case YAML::NodeType::Sequence: {
      nlohmann::json j = nlohmann::json::array();
      for (const auto& v : n) j.push_back(to_json(v));
      return j;
    }
    case YAML::NodeType::Scalar: {
      const auto& s = n.Scalar();
      if (n.Tag() == "!") return s;  // quoted
      if (s == "true") return true;
      if (s == "false") return false;
      if (auto v = parse_double(s); v && std::isfinite(*v)) return *v;
      return s;
    }
    default:
      return nullptr;
  }
}

}  // namespace

SystemSpec ExperimentConfig::system(std::optional<double> sweep_value) const {
  if (!has_system) fail(ErrorKind::ConfigError, "config has no system block");
  Vars vars;
  if (sweep && sweep_value) vars[sweep->name] = *sweep_value;
  Reader r{&vars, false};
  return parse_system(r, YAML::Load(document)["system"]);
}

EstimatorConfig ExperimentConfig::estimator(std::optional<double> sweep_value) const {
  if (!has_wmc) fail(ErrorKind::ConfigError, "config has no wmc block");
  Vars vars;
  if (sweep && sweep_value) vars[sweep->name] = *sweep_value;
  Reader r{&vars, false};
  auto c = parse_wmc(r, YAML::Load(document)["wmc"]);
  if (seed_override) c.seed = *seed_override;
  c.workers = workers;
  return c;
}

ExperimentConfig parse_config(const std::string& text, const std::string& origin, const ConfigOverrides& ov) {
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::Exception& e) {
    std::ostringstream msg;
    msg << origin << ": YAML syntax error at line " << e.mark.line + 1 << ", column " << e.mark.column + 1 << ": "
        << e.msg;
    fail(ErrorKind::ConfigError, msg.str());
  }
  if (!root.IsMap()) fail(ErrorKind::ConfigError, origin + ": top level must be a mapping");
  check_keys(root, "config",
             {"name", "system", "wmc", "fit", "diag", "sweep", "benchmark", "verify", "output", "workers"});

  // Overrides go into the hashed document; the blocks themselves are re-read
  // from the original text so error marks keep their line numbers.
  if (ov.seed && root["wmc"]) root["wmc"]["seed"] = std::to_string(*ov.seed);
  if (ov.workers) root["workers"] = *ov.workers;
  if (ov.out_dir) {
    if (!root["output"]) root["output"] = YAML::Node(YAML::NodeType::Map);
    root["output"]["dir"] = *ov.out_dir;
  }

  ExperimentConfig cfg;
  cfg.source = origin;
  const Reader probe{nullptr, true};
  if (root["name"]) cfg.name = probe.text(root["name"], "name");
  if (root["workers"]) {
    cfg.workers = static_cast<int>(probe.integer(root["workers"], "workers"));
    if (cfg.workers < 1) config_error(root["workers"], "workers", "must be >= 1");
  }
  if (const auto o = root["output"]) {
    check_keys(o, "output", {"dir"});
    if (o["dir"]) cfg.out_dir = probe.text(o["dir"], "output.dir");
  }
  if (const auto s = root["sweep"]) {
    check_keys(s, "sweep", {"name", "values", "range"});
    SweepSpec sw;
    if (!s["name"]) config_error(s, "sweep", "missing field 'name'");
    sw.name = probe.text(s["name"], "sweep.name");
    if (s["values"] && s["range"]) config_error(s, "sweep", "give either values or range");
    if (s["values"]) sw.values = probe.numbers(s["values"], "sweep.values");
    if (s["range"]) sw.values = range_values(probe, s["range"], "sweep.range");
    if (!sw.values.empty()) cfg.sweep = std::move(sw);
  }
  cfg.has_system = static_cast<bool>(root["system"]);
  cfg.has_wmc = static_cast<bool>(root["wmc"]);
  if (root["fit"]) cfg.fit = parse_fit(probe, root["fit"]);
  if (root["diag"]) cfg.diag = parse_diag(probe, root["diag"]);
  if (root["benchmark"]) cfg.benchmark = parse_benchmark(probe, root["benchmark"]);
  if (const auto v = root["verify"]) {
    check_keys(v, "verify", {"omega_scale", "covariance_loops", "smoothing_pairs"});
    cfg.verify.omega_scale = probe.number_or(v, "omega_scale", 0.0, "verify");
    if (v["covariance_loops"]) cfg.verify.covariance_loops = static_cast<int>(probe.integer(v["covariance_loops"], "verify.covariance_loops"));
    if (v["smoothing_pairs"]) cfg.verify.smoothing_pairs = static_cast<int>(probe.integer(v["smoothing_pairs"], "verify.smoothing_pairs"));
  }
  if ((cfg.has_wmc || cfg.diag) && !cfg.has_system) config_error(root, "config", "wmc and diag blocks need a system block");
  if (!cfg.has_wmc && !cfg.diag && !cfg.benchmark && !root["verify"])
    config_error(root, "config", "needs at least one of the wmc, diag, benchmark or verify blocks");
  cfg.document = text;
  cfg.seed_override = ov.seed;

  // Bind every sweep value once so errors surface before any run starts.
  std::vector<std::optional<double>> points;
  if (cfg.sweep)
    for (double v : cfg.sweep->values) points.emplace_back(v);
  else
    points.emplace_back(std::nullopt);
  for (const auto& p : points) {
    if (cfg.has_system) cfg.system(p);
    if (cfg.has_wmc) cfg.estimator(p);
  }

  cfg.canonical = to_json(root).dump();
  cfg.hash = fnv1a64(cfg.canonical);
  return cfg;
}

ExperimentConfig load_config(const std::string& path, const ConfigOverrides& overrides) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::ConfigError, "cannot open config file '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str(), path, overrides);
}

}  // namespace wmc
