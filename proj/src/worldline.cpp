#include "wmc/worldline.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "wmc/error.hpp"

namespace wmc {

void LoopConfig::validate() const {
  require(n_points >= 2, "n_points must be >= 2, got " + std::to_string(n_points));
  require(n_particles >= 1, "n_particles must be >= 1");
  require(dimension >= 1 && dimension <= 3, "dimension must be 1, 2 or 3");
}

UnitLoop::UnitLoop(int n_points, int dimension)
    : n_points_(n_points),
      dimension_(dimension),
      q_(static_cast<std::size_t>(dimension) * (n_points + 1), 0.0) {}

YloopTable::YloopTable(int n_points) : n_points_(n_points), a_(n_points, 0.0), b_(n_points, 0.0) {
  require(n_points >= 2, "n_points must be >= 2");
  const double np = n_points;
  for (int i = 1; i < n_points; ++i) {
    const double r = (np - i) / (np + 1 - i);
    a_[i] = std::sqrt(2.0 / np) * std::sqrt(r);
    b_[i] = r;
  }
}

YloopSource::YloopSource(int n_points, double omega_scale)
    : table_(n_points), omega_scale_(omega_scale) {}

void YloopSource::fill(const StreamKey& key, UnitLoop& out) const {
  NormalStream rng(key);
  fill_unit_loop(table_, [&rng] { return rng.next(); }, out, omega_scale_);
}

void ZeroLoopSource::fill(const StreamKey&, UnitLoop& out) const {
  for (int d = 0; d < out.dimension(); ++d) std::fill_n(out.component(d), out.stride(), 0.0);
}

UnitLoop generate_unit_loop(const LoopConfig& config, int particle_index, std::uint64_t loop_index,
                            std::uint64_t ensemble) {
  config.validate();
  require(particle_index >= 0 && particle_index < config.n_particles, "particle index out of range");
  UnitLoop loop(config.n_points, config.dimension);
  YloopSource(config.n_points)
      .fill(StreamKey{ensemble, static_cast<std::uint32_t>(particle_index), loop_index}, loop);
  return loop;
}

EnsembleStream::EnsembleStream(const LoopConfig& config)
    : EnsembleStream(config, ensemble_id(config.seed, 0, 0, 0)) {}

EnsembleStream::EnsembleStream(const LoopConfig& config, std::uint64_t ensemble)
    : config_(config), ensemble_(ensemble), table_((config.validate(), config.n_points)) {}

UnitLoopSet EnsembleStream::next() {
  UnitLoopSet set;
  set.particles.reserve(config_.n_particles);
  for (int j = 0; j < config_.n_particles; ++j) {
    UnitLoop loop(config_.n_points, config_.dimension);
    NormalStream rng(StreamKey{ensemble_, static_cast<std::uint32_t>(j), index_});
    fill_unit_loop(table_, [&rng] { return rng.next(); }, loop);
    set.particles.push_back(std::move(loop));
  }
  ++index_;
  return set;
}

EnsembleStream generate_ensemble(const LoopConfig& config) { return EnsembleStream(config); }

Worldline::Worldline(int n_points, int dimension, double T, double mass, std::vector<double> start,
                     std::vector<double> end)
    : n_points_(n_points),
      dimension_(dimension),
      time_(T),
      mass_(mass),
      start_(std::move(start)),
      end_(std::move(end)),
      x_(static_cast<std::size_t>(dimension) * (n_points + 1), 0.0) {}

void rescale_into(const UnitLoop& unit, std::span<const double> start, std::span<const double> end,
                  double mass, double T, double* out) {
  const int np = unit.n_points();
  const int stride = np + 1;
  const double s = std::sqrt(T / mass);
  const double inv = 1.0 / np;
  for (int d = 0; d < unit.dimension(); ++d) {
    const double x0 = start[d];
    const double dx = end[d] - start[d];
    const double* q = unit.component(d);
    double* x = out + static_cast<std::size_t>(d) * stride;
    for (int k = 0; k < stride; ++k) x[k] = x0 + dx * (k * inv) + s * q[k];
    x[0] = start[d];
    x[np] = end[d];
  }
}

Worldline rescale(const UnitLoop& unit, std::span<const double> start, std::span<const double> end,
                  double mass, double T) {
  require(T > 0.0, "T must be positive");
  require(mass > 0.0, "mass must be positive");
  const auto dim = static_cast<std::size_t>(unit.dimension());
  require(start.size() == dim && end.size() == dim, "endpoint dimension mismatch");
  Worldline w(unit.n_points(), unit.dimension(), T, mass, {start.begin(), start.end()},
              {end.begin(), end.end()});
  rescale_into(unit, start, end, mass, T, w.component(0));
  return w;
}

}  // namespace wmc
