#include "wmc/estimator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "wmc/accumulator.hpp"
#include "wmc/action.hpp"
#include "wmc/error.hpp"
#include "wmc/parallel.hpp"

namespace wmc {

void SystemSpec::validate() const {
  require(dimension >= 1 && dimension <= 3, "dimension must be 1, 2 or 3");
  require(!particles.empty(), "system needs at least one particle");
  const auto d = static_cast<std::size_t>(dimension);
  for (std::size_t j = 0; j < particles.size(); ++j) {
    const auto& p = particles[j];
    const std::string who = "particle " + std::to_string(j);
    require(p.mass > 0.0, who + ": mass must be positive");
    require(p.start.size() == d && p.end.size() == d, who + ": endpoints need one value per dimension");
  }
  require(potential.n_particles() == n_particles() || potential.empty(),
          "potential particle count does not match the system");
  require(potential.dimension() == dimension || potential.empty(), "potential dimension does not match the system");
}

void EstimatorConfig::validate() const {
  require(loops >= 1, "N_L must be >= 1");
  require(n_points >= 2, "N_p must be >= 2");
  require(repetitions >= 1, "repetitions must be >= 1");
  require(flat_samples >= 0, "flat_samples must be >= 0");
  for (std::size_t i = 0; i < t_grid.size(); ++i) {
    require(t_grid[i] > 0.0, "T grid must be strictly positive");
    if (i > 0) require(t_grid[i] > t_grid[i - 1], "T grid must be strictly increasing");
  }
}

long long EstimatorConfig::samples(int n_particles) const {
  if (sum_mode == SumMode::Flat && flat_samples > 0) return flat_samples;
  long double total = 1;
  for (int j = 0; j < n_particles; ++j) total *= static_cast<long double>(loops);
  require(total < 9e18L, "N_L^n overflows the sample counter");
  return static_cast<long long>(total);
}

double log_free_kernel(double mass, int dimension, std::span<const double> x, std::span<const double> x_end,
                       double T) {
  require(T > 0.0 && mass > 0.0, "free kernel needs T > 0 and m > 0");
  require(x.size() == static_cast<std::size_t>(dimension) && x_end.size() == x.size(),
          "free kernel endpoint dimension mismatch");
  double r2 = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) r2 += (x_end[k] - x[k]) * (x_end[k] - x[k]);
  return 0.5 * dimension * std::log(mass / (2.0 * std::numbers::pi * T)) - mass * r2 / (2.0 * T);
}

double free_kernel(double mass, int dimension, std::span<const double> x, std::span<const double> x_end, double T) {
  return std::exp(log_free_kernel(mass, dimension, x, x_end, T));
}

double wilson_line(std::span<const Worldline> worldlines, const PotentialSpec& potential, double T, int n_points,
                   bool smoothing) {
  if (potential.empty()) return 1.0;
  require(worldlines.size() == static_cast<std::size_t>(potential.n_particles()),
          "one worldline per particle is required");
  std::vector<const double*> ptrs;
  for (const auto& w : worldlines) {
    require(w.n_points() == n_points && w.dimension() == potential.dimension(), "worldline shape mismatch");
    ptrs.push_back(w.component(0));
  }
  ActionEvaluator ev(potential, n_points, smoothing);
  return std::exp(-(T / n_points) * ev.total(ptrs, nullptr));
}

namespace {

constexpr long long kRowsPerChunk = 8;
constexpr long long kFlatChunk = 2048;
constexpr long long kLoopsPerChunk = 16;

std::uint64_t ensemble_for(const EstimatorConfig& cfg, double T, int rep) {
  return ensemble_id(cfg.seed, cfg.sweep_key, cfg.common_streams ? 0 : bits_of(T), static_cast<std::uint64_t>(rep));
}

struct ChunkAcc {
  WilsonSums sums;
  std::vector<std::vector<double>> marg;  // per particle, per loop index (Nested only)
  long long flagged = 0;

  void rebase(double new_shift) {
    const double f = sums.rebase(new_shift);
    if (f != 0.0 && f != 1.0)
      for (auto& m : marg)
        for (double& v : m) v *= f;
  }

  // e: exponents of one block; the last particle's index runs over the block.
  void add_block(const double* e, long long count, const long long* prefix) {
    if (count == 0) return;
    double mx = -std::numeric_limits<double>::infinity();
    for (long long i = 0; i < count; ++i) mx = std::max(mx, e[i]);
    if (sums.needs_shift(mx)) rebase(mx);
    const double s = sums.shift;
    double block = 0.0;
    double* last = marg.empty() ? nullptr : marg.back().data();
    for (long long i = 0; i < count; ++i) {
      const double w = std::exp(e[i] - s);
      sums.add_scaled(w);
      block += w;
      if (last) last[i] += w;
    }
    for (std::size_t j = 0; j + 1 < marg.size(); ++j) marg[j][prefix[j]] += block;
  }

  void merge(ChunkAcc& o) {
    flagged += o.flagged;
    if (o.sums.count == 0) return;
    if (sums.count == 0) {
      sums = o.sums;
      marg.swap(o.marg);
      return;
    }
    const double target = std::max(sums.shift, o.sums.shift);
    rebase(target);
    o.rebase(target);
    sums.w.merge(o.sums.w);
    sums.w2.merge(o.sums.w2);
    sums.count += o.sums.count;
    for (std::size_t j = 0; j < marg.size(); ++j)
      for (std::size_t i = 0; i < marg[j].size(); ++i) marg[j][i] += o.marg[j][i];
  }
};

RepetitionEstimate finish(const ChunkAcc& acc, long long nl, bool crossed) {
  RepetitionEstimate r;
  r.n_samples = acc.sums.count;
  r.n_flagged = acc.flagged;
  const double n = static_cast<double>(acc.sums.count);
  const double s = acc.sums.w.value();
  const double s2 = acc.sums.w2.value();
  const double mean = s / n;
  if (!(mean > 0.0) || !std::isfinite(mean) || !std::isfinite(s2)) return r;
  const double var_iid = n > 1 ? std::max(0.0, (s2 - s * mean) / (n * (n - 1))) : 0.0;
  double var = var_iid;
  if (crossed && nl > 1) {
    const double per_index = n / static_cast<double>(nl);
    double ve = 0.0;
    for (const auto& m : acc.marg) {
      double mu = 0.0;
      for (double v : m) mu += v / per_index;
      mu /= static_cast<double>(nl);
      double ss = 0.0;
      for (double v : m) ss += (v / per_index - mu) * (v / per_index - mu);
      ve += ss / static_cast<double>(nl - 1) / static_cast<double>(nl);
    }
    var = std::max(var, ve);
  }
  r.log_wilson_mean = acc.sums.shift + std::log(mean);
  r.rel_sem = std::sqrt(var) / mean;
  r.rel_sem_iid = std::sqrt(var_iid) / mean;
  r.valid = true;
  return r;
}

// Worldlines of all loops of one particle for one repetition.
struct ParticleLoops {
  std::vector<double> x;
  std::vector<double> ext;  // sum of external terms along each loop
  std::size_t per_loop = 0;
  const double* loop(long long i) const { return x.data() + static_cast<std::size_t>(i) * per_loop; }
};

std::vector<ParticleLoops> build_loops(const SystemSpec& sys, const EstimatorConfig& cfg, double T,
                                       std::uint64_t ens, const LoopSource& source, const ActionEvaluator* ev) {
  const int np = cfg.n_points;
  const long long nl = cfg.loops;
  std::vector<ParticleLoops> out(sys.n_particles());
  for (int j = 0; j < sys.n_particles(); ++j) {
    auto& pl = out[j];
    pl.per_loop = static_cast<std::size_t>(sys.dimension) * (np + 1);
    pl.x.assign(pl.per_loop * nl, 0.0);
    const bool ext = ev && ev->has_external(j);
    pl.ext.assign(nl, 0.0);
    const auto& p = sys.particles[j];
    const std::size_t chunks = static_cast<std::size_t>((nl + kLoopsPerChunk - 1) / kLoopsPerChunk);
    parallel_for(chunks, cfg.workers, [&](std::size_t c) {
      UnitLoop unit(np, sys.dimension);
      const long long i1 = std::min<long long>(nl, (c + 1) * kLoopsPerChunk);
      for (long long i = c * kLoopsPerChunk; i < i1; ++i) {
        source.fill(StreamKey{ens, static_cast<std::uint32_t>(j), static_cast<std::uint64_t>(i)}, unit);
        double* dst = pl.x.data() + static_cast<std::size_t>(i) * pl.per_loop;
        rescale_into(unit, p.start, p.end, p.mass, T, dst);
        if (ext) pl.ext[i] = ev->external_sum(j, dst);
      }
    });
  }
  return out;
}

RepetitionEstimate run_nested(const SystemSpec& sys, const EstimatorConfig& cfg, double T, std::uint64_t ens,
                              const LoopSource& source, const ActionEvaluator& ev) {
  const int n = sys.n_particles();
  const long long nl = cfg.loops;
  const double scale = -T / cfg.n_points;
  const auto loops = build_loops(sys, cfg, T, ens, source, &ev);
  const auto& groups = ev.groups();

  // Pair tables for n >= 3: every pair of loops is evaluated once.
  std::vector<std::vector<double>> table(groups.size());
  long long table_flags = 0;
  if (n >= 3) {
    for (std::size_t g = 0; g < groups.size(); ++g) {
      table[g].assign(static_cast<std::size_t>(nl * nl), 0.0);
      std::vector<long long> flags(nl, 0);
      parallel_for(static_cast<std::size_t>(nl), cfg.workers, [&](std::size_t ia) {
        const double* xa = loops[groups[g].a].loop(ia);
        for (long long ib = 0; ib < nl; ++ib)
          table[g][ia * nl + ib] = ev.group_sum(g, xa, loops[groups[g].b].loop(ib), &flags[ia]);
      });
      for (long long f : flags) table_flags += f;
    }
  }

  const long long outer = n == 1 ? 1 : nl;
  const long long rows = n == 1 ? 1 : kRowsPerChunk;
  const std::size_t chunks = static_cast<std::size_t>((outer + rows - 1) / rows);
  std::vector<ChunkAcc> acc(chunks);

  parallel_for(chunks, cfg.workers, [&](std::size_t c) {
    ChunkAcc& a = acc[c];
    a.marg.assign(n, std::vector<double>(nl, 0.0));
    std::vector<double> e(nl);
    std::vector<long long> idx(n, 0);
    if (n == 1) {
      for (long long i = 0; i < nl; ++i) e[i] = scale * loops[0].ext[i];
      a.add_block(e.data(), nl, idx.data());
      return;
    }
    const long long r1 = std::min<long long>(nl, (static_cast<long long>(c) + 1) * rows);
    for (long long i0 = static_cast<long long>(c) * rows; i0 < r1; ++i0) {
      if (n == 2) {
        const double* x0 = loops[0].loop(i0);
        const double base = loops[0].ext[i0];
        for (long long i1 = 0; i1 < nl; ++i1) {
          double s = base + loops[1].ext[i1];
          const double* x1 = loops[1].loop(i1);
          for (std::size_t g = 0; g < groups.size(); ++g) s += ev.group_sum(g, x0, x1, &a.flagged);
          e[i1] = scale * s;
        }
        idx[0] = i0;
        a.add_block(e.data(), nl, idx.data());
        continue;
      }
      // n >= 3: odometer over the middle indices, block over the last one.
      idx.assign(n, 0);
      idx[0] = i0;
      for (;;) {
        double base = 0.0;
        for (int j = 0; j + 1 < n; ++j) base += loops[j].ext[idx[j]];
        for (std::size_t g = 0; g < groups.size(); ++g)
          if (groups[g].b < n - 1) base += table[g][idx[groups[g].a] * nl + idx[groups[g].b]];
        for (long long il = 0; il < nl; ++il) {
          double s = base + loops[n - 1].ext[il];
          for (std::size_t g = 0; g < groups.size(); ++g)
            if (groups[g].b == n - 1) s += table[g][idx[groups[g].a] * nl + il];
          e[il] = scale * s;
        }
        a.add_block(e.data(), nl, idx.data());
        int j = n - 2;
        while (j >= 1 && ++idx[j] == nl) idx[j--] = 0;
        if (j < 1) break;
      }
    }
  });

  ChunkAcc total;
  total.marg.assign(n, std::vector<double>(nl, 0.0));
  for (auto& a : acc) total.merge(a);
  total.flagged += table_flags;
  return finish(total, nl, true);
}

RepetitionEstimate run_flat(const SystemSpec& sys, const EstimatorConfig& cfg, double T, std::uint64_t ens,
                            const LoopSource& source, const ActionEvaluator& ev) {
  const int n = sys.n_particles();
  const int np = cfg.n_points;
  const long long total_samples = cfg.samples(n);
  const double scale = -T / np;
  const std::size_t per = static_cast<std::size_t>(sys.dimension) * (np + 1);
  const std::size_t chunks = static_cast<std::size_t>((total_samples + kFlatChunk - 1) / kFlatChunk);
  std::vector<ChunkAcc> acc(chunks);

  parallel_for(chunks, cfg.workers, [&](std::size_t c) {
    ChunkAcc& a = acc[c];
    const long long t0 = static_cast<long long>(c) * kFlatChunk;
    const long long t1 = std::min(total_samples, t0 + kFlatChunk);
    std::vector<double> e(t1 - t0);
    UnitLoop unit(np, sys.dimension);
    std::vector<double> buf(per * n);
    std::vector<const double*> ptr(n);
    for (int j = 0; j < n; ++j) ptr[j] = buf.data() + per * j;
    for (long long t = t0; t < t1; ++t) {
      for (int j = 0; j < n; ++j) {
        source.fill(StreamKey{ens, static_cast<std::uint32_t>(j), static_cast<std::uint64_t>(t)}, unit);
        rescale_into(unit, sys.particles[j].start, sys.particles[j].end, sys.particles[j].mass, T,
                     buf.data() + per * j);
      }
      e[t - t0] = scale * ev.total(ptr, &a.flagged);
    }
    a.add_block(e.data(), t1 - t0, nullptr);
  });

  ChunkAcc total;
  for (auto& a : acc) total.merge(a);
  return finish(total, cfg.loops, false);
}

PropagatorEstimate combine(std::vector<RepetitionEstimate> reps, RepetitionCombine how, double T, double ln_free) {
  PropagatorEstimate est;
  est.t = T;
  est.ln_free = ln_free;
  est.n_repetitions = static_cast<int>(reps.size());
  std::vector<const RepetitionEstimate*> ok;
  for (const auto& r : reps) {
    est.n_samples += r.n_samples;
    est.n_flagged += r.n_flagged;
    if (r.valid)
      ok.push_back(&r);
    else
      ++est.n_excluded;
  }
  const double nan = std::numeric_limits<double>::quiet_NaN();
  double lw = nan, err = nan, err_iid = nan;
  if (!ok.empty()) {
    if (how == RepetitionCombine::Pooled) {
      double top = -std::numeric_limits<double>::infinity();
      for (const auto* r : ok) top = std::max(top, r->log_wilson_mean);
      double m = 0.0, v = 0.0, vi = 0.0;
      for (const auto* r : ok) {
        const double w = std::exp(r->log_wilson_mean - top);
        m += w;
        v += (w * r->rel_sem) * (w * r->rel_sem);
        vi += (w * r->rel_sem_iid) * (w * r->rel_sem_iid);
      }
      const double k = static_cast<double>(ok.size());
      lw = top + std::log(m / k);
      err = std::sqrt(v) / m;
      err_iid = std::sqrt(vi) / m;
    } else {
      std::vector<const RepetitionEstimate*> exact;
      for (const auto* r : ok)
        if (r->rel_sem == 0.0) exact.push_back(r);
      if (!exact.empty()) {
        lw = 0.0;
        for (const auto* r : exact) lw += r->log_wilson_mean;
        lw /= static_cast<double>(exact.size());
        err = 0.0;
        err_iid = 0.0;
      } else {
        double sw = 0.0, swl = 0.0, swi = 0.0;
        for (const auto* r : ok) {
          const double w = 1.0 / (r->rel_sem * r->rel_sem);
          sw += w;
          swl += w * r->log_wilson_mean;
          if (r->rel_sem_iid > 0.0) swi += 1.0 / (r->rel_sem_iid * r->rel_sem_iid);
        }
        lw = swl / sw;
        err = 1.0 / std::sqrt(sw);
        err_iid = swi > 0.0 ? 1.0 / std::sqrt(swi) : 0.0;
      }
    }
    est.valid = true;
  }
  est.log_wilson_mean = lw;
  est.wilson_mean = std::exp(lw);
  est.ln_kernel_err = err;
  est.wilson_sem = est.wilson_mean * err;
  est.wilson_sem_iid = est.wilson_mean * err_iid;
  est.ln_kernel = ln_free + lw;
  est.kernel = std::exp(est.ln_kernel);
  est.repetitions = std::move(reps);
  return est;
}

double total_log_free(const SystemSpec& sys, double T) {
  double s = 0.0;
  for (const auto& p : sys.particles) s += log_free_kernel(p.mass, sys.dimension, p.start, p.end, T);
  return s;
}

}  // namespace

PropagatorEstimate estimate_propagator(const SystemSpec& system, const EstimatorConfig& cfg, double T,
                                       const LoopSource& source) {
  system.validate();
  cfg.validate();
  require(T > 0.0, "T must be positive");
  const double ln_free = total_log_free(system, T);
  const PotentialSpec& pot = system.potential.empty() ? PotentialSpec(system.n_particles(), system.dimension)
                                                       : system.potential;
  const ActionEvaluator ev(pot, cfg.n_points, cfg.smoothing);
  std::vector<RepetitionEstimate> reps;
  reps.reserve(cfg.repetitions);
  for (int r = 0; r < cfg.repetitions; ++r) {
    const std::uint64_t ens = ensemble_for(cfg, T, r);
    reps.push_back(cfg.sum_mode == SumMode::Nested ? run_nested(system, cfg, T, ens, source, ev)
                                                   : run_flat(system, cfg, T, ens, source, ev));
  }
  return combine(std::move(reps), cfg.combine, T, ln_free);
}

PropagatorEstimate estimate_propagator(const SystemSpec& system, const EstimatorConfig& cfg, double T) {
  return estimate_propagator(system, cfg, T, YloopSource(cfg.n_points));
}

std::vector<PropagatorEstimate> estimate_series(const SystemSpec& system, const EstimatorConfig& cfg) {
  const YloopSource source(cfg.n_points);
  std::vector<PropagatorEstimate> out;
  out.reserve(cfg.t_grid.size());
  for (double T : cfg.t_grid) out.push_back(estimate_propagator(system, cfg, T, source));
  return out;
}

double reweighted_expectation(const Observable& observable, const SystemSpec& system, const EstimatorConfig& cfg,
                              double T, const LoopSource& source) {
  system.validate();
  cfg.validate();
  require(T > 0.0, "T must be positive");
  const int n = system.n_particles();
  const int np = cfg.n_points;
  const PotentialSpec pot = system.potential.empty() ? PotentialSpec(n, system.dimension) : system.potential;
  const ActionEvaluator ev(pot, np, cfg.smoothing);
  const long long total = cfg.samples(n);
  const double scale = -T / np;
  const std::size_t per = static_cast<std::size_t>(system.dimension) * (np + 1);

  struct Part {
    double shift = -std::numeric_limits<double>::infinity();
    CompensatedSum w, ow;
  };
  Part all;
  auto fold = [](Part& into, Part& from) {
    if (std::isinf(from.shift)) return;
    if (std::isinf(into.shift)) {
      into = from;
      return;
    }
    const double target = std::max(into.shift, from.shift);
    const double fi = std::exp(into.shift - target), ff = std::exp(from.shift - target);
    into.w.scale(fi);
    into.ow.scale(fi);
    from.w.scale(ff);
    from.ow.scale(ff);
    into.w.merge(from.w);
    into.ow.merge(from.ow);
    into.shift = target;
  };

  for (int r = 0; r < cfg.repetitions; ++r) {
    const std::uint64_t ens = ensemble_for(cfg, T, r);
    std::vector<ParticleLoops> loops;
    if (cfg.sum_mode == SumMode::Nested) loops = build_loops(system, cfg, T, ens, source, nullptr);
    const std::size_t chunks = static_cast<std::size_t>((total + kFlatChunk - 1) / kFlatChunk);
    std::vector<Part> parts(chunks);
    parallel_for(chunks, cfg.workers, [&](std::size_t c) {
      const long long t0 = static_cast<long long>(c) * kFlatChunk;
      const long long t1 = std::min(total, t0 + kFlatChunk);
      std::vector<double> e(t1 - t0), o(t1 - t0);
      UnitLoop unit(np, system.dimension);
      std::vector<double> buf(per * n);
      std::vector<const double*> ptr(n);
      for (long long t = t0; t < t1; ++t) {
        if (cfg.sum_mode == SumMode::Nested) {
          long long rest = t;
          for (int j = n - 1; j >= 0; --j) {
            ptr[j] = loops[j].loop(rest % cfg.loops);
            rest /= cfg.loops;
          }
        } else {
          for (int j = 0; j < n; ++j) {
            source.fill(StreamKey{ens, static_cast<std::uint32_t>(j), static_cast<std::uint64_t>(t)}, unit);
            const auto& p = system.particles[j];
            rescale_into(unit, p.start, p.end, p.mass, T, buf.data() + per * j);
            ptr[j] = buf.data() + per * j;
          }
        }
        e[t - t0] = scale * ev.total(ptr, nullptr);
        o[t - t0] = observable(PathView{ptr, np, system.dimension, T});
      }
      Part& p = parts[c];
      p.shift = *std::max_element(e.begin(), e.end());
      for (std::size_t i = 0; i < e.size(); ++i) {
        const double w = std::exp(e[i] - p.shift);
        p.w.add(w);
        p.ow.add(o[i] * w);
      }
    });
    for (auto& p : parts) fold(all, p);
  }
  const double den = all.w.value();
  if (!(den > 0.0) || !std::isfinite(den)) fail(ErrorKind::NonPositiveMean, "Wilson-line mean is not positive");
  return all.ow.value() / den;
}

double reweighted_expectation(const Observable& observable, const SystemSpec& system, const EstimatorConfig& cfg,
                              double T) {
  return reweighted_expectation(observable, system, cfg, T, YloopSource(cfg.n_points));
}

}  // namespace wmc
