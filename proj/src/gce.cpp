#include "cpn/gce.hpp"

#include <cmath>
#include <cstdio>
#include <ostream>

#include "cpn/quadrature.hpp"

namespace cpn {

void MoveMix::validate() const {
  const double probs[4] = {p_insert, p_delete, p_displace, p_recharge};
  double total = 0.0;
  for (double p : probs) {
    if (p < 0.0) throw std::invalid_argument("MoveMix: negative probability");
    total += p;
  }
  if (std::fabs(total - 1.0) > 1e-12)
    throw std::invalid_argument("MoveMix: probabilities must sum to 1");
}

void GCEConfig::validate() const {
  if (!(z > 0.0)) throw std::invalid_argument("GCEConfig: z must be > 0");
  if (lambda < 0.0) throw std::invalid_argument("GCEConfig: lambda must be >= 0");
  moves.validate();
  if (steps <= burn_in)
    throw std::invalid_argument("GCEConfig: steps must exceed burn_in");
  if (thinning == 0) throw std::invalid_argument("GCEConfig: thinning must be >= 1");
}

double GCEConfig::displacement_scale() const {
  return sigma_disp > 0.0 ? sigma_disp : 0.5 / kernel.decay_scale();
}

SamplerState init_state(const GCEConfig& config) {
  config.validate();
  return SamplerState(config.box);
}

namespace {

enum MoveIndex { kInsert = 0, kDelete = 1, kDisplace = 2, kRecharge = 3 };

// exp(-lambda dU) with the hard-wall conventions: infinite dU rejects,
// -infinite dU always accepts, lambda = 0 ignores energy entirely.
double boltzmann(double lambda, double du) {
  if (lambda == 0.0) return 1.0;
  if (std::isinf(du)) return du > 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
  return std::exp(-lambda * du);
}

}  // namespace

void mcmc_step(SamplerState& state, const GCEConfig& config, RngStream& rng) {
  const int d = config.box.dimension();
  const double volume = config.box.volume();
  const std::size_t n = state.config.size();
  const double u = rng.next_double();
  const MoveMix& mix = config.moves;

  auto resolve = [&](int kind, const Move& mv, double ratio_free) {
    double du = config.lambda == 0.0
                    ? 0.0
                    : delta_energy(state.config, config.kernel, config.potential,
                                   config.domain, mv);
    double a = ratio_free * boltzmann(config.lambda, du);
    if (a >= 1.0 || rng.next_double() < a) {
      // In-place application; apply_move would copy the whole configuration.
      switch (mv.kind) {
        case Move::Kind::Insert:
          state.config.add(mv.position, mv.charge);
          break;
        case Move::Kind::Delete:
          state.config.remove(mv.index);
          break;
        case Move::Kind::Displace:
          for (int k = 0; k < d; ++k)
            state.config.positions[mv.index * d + k] = mv.position[k];
          break;
        case Move::Kind::Recharge:
          state.config.charges[mv.index] = mv.charge;
          break;
      }
      if (config.lambda != 0.0) state.energy += du;
      ++state.accepted[kind];
    }
  };

  if (u < mix.p_insert) {
    ++state.proposed[kInsert];
    std::vector<double> y(d);
    for (int k = 0; k < d; ++k) y[k] = rng.uniform(config.box.lo[k], config.box.hi[k]);
    double s = config.law.sample(rng);
    resolve(kInsert, Move::insert(std::move(y), s),
            config.z * volume / static_cast<double>(n + 1));
  } else if (u < mix.p_insert + mix.p_delete) {
    ++state.proposed[kDelete];
    if (n > 0) {
      std::size_t j = static_cast<std::size_t>(rng.next_u64() % n);
      resolve(kDelete, Move::erase(j), static_cast<double>(n) / (config.z * volume));
    }
  } else if (u < mix.p_insert + mix.p_delete + mix.p_displace) {
    ++state.proposed[kDisplace];
    if (n > 0) {
      std::size_t j = static_cast<std::size_t>(rng.next_u64() % n);
      std::vector<double> y(d);
      const double sigma = config.displacement_scale();
      bool inside = true;
      for (int k = 0; k < d; ++k) {
        y[k] = state.config.positions[j * d + k] + sigma * rng.next_normal();
        if (y[k] < config.box.lo[k] || y[k] > config.box.hi[k]) inside = false;
      }
      // Steps out of the box are rejected (symmetric proposal into a
      // forbidden region), preserving detailed balance without wraparound.
      if (inside) resolve(kDisplace, Move::displace(j, std::move(y)), 1.0);
    }
  } else {
    ++state.proposed[kRecharge];
    if (n > 0) {
      std::size_t j = static_cast<std::size_t>(rng.next_u64() % n);
      double s = config.law.sample(rng);
      resolve(kRecharge, Move::recharge(j, s), 1.0);
    }
  }

  ++state.step;
  if (config.lambda != 0.0 && config.recompute_interval > 0 &&
      state.step % config.recompute_interval == 0) {
    double full = interaction_energy(state.config, config.kernel, config.potential,
                                     config.domain);
    double drift = std::fabs(full - state.energy);
    state.max_energy_drift = std::max(state.max_energy_drift, drift);
    if (drift > config.drift_tolerance)
      throw std::runtime_error("mcmc_step: cached energy drifted beyond tolerance");
    state.energy = full;
  }
}

Observable observable_count() {
  return Observable{
      "N",
      [](const ChargeConfiguration& c, double) { return static_cast<double>(c.size()); },
      [](std::uint64_t n) { return static_cast<double>(n); },
      true};
}

Observable observable_energy() {
  return Observable{"U", [](const ChargeConfiguration&, double u) { return u; },
                    nullptr, false};
}

ChainResult run_chain(const GCEConfig& config,
                      std::span<const Observable> observables, bool keep_samples) {
  config.validate();
  RngStream rng(config.seed, config.stream_id);
  SamplerState state = init_state(config);

  const std::uint64_t retained =
      (config.steps - config.burn_in + config.thinning - 1) / config.thinning;
  const std::uint64_t batch = std::max<std::uint64_t>(1, retained / 32);
  std::vector<EstimatorAccumulator> accs(observables.size(),
                                         EstimatorAccumulator(batch));
  ChainResult result;

  for (std::uint64_t step = 0; step < config.steps; ++step) {
    mcmc_step(state, config, rng);
    if (step < config.burn_in) continue;
    if ((step - config.burn_in) % config.thinning != 0) continue;
    for (std::size_t i = 0; i < observables.size(); ++i)
      accs[i].add(observables[i].eval(state.config, state.energy));
    if (keep_samples)
      result.samples.push_back(ThinnedSample{state.step, state.energy, state.config});
  }

  for (std::size_t i = 0; i < observables.size(); ++i) {
    auto s = accs[i].summarize();
    result.summaries.push_back(
        ObservableSummary{observables[i].name, s.mean, s.stderr_, s.count});
  }
  result.final_count = state.config.size();
  for (int k = 0; k < 4; ++k)
    result.acceptance_rate[k] =
        state.proposed[k] ? static_cast<double>(state.accepted[k]) / state.proposed[k]
                          : 0.0;
  result.max_energy_drift = state.max_energy_drift;
  return result;
}

void dump_thinned(std::ostream& os, const GCEConfig& config,
                  std::span<const ThinnedSample> samples) {
  char buf[64];
  for (const ThinnedSample& s : samples) {
    std::snprintf(buf, sizeof buf, "step %llu U %.17g\n",
                  static_cast<unsigned long long>(s.step), s.energy);
    os << buf;
    s.config.dump(os, config.z, config.law.describe(), config.seed,
                  config.stream_id);
  }
}

namespace {

// ---- exact-geometry reduction for d=2 hard spheres ----
//
// For the hard-sphere rule (unit charges, overlap iff two centers are
// closer than the ball diameter) the sector weights are no-overlap
// probabilities q_n of uniform points. Inclusion-exclusion over the pair
// events turns every integrand continuous, so tensor grids converge fast:
//   q_2 = 1 - p2,            p2  = E_y[A(y)]/V
//   q_3 = 1 - 3 p2 + 3 p22 - t3,
//   p22 = E_y[(A(y)/V)^2],   t3  = E_{y1,y2}[A12(y1,y2)]/V
// with A(y) = |B(y, D) ∩ box| and A12 = |B(y1, D) ∩ B(y2, D) ∩ box|.

// Chord [lo, hi] of a disk at height... actually along axis 0: the y-interval
// of the disk at abscissa x, clipped to [ylo, yhi]; zero when outside.
double clipped_chord(double x, double cx, double cy, double radius, double ylo,
                     double yhi) {
  double dx = x - cx;
  double q = radius * radius - dx * dx;
  if (q <= 0.0) return 0.0;
  double half = std::sqrt(q);
  return std::max(0.0, std::min(yhi, cy + half) - std::max(ylo, cy - half));
}

double disk_box_area(double cx, double cy, double radius, const Box& box) {
  double x0 = std::max(box.lo[0], cx - radius);
  double x1 = std::min(box.hi[0], cx + radius);
  if (!(x1 > x0)) return 0.0;
  auto f = [&](double x) {
    return clipped_chord(x, cx, cy, radius, box.lo[1], box.hi[1]);
  };
  return integrate_panels(f, x0, x1, 48, 8);
}

double lens_box_area(const double* y1, const double* y2, double radius,
                     const Box& box) {
  double x0 = std::max({box.lo[0], y1[0] - radius, y2[0] - radius});
  double x1 = std::min({box.hi[0], y1[0] + radius, y2[0] + radius});
  if (!(x1 > x0)) return 0.0;
  auto f = [&](double x) {
    double a_lo, a_hi, b_lo, b_hi;
    {
      double dx = x - y1[0];
      double q = radius * radius - dx * dx;
      if (q <= 0.0) return 0.0;
      double h = std::sqrt(q);
      a_lo = y1[1] - h;
      a_hi = y1[1] + h;
    }
    {
      double dx = x - y2[0];
      double q = radius * radius - dx * dx;
      if (q <= 0.0) return 0.0;
      double h = std::sqrt(q);
      b_lo = y2[1] - h;
      b_hi = y2[1] + h;
    }
    return std::max(0.0, std::min({a_hi, b_hi, box.hi[1]}) -
                             std::max({a_lo, b_lo, box.lo[1]}));
  };
  return integrate_panels(f, x0, x1, 32, 8);
}

// No-overlap probabilities q_0..q_3 on a g x g midpoint grid per particle.
std::vector<double> hard_sphere_q(const Box& box, double diameter, int g) {
  const double V = box.volume();
  const double hx = (box.hi[0] - box.lo[0]) / g;
  const double hy = (box.hi[1] - box.lo[1]) / g;
  double p2 = 0.0, p22 = 0.0;
  std::vector<double> area(static_cast<std::size_t>(g) * g);
  for (int i = 0; i < g; ++i)
    for (int j = 0; j < g; ++j) {
      double cx = box.lo[0] + (i + 0.5) * hx;
      double cy = box.lo[1] + (j + 0.5) * hy;
      double a = disk_box_area(cx, cy, diameter, box) / V;
      area[static_cast<std::size_t>(i) * g + j] = a;
      p2 += a;
      p22 += a * a;
    }
  p2 /= static_cast<double>(g) * g;
  p22 /= static_cast<double>(g) * g;

  double t3 = 0.0;
  double y1[2], y2[2];
  for (int i = 0; i < g; ++i)
    for (int j = 0; j < g; ++j) {
      y1[0] = box.lo[0] + (i + 0.5) * hx;
      y1[1] = box.lo[1] + (j + 0.5) * hy;
      for (int k = 0; k < g; ++k)
        for (int l = 0; l < g; ++l) {
          y2[0] = box.lo[0] + (k + 0.5) * hx;
          y2[1] = box.lo[1] + (l + 0.5) * hy;
          double dx = y1[0] - y2[0], dy = y1[1] - y2[1];
          if (dx * dx + dy * dy >= diameter * diameter) continue;
          t3 += lens_box_area(y1, y2, diameter, box);
        }
    }
  t3 /= std::pow(static_cast<double>(g) * g, 2.0) * V;

  return {1.0, 1.0, 1.0 - p2, 1.0 - 3.0 * p2 + 3.0 * p22 - t3};
}

}  // namespace

BruteForceResult brute_force_gce(const GCEConfig& config, int n_max,
                                 const Observable& observable, int grid_per_axis,
                                 double required_tolerance) {
  config.validate();
  if (n_max < 0 || n_max > 5)
    throw std::invalid_argument("brute_force_gce: n_max out of supported range");
  if (grid_per_axis < 2)
    throw std::invalid_argument("brute_force_gce: grid too coarse");
  if (!observable.sector_bound)
    throw std::invalid_argument("brute_force_gce: observable lacks a sector bound");
  const int d = config.box.dimension();
  const double volume = config.box.volume();
  const double zv = config.z * volume;

  // Free Poisson tail mass and bound-weighted tail beyond n_max.
  double log_pn = -zv;  // log P_0
  double partial_mass = std::exp(log_pn);
  for (int n = 1; n <= n_max; ++n) {
    log_pn += std::log(zv) - std::log(static_cast<double>(n));
    partial_mass += std::exp(log_pn);
  }
  double tail_mass = std::max(0.0, 1.0 - partial_mass);
  double tail_bound = 0.0;
  {
    double lp = log_pn;
    double add;
    int n = n_max;
    do {
      ++n;
      lp += std::log(zv) - std::log(static_cast<double>(n));
      add = std::exp(lp) * observable.sector_bound(n);
      tail_bound += add;
    } while ((add > 1e-16 * (tail_bound + 1e-300) || n < n_max + 10) && n < 10000);
  }

  // Midpoint grid over the box, one axis at a time.
  std::vector<double> nodes(static_cast<std::size_t>(grid_per_axis) * d);
  for (int k = 0; k < d; ++k) {
    double h = (config.box.hi[k] - config.box.lo[k]) / grid_per_axis;
    for (int i = 0; i < grid_per_axis; ++i)
      nodes[k * grid_per_axis + i] = config.box.lo[k] + (i + 0.5) * h;
  }

  auto law_atoms = config.law.atoms();
  double numerator = 0.0, normalization = 0.0;

  // Hard-sphere fast path (d=2): continuous inclusion-exclusion integrands
  // give the grid self-convergence the raw indicator quadrature cannot.
  bool unit_charges = law_atoms.size() == 1 && law_atoms[0].value == 1.0;
  if (config.box.dimension() == 2 && n_max <= 3 && unit_charges &&
      config.lambda > 0.0 && observable.sector_constant &&
      config.kernel.kind() == RadialKernel::Kind::Indicator &&
      config.potential.kind == PotentialSpec::Kind::HardWall &&
      config.potential.threshold > 1.0 && config.potential.threshold <= 2.0) {
    std::vector<double> q = hard_sphere_q(
        config.box, 2.0 * config.kernel.indicator_radius(), grid_per_axis);
    double pref = std::exp(-zv);
    for (int n = 0; n <= n_max; ++n) {
      if (n > 0) pref *= zv / n;
      ChargeConfiguration probe{config.box};
      for (int j = 0; j < n; ++j) {
        double y[2] = {config.box.lo[0] + (config.box.hi[0] - config.box.lo[0]) *
                                              (j + 1.0) / (n + 1.0),
                       config.box.lo[1] + (config.box.hi[1] - config.box.lo[1]) *
                                              (j + 1.0) / (n + 1.0)};
        probe.add({y, 2}, 1.0);
      }
      double value = observable.eval(probe, 0.0);
      numerator += pref * q[n] * value;
      normalization += pref * q[n];
    }
    double expectation = numerator / normalization;
    double upper = (numerator + tail_bound) / normalization;
    double lower = numerator / (normalization + tail_mass);
    double bound = std::max(upper - expectation, expectation - lower);
    if (bound > required_tolerance)
      throw BruteForceError("brute_force_gce: truncation bound exceeds tolerance",
                            bound);
    return BruteForceResult{expectation, bound};
  }

  for (int n = 0; n <= n_max; ++n) {
    // Everything in the probability scale of the reference measure:
    // P_n = e^{-zV}(zV)^n/n!, sector values as uniform-position averages.
    double pref = std::exp(-zv);
    for (int j = 1; j <= n; ++j) pref *= zv / j;

    if (n == 0) {
      ChargeConfiguration empty{config.box};
      numerator += pref * observable.eval(empty, 0.0);
      normalization += pref;
      continue;
    }

    // All position-grid and charge combinations for the n-particle sector.
    const std::size_t pos_states = static_cast<std::size_t>(
        std::pow(static_cast<double>(grid_per_axis), n * d));
    const std::size_t charge_states =
        static_cast<std::size_t>(std::pow(static_cast<double>(law_atoms.size()), n));
    std::vector<int> pidx(n * d, 0);
    ChargeConfiguration eta{config.box};
    std::vector<double> y(d);
    for (int j = 0; j < n; ++j) {
      for (int k = 0; k < d; ++k) y[k] = nodes[k * grid_per_axis];
      eta.add(y, law_atoms[0].value);
    }
    double sector_num = 0.0, sector_norm = 0.0;
    for (std::size_t ps = 0; ps < pos_states; ++ps) {
      for (int j = 0; j < n; ++j)
        for (int k = 0; k < d; ++k)
          eta.positions[j * d + k] =
              nodes[k * grid_per_axis + pidx[j * d + k]];

      std::vector<std::size_t> cidx(n, 0);
      for (std::size_t cs = 0; cs < charge_states; ++cs) {
        double pcharge = 1.0;
        for (int j = 0; j < n; ++j) {
          eta.charges[j] = law_atoms[cidx[j]].value;
          pcharge *= law_atoms[cidx[j]].prob;
        }
        double uval = config.lambda == 0.0
                          ? 0.0
                          : interaction_energy(eta, config.kernel, config.potential,
                                               config.domain);
        double weight = boltzmann(config.lambda, uval);
        if (weight > 0.0) {
          sector_norm += pcharge * weight;
          sector_num += pcharge * weight * observable.eval(eta, uval);
        }
        for (int j = n - 1; j >= 0; --j) {
          if (++cidx[j] < law_atoms.size()) break;
          cidx[j] = 0;
        }
      }
      for (int t = n * d - 1; t >= 0; --t) {
        if (++pidx[t] < grid_per_axis) break;
        pidx[t] = 0;
      }
    }
    // Average over position nodes: (cell/volume)^n = 1/pos_states.
    numerator += pref * sector_num / static_cast<double>(pos_states);
    normalization += pref * sector_norm / static_cast<double>(pos_states);
  }

  double expectation = numerator / normalization;
  // Enclosure from the free-gas tails: e^{-lambda U} <= 1 termwise.
  double upper = (numerator + tail_bound) / normalization;
  double lower = numerator / (normalization + tail_mass);
  double bound = std::max(upper - expectation, expectation - lower);
  if (bound > required_tolerance)
    throw BruteForceError("brute_force_gce: truncation bound exceeds tolerance",
                          bound);
  return BruteForceResult{expectation, bound};
}

}  // namespace cpn
