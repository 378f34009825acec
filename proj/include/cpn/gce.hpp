// Grand-canonical Metropolis sampler for the finite-volume Gibbs measure
// exp(-lambda U(eta)) relative to the marked Poisson reference, plus a
// brute-force low-occupancy expansion oracle.
#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "cpn/potential.hpp"
#include "cpn/stats.hpp"

namespace cpn {

struct MoveMix {
  double p_insert = 0.3;
  double p_delete = 0.3;
  double p_displace = 0.3;
  double p_recharge = 0.1;

  void validate() const;
};

struct GCEConfig {
  Box box;
  double z;        // activity, > 0
  double lambda;   // coupling, >= 0; 0 skips all energy evaluation
  ChargeLaw law;
  RadialKernel kernel;
  PotentialSpec potential;
  InteractionDomain domain;
  MoveMix moves;
  double sigma_disp = 0.0;  // displacement scale; 0 -> 0.5/decay_scale
  std::uint64_t steps = 0;
  std::uint64_t burn_in = 0;
  std::uint64_t thinning = 1;
  std::uint64_t seed = 0;
  std::uint64_t stream_id = 0;
  // Cached-energy resync cadence and allowed drift per resync.
  std::uint64_t recompute_interval = 10000;
  double drift_tolerance = 1e-4;

  void validate() const;
  double displacement_scale() const;
};

struct SamplerState {
  ChargeConfiguration config;
  double energy = 0.0;  // cached U of config
  std::uint64_t step = 0;
  std::uint64_t proposed[4] = {0, 0, 0, 0};  // insert, delete, displace, recharge
  std::uint64_t accepted[4] = {0, 0, 0, 0};
  double max_energy_drift = 0.0;  // worst |cache - recompute| seen

  explicit SamplerState(Box box) : config(std::move(box)) {}
};

SamplerState init_state(const GCEConfig& config);

/// One Metropolis proposal/acceptance. Acceptance ratios w.r.t. the marked
/// Poisson reference: insert min(1, zV/(n+1) e^{-l dU}), delete
/// min(1, n/(zV) e^{-l dU}), displace/recharge min(1, e^{-l dU}).
/// Infinite dU rejects (lambda > 0). Every recompute_interval steps the
/// cached energy is resynced against a full recomputation; drift beyond
/// drift_tolerance throws.
void mcmc_step(SamplerState& state, const GCEConfig& config, RngStream& rng);

struct Observable {
  std::string name;
  std::function<double(const ChargeConfiguration&, double energy)> eval;
  // Bound on |O| over the n-particle sector; brute_force_gce needs it for
  // the truncation estimate.
  std::function<double(std::uint64_t n)> sector_bound;
  // True when O depends only on the particle count; enables the exact
  // hard-sphere reduction inside brute_force_gce.
  bool sector_constant = false;
};

Observable observable_count();
Observable observable_energy();

struct ObservableSummary {
  std::string name;
  double mean;
  double stderr_;
  std::uint64_t count;
};

struct ThinnedSample {
  std::uint64_t step;
  double energy;
  ChargeConfiguration config;
};

struct ChainResult {
  std::vector<ObservableSummary> summaries;
  std::vector<ThinnedSample> samples;  // only when keep_samples
  std::uint64_t final_count = 0;
  double acceptance_rate[4] = {0, 0, 0, 0};
  double max_energy_drift = 0.0;
};

/// Burn-in, then sampling with thinning; deterministic in (seed, stream_id).
ChainResult run_chain(const GCEConfig& config,
                      std::span<const Observable> observables,
                      bool keep_samples = false);

/// Thinned-sample stream in the configuration dump format, each record
/// prefixed by "step <k> U <energy>".
void dump_thinned(std::ostream& os, const GCEConfig& config,
                  std::span<const ThinnedSample> samples);

struct BruteForceResult {
  double expectation;
  double truncation_bound;  // rigorous enclosure half-width from free tails
};

struct BruteForceError : std::runtime_error {
  double tail_bound;
  BruteForceError(const std::string& what, double bound)
      : std::runtime_error(what), tail_bound(bound) {}
};

/// Truncated grand-canonical expansion
///   E[O] ~ sum_{n<=n_max} z^n/n! sum_charges prod p int_{box^n} O e^{-l U}
/// with tensor midpoint position grids (grid_per_axis nodes per axis per
/// particle). Throws BruteForceError when the free-tail bound beyond n_max
/// exceeds required_tolerance.
BruteForceResult brute_force_gce(const GCEConfig& config, int n_max,
                                 const Observable& observable, int grid_per_axis,
                                 double required_tolerance);

}  // namespace cpn
