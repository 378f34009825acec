// Energy densities v, the interaction energy U(eta) = int v(K*eta) dx,
// incremental energies for Monte Carlo moves, and the renormalized
// sine-Gordon normalizer N(z).
#pragma once

#include <limits>
#include <span>
#include <vector>

#include "cpn/field.hpp"
#include "cpn/noise.hpp"

namespace cpn {

struct PotentialSpec {
  enum class Kind { Trigonometric, RenormalizedCosine, HardWall, Trigger, Quadratic };

  struct TrigTerm {
    double weight;
    double frequency;  // nonzero
  };

  /// v(phi) = sum_k w_k (cos(a_k phi) - 1); v(0) = 0 by construction.
  static PotentialSpec trigonometric(std::vector<TrigTerm> terms);
  /// v(phi) = (cos(a phi) - 1) / N. Stored with the same additive-constant
  /// convention as the plain cosine so v(0) = 0 and the full-space integral
  /// converges; the constant shift cancels in the normalized Gibbs measure.
  static PotentialSpec renormalized_cosine(double alpha, double normalizer);
  /// v = 0 below the threshold, +infinity at or above it.
  static PotentialSpec hard_wall(double threshold);
  /// v = 0 below the level, 1 at or above it.
  static PotentialSpec trigger(double level);
  /// v(phi) = phi^2; only valid with mollified or indicator kernels.
  static PotentialSpec quadratic();

  Kind kind;
  std::vector<TrigTerm> terms;  // Trigonometric
  double alpha = 0.0;           // RenormalizedCosine
  double normalizer = 1.0;      // RenormalizedCosine
  double threshold = 0.0;       // HardWall / Trigger

  bool bounded() const;
  /// sup |v| for bounded variants (2 sum|w| for trigonometric).
  double value_bound() const;
  /// Largest oscillation frequency of v (0 for the non-trigonometric kinds);
  /// drives phase-aware quadrature refinement.
  double max_frequency() const;
};

double potential_value(const PotentialSpec& spec, double phi);

/// Integration domain and cubature controls for U. The padded box always
/// contains the particle box.
struct InteractionDomain {
  double pad_lengths = 10.0;  // padding in units of 1/decay_scale
  double base_h = 0.0;        // base cell size; 0 = min(0.1, eps/2 scaled)/m
  int gl_order = 4;           // per-cell tensor Gauss-Legendre order
  int max_depth = 12;         // recursive refinement depth cap
  double phase_fraction = 0.125;  // cell diag <= fraction of local wavelength

  Box padded_box(const Box& particle_box, const RadialKernel& kernel) const;
};

/// U(eta) = int v((K*eta)(x)) dx over the padded domain. Returns +infinity
/// for hard-wall overlap. Permutation invariant exactly (particles are
/// canonically ordered before summation); cell contributions are pairwise
/// summed in a fixed order.
double interaction_energy(const ChargeConfiguration& eta, const RadialKernel& kernel,
                          const PotentialSpec& spec, const InteractionDomain& domain);

/// Same integral with the hard-wall/indicator shortcut disabled, so the
/// grid threshold rule itself can be exercised against the pairwise rule.
double interaction_energy_quadrature(const ChargeConfiguration& eta,
                                     const RadialKernel& kernel,
                                     const PotentialSpec& spec,
                                     const InteractionDomain& domain);

struct Move {
  enum class Kind { Insert, Delete, Displace, Recharge };
  Kind kind;
  std::size_t index = 0;         // Delete / Displace / Recharge
  std::vector<double> position;  // Insert / Displace
  double charge = 0.0;           // Insert / Recharge

  static Move insert(std::vector<double> y, double s);
  static Move erase(std::size_t index);
  static Move displace(std::size_t index, std::vector<double> y);
  static Move recharge(std::size_t index, double s);
};

/// U(eta') - U(eta) for the move, integrated over a local subdomain around
/// the affected particles (the rest cancels up to the exponential tail).
/// May return +-infinity for hard walls.
double delta_energy(const ChargeConfiguration& eta, const RadialKernel& kernel,
                    const PotentialSpec& spec, const InteractionDomain& domain,
                    const Move& move);

/// Applies the move to a configuration.
ChargeConfiguration apply_move(const ChargeConfiguration& eta, const Move& move);

/// True when U reduces to the pairwise rule "+inf iff two centers closer
/// than twice the indicator radius": indicator kernel, hard wall with
/// 1 < threshold <= 2, all charges equal to 1.
bool hard_sphere_rule_applies(const ChargeConfiguration& eta,
                              const RadialKernel& kernel, const PotentialSpec& spec);

/// int_0^inf sum_k w_k (cos(f_k G(rho)) - 1) rho^{d-1} drho with phase-
/// resolved panels down to rho_min (the oscillatory remainder below rho_min
/// is kept as its exact mean, with an integration-by-parts error bound well
/// under 1e-9). resolution < 1 tightens every step proportionally.
double radial_trig_energy(const KernelParams& params,
                          std::span<const PotentialSpec::TrigTerm> terms,
                          double resolution = 1.0);

/// N(z) = E[cos(alpha phi_0^z(0))]
///      = exp( z int sum_s p_s (cos(alpha s G(u)/sqrt z) - 1) du ) in (0, 1].
/// Requires a symmetric law. alpha = 0 returns 1 (degenerate, for tests).
double renorm_normalizer(double z, double alpha, const ChargeLaw& law,
                         const KernelParams& kernel, double resolution = 1.0);

}  // namespace cpn
