#include "cpn/potential.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "cpn/quadrature.hpp"
#include "cpn/stats.hpp"

namespace cpn {

// ------------------------------------------------------------ PotentialSpec

PotentialSpec PotentialSpec::trigonometric(std::vector<TrigTerm> terms) {
  if (terms.empty()) throw std::invalid_argument("trigonometric: no terms");
  for (const TrigTerm& t : terms)
    if (t.frequency == 0.0)
      throw std::invalid_argument("trigonometric: frequencies must be nonzero");
  PotentialSpec s;
  s.kind = Kind::Trigonometric;
  s.terms = std::move(terms);
  return s;
}

PotentialSpec PotentialSpec::renormalized_cosine(double alpha, double normalizer) {
  if (alpha == 0.0)
    throw std::invalid_argument("renormalized_cosine: alpha must be nonzero");
  if (!(normalizer > 0.0))
    throw std::invalid_argument("renormalized_cosine: normalizer must be > 0");
  PotentialSpec s;
  s.kind = Kind::RenormalizedCosine;
  s.alpha = alpha;
  s.normalizer = normalizer;
  return s;
}

PotentialSpec PotentialSpec::hard_wall(double threshold) {
  if (!(threshold > 0.0))
    throw std::invalid_argument("hard_wall: threshold must be > 0");
  PotentialSpec s;
  s.kind = Kind::HardWall;
  s.threshold = threshold;
  return s;
}

PotentialSpec PotentialSpec::trigger(double level) {
  if (!(level > 0.0)) throw std::invalid_argument("trigger: level must be > 0");
  PotentialSpec s;
  s.kind = Kind::Trigger;
  s.threshold = level;
  return s;
}

PotentialSpec PotentialSpec::quadratic() {
  PotentialSpec s;
  s.kind = Kind::Quadratic;
  return s;
}

bool PotentialSpec::bounded() const {
  return kind == Kind::Trigonometric || kind == Kind::RenormalizedCosine ||
         kind == Kind::Trigger;
}

double PotentialSpec::value_bound() const {
  switch (kind) {
    case Kind::Trigonometric: {
      double b = 0.0;
      for (const TrigTerm& t : terms) b += 2.0 * std::fabs(t.weight);
      return b;
    }
    case Kind::RenormalizedCosine:
      return 2.0 / normalizer;
    case Kind::Trigger:
      return 1.0;
    default:
      return std::numeric_limits<double>::infinity();
  }
}

double PotentialSpec::max_frequency() const {
  switch (kind) {
    case Kind::Trigonometric: {
      double f = 0.0;
      for (const TrigTerm& t : terms) f = std::max(f, std::fabs(t.frequency));
      return f;
    }
    case Kind::RenormalizedCosine:
      return std::fabs(alpha);
    default:
      return 0.0;
  }
}

double potential_value(const PotentialSpec& spec, double phi) {
  switch (spec.kind) {
    case PotentialSpec::Kind::Trigonometric: {
      double v = 0.0;
      for (const PotentialSpec::TrigTerm& t : spec.terms)
        v += t.weight * (std::cos(t.frequency * phi) - 1.0);
      return v;
    }
    case PotentialSpec::Kind::RenormalizedCosine:
      return (std::cos(spec.alpha * phi) - 1.0) / spec.normalizer;
    case PotentialSpec::Kind::HardWall:
      return phi < spec.threshold ? 0.0 : std::numeric_limits<double>::infinity();
    case PotentialSpec::Kind::Trigger:
      return phi < spec.threshold ? 0.0 : 1.0;
    case PotentialSpec::Kind::Quadratic:
      return phi * phi;
  }
  return 0.0;
}

// ------------------------------------------------------------ cubature engine

Box InteractionDomain::padded_box(const Box& particle_box,
                                  const RadialKernel& kernel) const {
  return particle_box.padded(pad_lengths / kernel.decay_scale());
}

namespace {

struct Engine {
  const RadialKernel* kernel;
  const PotentialSpec* spec;
  int d;
  std::vector<double> pos;      // canonical (lexicographic) particle order
  std::vector<double> charges;
  int gl_order;
  int max_depth;
  double phase_fraction;
  double phase_bound;  // max_frequency * max|charge|
  bool infinite = false;
  std::vector<double> parts;  // per-cell contributions, deterministic order

  double field_at(const double* x) const {
    double acc = 0.0;
    const double* p = pos.data();
    const std::size_t n = charges.size();
    for (std::size_t j = 0; j < n; ++j, p += d) {
      double q = 0.0;
      for (int k = 0; k < d; ++k) {
        double dx = x[k] - p[k];
        q += dx * dx;
      }
      acc += charges[j] * kernel->evaluate(std::sqrt(q));
    }
    return acc;
  }

  // Distance from the cell center to the nearest particle.
  double min_center_distance(const double* c) const {
    double best = std::numeric_limits<double>::infinity();
    const double* p = pos.data();
    for (std::size_t j = 0; j < charges.size(); ++j, p += d) {
      double q = 0.0;
      for (int k = 0; k < d; ++k) {
        double dx = c[k] - p[k];
        q += dx * dx;
      }
      best = std::min(best, q);
    }
    return std::sqrt(best);
  }

  double kernel_slope(double r) const {
    if (kernel->kind() == RadialKernel::Kind::Green)
      return std::fabs(green_derivative(*kernel->params(), r));
    if (kernel->kind() == RadialKernel::Kind::Mollified) {
      double h = 1e-3 / kernel->decay_scale();
      return std::fabs(kernel->evaluate(r + h) - kernel->evaluate(std::fabs(r - h))) /
             (2.0 * h);
    }
    return 0.0;
  }

  bool indicator_shell_near(const double* c, double diag) const {
    const double radius = kernel->indicator_radius();
    const double* p = pos.data();
    for (std::size_t j = 0; j < charges.size(); ++j, p += d) {
      double q = 0.0;
      for (int k = 0; k < d; ++k) {
        double dx = c[k] - p[k];
        q += dx * dx;
      }
      if (std::fabs(std::sqrt(q) - radius) <= 0.75 * diag) return true;
    }
    return false;
  }

  void integrate_cell(const double* lo, const double* hi, int depth) {
    if (infinite) return;
    double diag = 0.0, center[8];
    for (int k = 0; k < d; ++k) {
      double w = hi[k] - lo[k];
      diag += w * w;
      center[k] = 0.5 * (lo[k] + hi[k]);
    }
    diag = std::sqrt(diag);

    bool split = false;
    if (depth < max_depth && !charges.empty()) {
      double r = min_center_distance(center);
      if (r < diag) {
        split = true;  // cell hugs a particle
      } else if (phase_bound > 0.0 &&
                 kernel->kind() != RadialKernel::Kind::Indicator) {
        // Resolve the local oscillation wavelength of v(K*eta).
        double slope = kernel_slope(std::max(r - 0.5 * diag, 1e-300));
        if (slope > 0.0) {
          double wavelength = 2.0 * M_PI / (phase_bound * slope);
          if (diag > phase_fraction * wavelength) split = true;
        }
      }
      if (!split && kernel->kind() == RadialKernel::Kind::Indicator &&
          indicator_shell_near(center, diag))
        split = true;
    }

    if (!split) {
      // Tensor GL nodes; value-driven refinement for the step potentials.
      const GlRule& rule = gl_rule(gl_order);
      const int order = gl_order;
      std::size_t total = 1;
      for (int k = 0; k < d; ++k) total *= order;
      double acc = 0.0;
      bool any_inf = false, any_finite_zero = false, any_positive = false;
      std::vector<std::size_t> idx(d, 0);
      double x[8];
      for (std::size_t i = 0; i < total; ++i) {
        double w = 1.0;
        for (int k = 0; k < d; ++k) {
          double half = 0.5 * (hi[k] - lo[k]);
          x[k] = 0.5 * (lo[k] + hi[k]) + half * rule.nodes[idx[k]];
          w *= half * rule.weights[idx[k]];
        }
        double v = potential_value(*spec, field_at(x));
        if (std::isinf(v)) {
          any_inf = true;
        } else {
          if (spec->kind == PotentialSpec::Kind::Trigger)
            (v > 0.5 ? any_positive : any_finite_zero) = true;
          acc += w * v;
        }
        for (int k = d - 1; k >= 0; --k) {
          if (++idx[k] < static_cast<std::size_t>(order)) break;
          idx[k] = 0;
        }
      }
      bool mixed_step =
          (spec->kind == PotentialSpec::Kind::Trigger && any_positive &&
           any_finite_zero) ||
          (spec->kind == PotentialSpec::Kind::HardWall && any_inf);
      if (mixed_step && depth < max_depth) {
        split = true;  // straddles a discontinuity; zoom in
      } else if (any_inf) {
        // At the depth cap any forbidden node marks positive measure.
        infinite = true;
        return;
      } else {
        parts.push_back(acc);
        return;
      }
    }

    // Split into 2^d children in fixed order.
    double clo[8], chi[8];
    const int children = 1 << d;
    for (int c = 0; c < children; ++c) {
      for (int k = 0; k < d; ++k) {
        double mid = 0.5 * (lo[k] + hi[k]);
        if (c & (1 << k)) {
          clo[k] = mid;
          chi[k] = hi[k];
        } else {
          clo[k] = lo[k];
          chi[k] = mid;
        }
      }
      integrate_cell(clo, chi, depth + 1);
      if (infinite) return;
    }
  }
};

// Canonical particle order: lexicographic by position then charge, so U is
// exactly permutation invariant.
void canonical_order(const ChargeConfiguration& eta, int d, std::vector<double>& pos,
                     std::vector<double>& charges) {
  const std::size_t n = eta.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    for (int k = 0; k < d; ++k) {
      double xa = eta.positions[a * d + k], xb = eta.positions[b * d + k];
      if (xa != xb) return xa < xb;
    }
    return eta.charges[a] < eta.charges[b];
  });
  pos.resize(n * d);
  charges.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    charges[i] = eta.charges[order[i]];
    for (int k = 0; k < d; ++k) pos[i * d + k] = eta.positions[order[i] * d + k];
  }
}

double run_engine(const Box& domain, const ChargeConfiguration& eta,
                  const RadialKernel& kernel, const PotentialSpec& spec,
                  const InteractionDomain& dom) {
  const int d = eta.d;
  if (d > 8) throw std::invalid_argument("interaction_energy: d > 8 unsupported");
  if (spec.kind == PotentialSpec::Kind::Quadratic &&
      kernel.singular_at_origin())
    throw std::invalid_argument(
        "quadratic potential requires a mollified or indicator kernel");

  Engine eng;
  eng.kernel = &kernel;
  eng.spec = &spec;
  eng.d = d;
  canonical_order(eta, d, eng.pos, eng.charges);
  eng.gl_order = dom.gl_order;
  eng.max_depth = dom.max_depth;
  eng.phase_fraction = dom.phase_fraction;
  double smax = 0.0;
  for (double s : eng.charges) smax = std::max(smax, std::fabs(s));
  eng.phase_bound = spec.max_frequency() * smax;

  double h = dom.base_h;
  if (h <= 0.0) {
    h = 0.1 / kernel.decay_scale();
    if (kernel.kind() == RadialKernel::Kind::Mollified)
      h = std::min(h, 0.5 * kernel.epsilon());
  }
  // Base cells: uniform partition no coarser than h.
  std::vector<int> cells(d);
  std::vector<double> step(d);
  for (int k = 0; k < d; ++k) {
    double extent = domain.hi[k] - domain.lo[k];
    cells[k] = std::max(1, static_cast<int>(std::ceil(extent / h)));
    step[k] = extent / cells[k];
  }
  std::vector<int> idx(d, 0);
  double lo[8], hi[8];
  for (;;) {
    for (int k = 0; k < d; ++k) {
      lo[k] = domain.lo[k] + idx[k] * step[k];
      hi[k] = lo[k] + step[k];
    }
    eng.integrate_cell(lo, hi, 0);
    if (eng.infinite) return std::numeric_limits<double>::infinity();
    int k = d - 1;
    for (; k >= 0; --k) {
      if (++idx[k] < cells[k]) break;
      idx[k] = 0;
    }
    if (k < 0) break;
  }
  return pairwise_sum(eng.parts);
}

double min_pair_distance(const ChargeConfiguration& eta) {
  double best = std::numeric_limits<double>::infinity();
  const int d = eta.d;
  for (std::size_t a = 0; a + 1 < eta.size(); ++a)
    for (std::size_t b = a + 1; b < eta.size(); ++b) {
      double q = 0.0;
      for (int k = 0; k < d; ++k) {
        double dx = eta.positions[a * d + k] - eta.positions[b * d + k];
        q += dx * dx;
      }
      best = std::min(best, q);
    }
  return std::sqrt(best);
}

}  // namespace

bool hard_sphere_rule_applies(const ChargeConfiguration& eta,
                              const RadialKernel& kernel,
                              const PotentialSpec& spec) {
  if (kernel.kind() != RadialKernel::Kind::Indicator) return false;
  if (spec.kind != PotentialSpec::Kind::HardWall) return false;
  if (!(spec.threshold > 1.0 && spec.threshold <= 2.0)) return false;
  for (double s : eta.charges)
    if (s != 1.0) return false;
  return true;
}

double interaction_energy(const ChargeConfiguration& eta, const RadialKernel& kernel,
                          const PotentialSpec& spec,
                          const InteractionDomain& domain) {
  if (eta.size() == 0) return 0.0;
  if (hard_sphere_rule_applies(eta, kernel, spec)) {
    // Two open balls overlap on positive measure iff centers are closer
    // than 2R; the field then reaches 2 >= threshold there.
    return min_pair_distance(eta) < 2.0 * kernel.indicator_radius()
               ? std::numeric_limits<double>::infinity()
               : 0.0;
  }
  return run_engine(domain.padded_box(eta.box, kernel), eta, kernel, spec, domain);
}

double interaction_energy_quadrature(const ChargeConfiguration& eta,
                                     const RadialKernel& kernel,
                                     const PotentialSpec& spec,
                                     const InteractionDomain& domain) {
  if (eta.size() == 0) return 0.0;
  return run_engine(domain.padded_box(eta.box, kernel), eta, kernel, spec, domain);
}

// ------------------------------------------------------------ moves

Move Move::insert(std::vector<double> y, double s) {
  Move m;
  m.kind = Kind::Insert;
  m.position = std::move(y);
  m.charge = s;
  return m;
}

Move Move::erase(std::size_t index) {
  Move m;
  m.kind = Kind::Delete;
  m.index = index;
  return m;
}

Move Move::displace(std::size_t index, std::vector<double> y) {
  Move m;
  m.kind = Kind::Displace;
  m.index = index;
  m.position = std::move(y);
  return m;
}

Move Move::recharge(std::size_t index, double s) {
  Move m;
  m.kind = Kind::Recharge;
  m.index = index;
  m.charge = s;
  return m;
}

ChargeConfiguration apply_move(const ChargeConfiguration& eta, const Move& move) {
  ChargeConfiguration out = eta;
  switch (move.kind) {
    case Move::Kind::Insert:
      out.add(move.position, move.charge);
      break;
    case Move::Kind::Delete:
      out.remove(move.index);
      break;
    case Move::Kind::Displace: {
      if (move.index >= eta.size()) throw std::logic_error("displace: bad index");
      for (int k = 0; k < eta.d; ++k)
        out.positions[move.index * eta.d + k] = move.position[k];
      break;
    }
    case Move::Kind::Recharge:
      if (move.index >= eta.size()) throw std::logic_error("recharge: bad index");
      out.charges[move.index] = move.charge;
      break;
  }
  return out;
}

double delta_energy(const ChargeConfiguration& eta, const RadialKernel& kernel,
                    const PotentialSpec& spec, const InteractionDomain& domain,
                    const Move& move) {
  const int d = eta.d;
  if ((move.kind == Move::Kind::Delete || move.kind == Move::Kind::Displace ||
       move.kind == Move::Kind::Recharge) &&
      move.index >= eta.size())
    throw std::logic_error("delta_energy: move references an invalid index");

  ChargeConfiguration after = apply_move(eta, move);

  if (hard_sphere_rule_applies(after, kernel, spec) &&
      hard_sphere_rule_applies(eta, kernel, spec)) {
    double diameter = 2.0 * kernel.indicator_radius();
    bool before_overlap = eta.size() > 1 && min_pair_distance(eta) < diameter;
    bool after_overlap = after.size() > 1 && min_pair_distance(after) < diameter;
    if (before_overlap == after_overlap) return 0.0;
    return after_overlap ? std::numeric_limits<double>::infinity()
                         : -std::numeric_limits<double>::infinity();
  }

  // Affected positions: where charge structure changed.
  std::vector<const double*> affected;
  switch (move.kind) {
    case Move::Kind::Insert:
      affected.push_back(after.positions.data() + (after.size() - 1) * d);
      break;
    case Move::Kind::Delete:
    case Move::Kind::Recharge:
      affected.push_back(eta.positions.data() + move.index * d);
      break;
    case Move::Kind::Displace:
      affected.push_back(eta.positions.data() + move.index * d);
      affected.push_back(move.position.data());
      break;
  }

  // Local integration box: affected positions padded by the kernel reach,
  // clipped to the global padded domain. Outside it the integrand change is
  // bounded by the exponential kernel tail.
  Box global = domain.padded_box(eta.box, kernel);
  double pad = domain.pad_lengths / kernel.decay_scale();
  std::vector<double> lo(d), hi(d);
  for (int k = 0; k < d; ++k) {
    double mn = 1e300, mx = -1e300;
    for (const double* a : affected) {
      mn = std::min(mn, a[k]);
      mx = std::max(mx, a[k]);
    }
    lo[k] = std::max(global.lo[k], mn - pad);
    hi[k] = std::min(global.hi[k], mx + pad);
  }
  Box local(lo, hi);

  double u_after = run_engine(local, after, kernel, spec, domain);
  double u_before = run_engine(local, eta, kernel, spec, domain);
  if (std::isinf(u_after) && std::isinf(u_before)) return 0.0;
  return u_after - u_before;
}

// ------------------------------------------------------------ radial engine

double radial_trig_energy(const KernelParams& params,
                          std::span<const PotentialSpec::TrigTerm> terms,
                          double resolution) {
  if (!(resolution > 0.0))
    throw std::invalid_argument("radial_trig_energy: resolution must be > 0");
  const int d = params.d;
  const double m = params.m;
  double fmax = 0.0, wsum = 0.0;
  for (const auto& t : terms) {
    fmax = std::max(fmax, std::fabs(t.frequency));
    wsum += t.weight;
  }
  if (fmax == 0.0) return 0.0;

  const double rho_min = 1e-4 / m;
  const double rho_end = 35.0 / m;
  auto integrand = [&](double rho) {
    double g = green_evaluate(params, rho);
    double acc = 0.0;
    for (const auto& t : terms)
      acc += t.weight * (std::cos(t.frequency * g) - 1.0);
    return acc * std::pow(rho, d - 1.0);
  };

  // Mean of the fast-oscillating remainder below rho_min: cos averages to
  // zero, leaving -sum w_k * rho_min^d / d. The dropped oscillatory part is
  // bounded via integration by parts by rho_min^{d+1}/(fmax |G'|) terms.
  double head = -wsum * std::pow(rho_min, d) / d;

  // Phase-resolved panel walk: each step advances the phase of the fastest
  // term by at most pi/3 and the radius by at most min(0.1/m, rho/2).
  std::vector<double> breaks;
  breaks.push_back(rho_min);
  double rho = rho_min;
  const double max_phase_step = resolution * M_PI / 3.0;
  while (rho < rho_end) {
    double slope = fmax * std::fabs(green_derivative(params, rho));
    double step = resolution * std::min(0.1 / m, 0.5 * rho);
    if (slope > 0.0) step = std::min(step, max_phase_step / slope);
    rho += step;
    breaks.push_back(std::min(rho, rho_end));
  }
  double body = integrate_breakpoints(integrand, breaks, 10);
  return head + body;
}

double renorm_normalizer(double z, double alpha, const ChargeLaw& law,
                         const KernelParams& kernel, double resolution) {
  if (!(z > 0.0)) throw std::domain_error("renorm_normalizer: z must be > 0");
  if (!law.symmetric())
    throw std::domain_error("renorm_normalizer: the charge law must be symmetric");
  if (alpha == 0.0) return 1.0;
  std::vector<PotentialSpec::TrigTerm> terms;
  for (const ChargeLaw::Atom& a : law.atoms())
    terms.push_back({a.prob, alpha * a.value / std::sqrt(z)});
  const double sphere =
      2.0 * std::pow(M_PI, 0.5 * kernel.d) / std::tgamma(0.5 * kernel.d);
  double exponent = z * sphere * radial_trig_energy(kernel, terms, resolution);
  if (exponent > 0.0)
    throw std::runtime_error("renorm_normalizer: positive exponent (quadrature)");
  return std::exp(exponent);
}

}  // namespace cpn
