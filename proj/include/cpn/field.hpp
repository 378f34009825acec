// Convoluted Poisson noise fields phi = K * eta: pointwise evaluation,
// pairings <phi, f> through the adjoint route <eta, K*f>, and the exact
// Levy-Khinchine machinery for their characteristic functions.
#pragma once

#include <complex>
#include <memory>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "cpn/kernel.hpp"
#include "cpn/noise.hpp"

namespace cpn {

/// Radial kernel variants: the Green's function (direct or tabulated), its
/// mollified form (tabulated), and the hard-sphere ball indicator.
/// Value type with shared immutable tables; safe for concurrent reads.
class RadialKernel {
 public:
  enum class Kind { Green, Mollified, Indicator };

  /// Tabulated G, fast enough for Monte Carlo inner loops (~1e-6 relative).
  static RadialKernel green(const KernelParams& params);
  /// Direct closed-form G, machine precision; for tight quadratures.
  static RadialKernel green_direct(const KernelParams& params);
  /// Tabulated G_eps (finite at the origin).
  static RadialKernel mollified(const KernelParams& params,
                                const MollifierParams& moll);
  /// chi_{B_R}: 1 inside the open ball of the given radius, else 0.
  static RadialKernel indicator(double radius);

  double evaluate(double r) const;

  Kind kind() const { return kind_; }
  bool singular_at_origin() const { return kind_ == Kind::Green; }
  const std::optional<KernelParams>& params() const { return params_; }
  double indicator_radius() const { return radius_; }
  double epsilon() const { return epsilon_; }
  /// Exponential decay scale (m for Green kernels); the indicator reports
  /// its radius so padded domains stay finite.
  double decay_scale() const;

 private:
  RadialKernel() = default;
  struct UniformTable;
  Kind kind_ = Kind::Indicator;
  std::optional<KernelParams> params_;
  double epsilon_ = 0.0;
  double radius_ = 0.0;
  std::shared_ptr<const KernelTable> log_table_;
  std::shared_ptr<const UniformTable> uniform_table_;
};

struct SingularFieldError : std::runtime_error {
  explicit SingularFieldError(const std::string& what) : std::runtime_error(what) {}
};

/// View tying a kernel to a configuration, optionally with the 1/sqrt(z)
/// charge rescaling of the scaling limit.
struct FieldContext {
  const RadialKernel* kernel;
  const ChargeConfiguration* config;
  bool rescaled;
  double z;
  double delta_pos;  // singularity guard distance

  FieldContext(const RadialKernel& k, const ChargeConfiguration& c,
               double delta = 1e-12);
  FieldContext(const RadialKernel& k, const ChargeConfiguration& c, double z_,
               bool rescaled_, double delta = 1e-12);
  double charge(std::size_t j) const;
};

/// phi(x) = sum_j s'_j K(|x - y_j|). Throws SingularFieldError if x is
/// within delta_pos of a particle and the kernel is singular there.
double field_at(const FieldContext& ctx, std::span<const double> x);

/// K*f evaluated pointwise. Gaussian-bump atoms reduce to an exact radial
/// integral with a Bessel angular kernel; finite sums add per atom. Box
/// indicator atoms are not supported under convolution.
/// Profiled mode tabulates each atom's radial profile (about 1e-6 relative)
/// for Monte Carlo inner loops; Exact mode integrates on every call.
class ConvolvedTestFunction {
 public:
  enum class Mode { Exact, Profiled };

  ConvolvedTestFunction(const RadialKernel& kernel, const TestFunction& f,
                        Mode mode = Mode::Profiled, double profile_reach = 0.0);
  ConvolvedTestFunction(const ConvolvedTestFunction&);
  ConvolvedTestFunction(ConvolvedTestFunction&&) noexcept;
  ConvolvedTestFunction& operator=(const ConvolvedTestFunction&);
  ConvolvedTestFunction& operator=(ConvolvedTestFunction&&) noexcept;
  ~ConvolvedTestFunction();

  double evaluate(std::span<const double> x) const;
  int dimension() const { return d_; }

 private:
  struct BumpProfile;
  int d_;
  Mode mode_;
  std::vector<BumpProfile> profiles_;
};

/// <phi, f> = <eta, K*f> = sum_j s'_j (K*f)(y_j).
double pair_field(const FieldContext& ctx, const ConvolvedTestFunction& kf);

/// One Monte Carlo draw of <phi, f> with particles Poisson(z) in the box
/// (pass the padded box for full-space fields); allocation free. Charges are
/// divided by sqrt(z) when rescaled is set.
double sample_field_pairing(const Box& box, double z, const ChargeLaw& law,
                            const ConvolvedTestFunction& kf, bool rescaled,
                            RngStream& rng);

/// Levy-Khinchine exponent of <phi, f> for particles in a padded box:
///   E(t) = z int_domain sum_s p_s (exp(i t s' g(x)) - 1) dx,  g = K*f,
/// with g cached on a two-level tensor grid. exponent() reports the finer
/// level; the level difference is the convergence estimate.
class FieldExponent {
 public:
  FieldExponent(const Box& particle_box, const RadialKernel& kernel,
                const TestFunction& f, double padding, int panels_per_axis = 0,
                int gl_order = 6,
                ConvolvedTestFunction::Mode mode = ConvolvedTestFunction::Mode::Profiled);

  std::complex<double> exponent(double z, const ChargeLaw& law, double t,
                                bool rescaled) const;
  std::complex<double> cf(double z, const ChargeLaw& law, double t,
                          bool rescaled) const;
  /// |fine - coarse| of the exponent: quadrature self-estimate.
  double exponent_error(double z, const ChargeLaw& law, double t,
                        bool rescaled) const;
  /// Q(f,f) = int g^2 over the domain (the Gaussian-limit quadratic form).
  double quadratic_form() const;
  const Box& domain() const { return domain_; }

 private:
  std::complex<double> exponent_on(std::span<const double> g,
                                   std::span<const double> w, double z,
                                   const ChargeLaw& law, double t,
                                   bool rescaled) const;
  Box domain_;
  std::vector<double> weights_fine_, g_fine_;
  std::vector<double> weights_coarse_, g_coarse_;
};

/// Exact CF of <phi, f> with particles sampled in box.padded(padding).
/// Quadrature aims at abs_tol on the exponent (default 1e-6; the kernel
/// tables themselves are ~1e-6 relative).
std::complex<double> field_char_analytic(const Box& box, double z,
                                         const ChargeLaw& law,
                                         const RadialKernel& kernel,
                                         const TestFunction& f, double t,
                                         bool rescaled, double padding = -1.0,
                                         double abs_tol = 1e-6);

/// Covariance of <phi_0, f> and <phi_0, h>: z E[S^2] int (K*f)(K*h) dx over
/// the padded union of supports.
double free_covariance(const RadialKernel& kernel, const TestFunction& f,
                       const TestFunction& h, double z, const ChargeLaw& law,
                       double padding = -1.0);

}  // namespace cpn
