// Green's function G of the operator (-Laplace + m^2)^{1/2} in d >= 2
// dimensions, its Gaussian-mollified variant, and fast interpolation tables.
//
// Closed form, obtained by radial Fourier inversion of (|k|^2+m^2)^{-1/2}:
//   G(r) = 2^{(1-d)/2} pi^{-(d+1)/2} m^{(d-1)/2} r^{-(d-1)/2} K_{(d-1)/2}(m r)
// with the elementary reductions G = e^{-mr}/(2 pi r) in d=2 and
// G = m e^{-mr}(1+1/(mr))/(4 pi^2 r^2) in d=4 used as regression anchors.
#pragma once

#include <iosfwd>
#include <vector>

namespace cpn {

struct KernelParams {
  int d;     // spatial-temporal dimension, >= 2
  double m;  // mass, > 0

  KernelParams(int d_, double m_);
};

struct MollifierParams {
  double epsilon;  // Gaussian width in position space, > 0

  explicit MollifierParams(double epsilon_);
};

/// G(r) for r > 0.
double green_evaluate(const KernelParams& params, double r);

/// dG/dr, from (x^{-nu} K_nu(x))' = -x^{-nu} K_{nu+1}(x). Strictly negative.
double green_derivative(const KernelParams& params, double r);

/// Coefficient C_d of the near-origin law G(r) ~ C_d r^{-(d-1)},
/// C_d = Gamma((d-1)/2) / (2 pi^{(d+1)/2}).
double green_origin_coefficient(const KernelParams& params);

/// G_eps(r): Fourier multiplier (|k|^2+m^2)^{-1/2} exp(-eps^2 |k|^2 / 2),
/// evaluated through the subordination integral
///   G_eps(r) = pi^{-1/2} int_0^inf t^{-1/2} (4 pi (t+eps^2/2))^{-d/2}
///              exp(-t m^2 - r^2/(4 (t+eps^2/2))) dt,
/// which is smooth and finite at r = 0. Converges to G(r) pointwise as eps->0.
double green_mollified(const KernelParams& params, const MollifierParams& moll,
                       double r);

/// Cubic interpolation of log G against log r on a geometric radius grid.
/// Below r_min: the r^{-(d-1)} asymptote matched at r_min. Above r_max:
/// the r^{-d/2} e^{-m r} tail form matched at r_max.
class KernelTable {
 public:
  /// Requires 0 < r_min < r_max and n_points >= 16. n_points is a lower
  /// bound: the grid doubles until midpoint interpolation meets the 1e-6
  /// relative invariant.
  static KernelTable build(const KernelParams& params, double r_min, double r_max,
                           int n_points);

  double evaluate(double r) const;

  const KernelParams& params() const { return params_; }
  double r_min() const { return r_min_; }
  double r_max() const { return r_max_; }
  int n_points() const { return static_cast<int>(values_.size()); }
  double radius(int i) const;
  double value(int i) const { return values_[i]; }

  /// Plain text: header "d m n_points r_min r_max", then one "r value" line
  /// per node, 17 significant digits (round-trip exact for doubles).
  void dump(std::ostream& os) const;
  static KernelTable load(std::istream& is);

 private:
  KernelTable(const KernelParams& params, double r_min, double r_max,
              std::vector<double> values);

  KernelParams params_;
  double r_min_, r_max_;
  double log_r_min_, log_step_;
  std::vector<double> values_;      // G(r_i)
  std::vector<double> log_values_;  // log G(r_i)
  double head_exponent_;            // -(d-1)
  double tail_coeff_;               // matched tail amplitude at r_max
  double tail_rate_;                // matched tail decay rate (~m)
};

}  // namespace cpn
