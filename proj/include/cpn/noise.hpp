// Marked Poisson noise in boxes: charge laws, sampled configurations,
// pairings with test functions, and the exact Levy-Khinchine / Campbell
// oracles for those pairings.
#pragma once

#include <complex>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "cpn/rng.hpp"

namespace cpn {

struct Box {
  std::vector<double> lo;
  std::vector<double> hi;

  Box(std::vector<double> lo_, std::vector<double> hi_);

  int dimension() const { return static_cast<int>(lo.size()); }
  double volume() const;
  bool contains(std::span<const double> x) const;
  Box padded(double pad) const;
  /// Componentwise scaling x -> alpha x of both corners.
  Box scaled(double alpha) const;
};

/// Finitely supported charge distribution on [-c, c].
class ChargeLaw {
 public:
  static ChargeLaw two_point_symmetric(double c);
  static ChargeLaw point_mass(double c);
  static ChargeLaw discrete(std::vector<double> values, std::vector<double> probs);

  struct Atom {
    double value;
    double prob;
  };
  std::span<const Atom> atoms() const { return atoms_; }

  double mean() const { return moment(1); }
  double second_moment() const { return moment(2); }
  double moment(int k) const;
  double support_bound() const { return support_bound_; }
  /// True iff the law is invariant under s -> -s (checked at construction).
  bool symmetric() const { return symmetric_; }

  double sample(RngStream& rng) const;

  std::string describe() const;
  static ChargeLaw parse(const std::string& descriptor);

 private:
  enum class Kind { TwoPointSymmetric, PointMass, Discrete };
  ChargeLaw(Kind kind, std::vector<Atom> atoms);

  Kind kind_;
  std::vector<Atom> atoms_;
  std::vector<double> cumulative_;
  double support_bound_;
  bool symmetric_;
};

/// A finite unordered set of (position, charge) marks in a box. Storage is
/// columnar; all semantics are permutation invariant.
struct ChargeConfiguration {
  int d = 0;
  Box box;
  std::vector<double> positions;  // n*d, row-major
  std::vector<double> charges;    // n

  explicit ChargeConfiguration(Box box_);

  std::size_t size() const { return charges.size(); }
  std::span<const double> position(std::size_t j) const {
    return {positions.data() + j * d, static_cast<std::size_t>(d)};
  }
  void add(std::span<const double> y, double s);
  void remove(std::size_t j);  // swap-with-last removal

  /// Union of two configurations over disjoint boxes (or any boxes; the
  /// result keeps the bounding box of the two).
  static ChargeConfiguration merge(const ChargeConfiguration& a,
                                   const ChargeConfiguration& b);

  /// Text dump: header lines with d, n, z, stream, box, law descriptor,
  /// then one "s y_1 ... y_d" line per particle, 17 significant digits.
  void dump(std::ostream& os, double z, const std::string& law_descriptor,
            std::uint64_t seed, std::uint64_t stream_id) const;
  static ChargeConfiguration load(std::istream& is);
};

/// Schwartz-class stand-ins: Gaussian bumps, box indicators, finite sums.
class TestFunction {
 public:
  static TestFunction gaussian_bump(std::vector<double> center, double width,
                                    double amplitude);
  static TestFunction box_indicator(Box box);
  static TestFunction finite_sum(std::vector<TestFunction> parts);

  double evaluate(std::span<const double> x) const;
  /// Exact (closed-form) integral of f over the domain box.
  double integral(const Box& domain) const;
  /// Exact integral of f^2 over the domain box (closed form incl. cross terms).
  double integral_sq(const Box& domain) const;
  /// Box outside which |f| < ~2e-16 * amplitude.
  Box support_box() const;

  int dimension() const;

  struct Atom {
    enum class Kind { GaussianBump, BoxIndicator } kind;
    // GaussianBump
    std::vector<double> center;
    double width = 0.0;
    double amplitude = 0.0;
    // BoxIndicator
    std::vector<double> lo, hi;
  };
  std::span<const Atom> atoms() const { return atoms_; }

 private:
  explicit TestFunction(std::vector<Atom> atoms);
  std::vector<Atom> atoms_;
};

/// n ~ Poisson(z |box|), positions i.i.d. uniform, charges i.i.d. from law.
ChargeConfiguration sample_configuration(const Box& box, double z,
                                         const ChargeLaw& law, RngStream& rng);

/// <eta, f> = sum_j s_j f(y_j).
double pair_noise(const ChargeConfiguration& config, const TestFunction& f);

/// As pair_noise(sample_configuration(...), f) but allocation free.
double sample_noise_pairing(const Box& box, double z, const ChargeLaw& law,
                            const TestFunction& f, RngStream& rng);

/// Exact characteristic function of <eta, f> at t:
///   exp( z int_box sum_s p_s (e^{i t s f(x)} - 1) dx ),
/// spatial integral by adaptive tensor-grid quadrature to abs_tol.
std::complex<double> noise_char_analytic(const Box& box, double z,
                                         const ChargeLaw& law,
                                         const TestFunction& f, double t,
                                         double abs_tol = 1e-8);

struct Moments {
  double mean;
  double variance;
};

/// Campbell's theorem: mean = z E[S] int f, variance = z E[S^2] int f^2.
Moments campbell_moments(const Box& box, double z, const ChargeLaw& law,
                         const TestFunction& f);

}  // namespace cpn
