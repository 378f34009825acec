// Gauss-Legendre rules, adaptive 1-d panel integration, and composite
// tensor-product grids over boxes.
#pragma once

#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace cpn {

struct GlRule {
  std::vector<double> nodes;    // on (-1, 1)
  std::vector<double> weights;  // sum to 2
};

/// Cached Gauss-Legendre rule of the given order (1..64).
const GlRule& gl_rule(int order);

struct QuadratureError : std::runtime_error {
  explicit QuadratureError(const std::string& what) : std::runtime_error(what) {}
};

/// Fixed composite GL over [a, b] with n equal panels.
template <typename F>
double integrate_panels(F&& f, double a, double b, int n_panels, int order) {
  const GlRule& rule = gl_rule(order);
  const double h = (b - a) / n_panels;
  double total = 0.0;
  for (int p = 0; p < n_panels; ++p) {
    double lo = a + p * h;
    double mid = lo + 0.5 * h;
    double acc = 0.0;
    for (std::size_t i = 0; i < rule.nodes.size(); ++i)
      acc += rule.weights[i] * f(mid + 0.5 * h * rule.nodes[i]);
    total += 0.5 * h * acc;
  }
  return total;
}

/// Composite GL over explicit panel breakpoints.
template <typename F>
double integrate_breakpoints(F&& f, std::span<const double> breaks, int order) {
  const GlRule& rule = gl_rule(order);
  double total = 0.0;
  for (std::size_t p = 0; p + 1 < breaks.size(); ++p) {
    double lo = breaks[p], hi = breaks[p + 1];
    double mid = 0.5 * (lo + hi), half = 0.5 * (hi - lo);
    double acc = 0.0;
    for (std::size_t i = 0; i < rule.nodes.size(); ++i)
      acc += rule.weights[i] * f(mid + half * rule.nodes[i]);
    total += half * acc;
  }
  return total;
}

/// Panel doubling until successive composite values differ by < abs_tol.
/// Throws QuadratureError with the context string if max_level is exhausted.
template <typename F>
double integrate_adaptive(F&& f, double a, double b, double abs_tol,
                          const char* context, int initial_panels = 4,
                          int order = 12, int max_level = 12) {
  double prev = integrate_panels(f, a, b, initial_panels, order);
  int n = initial_panels;
  for (int level = 0; level < max_level; ++level) {
    n *= 2;
    double cur = integrate_panels(f, a, b, n, order);
    if (std::abs(cur - prev) < abs_tol) return cur;
    prev = cur;
  }
  throw QuadratureError(std::string("quadrature did not converge: ") + context);
}

/// Composite GL tensor grid over a d-dimensional box, flattened row-major.
struct TensorGrid {
  int d = 0;
  std::vector<double> nodes;    // size count*d
  std::vector<double> weights;  // size count
  std::size_t count() const { return weights.size(); }
  const double* point(std::size_t i) const { return nodes.data() + i * d; }
};

TensorGrid build_tensor_grid(std::span<const double> lo, std::span<const double> hi,
                             std::span<const int> panels_per_axis, int order);

inline TensorGrid build_tensor_grid(std::span<const double> lo,
                                    std::span<const double> hi, int panels,
                                    int order) {
  std::vector<int> p(lo.size(), panels);
  return build_tensor_grid(lo, hi, p, order);
}

/// Geometric breakpoints a*ratio^k ... capped at b, prepended with 0 if from_zero.
std::vector<double> geometric_breakpoints(double first, double b, double ratio,
                                          bool from_zero);

}  // namespace cpn
