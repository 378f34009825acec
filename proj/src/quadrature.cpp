#include "cpn/quadrature.hpp"

#include <cmath>
#include <mutex>
#include <unordered_map>

namespace cpn {

namespace {

GlRule compute_gl_rule(int order) {
  GlRule rule;
  rule.nodes.resize(order);
  rule.weights.resize(order);
  // Newton on Legendre P_n, standard symmetric construction.
  for (int i = 0; i < (order + 1) / 2; ++i) {
    double x = std::cos(M_PI * (i + 0.75) / (order + 0.5));
    double pp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = 0.0;
      for (int j = 0; j < order; ++j) {
        double p2 = p1;
        p1 = p0;
        p0 = ((2.0 * j + 1.0) * x * p1 - j * p2) / (j + 1.0);
      }
      pp = order * (x * p0 - p1) / (x * x - 1.0);
      double dx = p0 / pp;
      x -= dx;
      if (std::fabs(dx) < 1e-15) break;
    }
    rule.nodes[i] = -x;
    rule.nodes[order - 1 - i] = x;
    double w = 2.0 / ((1.0 - x * x) * pp * pp);
    rule.weights[i] = w;
    rule.weights[order - 1 - i] = w;
  }
  return rule;
}

}  // namespace

const GlRule& gl_rule(int order) {
  if (order < 1 || order > 64) throw std::invalid_argument("gl_rule: order out of range");
  static std::mutex mu;
  static std::unordered_map<int, GlRule> cache;
  std::lock_guard<std::mutex> lock(mu);
  auto it = cache.find(order);
  if (it == cache.end()) it = cache.emplace(order, compute_gl_rule(order)).first;
  return it->second;
}

TensorGrid build_tensor_grid(std::span<const double> lo, std::span<const double> hi,
                             std::span<const int> panels_per_axis, int order) {
  const int d = static_cast<int>(lo.size());
  if (hi.size() != lo.size() || panels_per_axis.size() != lo.size())
    throw std::invalid_argument("build_tensor_grid: dimension mismatch");
  const GlRule& rule = gl_rule(order);

  // Per-axis 1-d nodes and weights.
  std::vector<std::vector<double>> ax_nodes(d), ax_weights(d);
  for (int k = 0; k < d; ++k) {
    int np = panels_per_axis[k];
    if (np < 1) throw std::invalid_argument("build_tensor_grid: panels must be >= 1");
    double h = (hi[k] - lo[k]) / np;
    if (!(h > 0.0)) throw std::invalid_argument("build_tensor_grid: empty box axis");
    for (int p = 0; p < np; ++p) {
      double mid = lo[k] + (p + 0.5) * h;
      for (int i = 0; i < order; ++i) {
        ax_nodes[k].push_back(mid + 0.5 * h * rule.nodes[i]);
        ax_weights[k].push_back(0.5 * h * rule.weights[i]);
      }
    }
  }

  std::size_t total = 1;
  for (int k = 0; k < d; ++k) total *= ax_nodes[k].size();

  TensorGrid grid;
  grid.d = d;
  grid.nodes.resize(total * d);
  grid.weights.resize(total);
  std::vector<std::size_t> idx(d, 0);
  for (std::size_t i = 0; i < total; ++i) {
    double w = 1.0;
    for (int k = 0; k < d; ++k) {
      grid.nodes[i * d + k] = ax_nodes[k][idx[k]];
      w *= ax_weights[k][idx[k]];
    }
    grid.weights[i] = w;
    for (int k = d - 1; k >= 0; --k) {
      if (++idx[k] < ax_nodes[k].size()) break;
      idx[k] = 0;
    }
  }
  return grid;
}

std::vector<double> geometric_breakpoints(double first, double b, double ratio,
                                          bool from_zero) {
  if (!(first > 0.0) || !(b > first) || !(ratio > 1.0))
    throw std::invalid_argument("geometric_breakpoints: bad arguments");
  std::vector<double> breaks;
  if (from_zero) breaks.push_back(0.0);
  double x = first;
  while (x < b) {
    breaks.push_back(x);
    x *= ratio;
  }
  breaks.push_back(b);
  return breaks;
}

}  // namespace cpn
