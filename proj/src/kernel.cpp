#include "cpn/kernel.hpp"

#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "cpn/quadrature.hpp"
#include "cpn/special.hpp"

namespace cpn {

KernelParams::KernelParams(int d_, double m_) : d(d_), m(m_) {
  if (d < 2) throw std::invalid_argument("KernelParams: d must be >= 2");
  if (!(m > 0.0)) throw std::invalid_argument("KernelParams: m must be > 0");
}

MollifierParams::MollifierParams(double epsilon_) : epsilon(epsilon_) {
  if (!(epsilon > 0.0))
    throw std::invalid_argument("MollifierParams: epsilon must be > 0");
}

namespace {

double green_prefactor(const KernelParams& p) {
  const double d = p.d;
  return std::pow(2.0, 0.5 * (1.0 - d)) * std::pow(M_PI, -0.5 * (d + 1.0)) *
         std::pow(p.m, 0.5 * (d - 1.0));
}

}  // namespace

double green_evaluate(const KernelParams& params, double r) {
  if (!(r > 0.0)) throw std::domain_error("green_evaluate: r must be > 0");
  const double nu = 0.5 * (params.d - 1.0);
  return green_prefactor(params) * std::pow(r, -nu) * bessel_k(nu, params.m * r);
}

double green_derivative(const KernelParams& params, double r) {
  if (!(r > 0.0)) throw std::domain_error("green_derivative: r must be > 0");
  const double nu = 0.5 * (params.d - 1.0);
  // d/dr [ r^{-nu} K_nu(m r) ] = -m r^{-nu} K_{nu+1}(m r)
  return -green_prefactor(params) * params.m * std::pow(r, -nu) *
         bessel_k(nu + 1.0, params.m * r);
}

double green_origin_coefficient(const KernelParams& params) {
  const double d = params.d;
  return std::tgamma(0.5 * (d - 1.0)) / (2.0 * std::pow(M_PI, 0.5 * (d + 1.0)));
}

double green_mollified(const KernelParams& params, const MollifierParams& moll,
                       double r) {
  if (r < 0.0) throw std::domain_error("green_mollified: r must be >= 0");
  const double m = params.m;
  const double d = params.d;
  const double e2h = 0.5 * moll.epsilon * moll.epsilon;
  // Substitute t = u^2: G_eps(r) = (2/sqrt(pi)) int_0^inf
  //   (4 pi (u^2+e2h))^{-d/2} exp(-m^2 u^2 - r^2/(4(u^2+e2h))) du.
  auto integrand = [&](double u) {
    double a = u * u + e2h;
    return std::pow(4.0 * M_PI * a, -0.5 * d) *
           std::exp(-m * m * u * u - 0.25 * r * r / a);
  };
  // Geometric panels resolve the epsilon scale, then uniform ones to the
  // exp(-m^2 u^2) cutoff; the saddle for large r sits near sqrt(r/2m).
  double u_max = 7.0 / m + std::sqrt(0.5 * (r + 1.0) / m);
  double first = std::min(0.25 * moll.epsilon, 0.05 / m);
  std::vector<double> breaks = geometric_breakpoints(first, u_max, 1.6, true);
  return (2.0 / std::sqrt(M_PI)) * integrate_breakpoints(integrand, breaks, 16);
}

KernelTable::KernelTable(const KernelParams& params, double r_min, double r_max,
                         std::vector<double> values)
    : params_(params), r_min_(r_min), r_max_(r_max), values_(std::move(values)) {
  log_r_min_ = std::log(r_min);
  log_step_ = (std::log(r_max) - log_r_min_) / (values_.size() - 1);
  log_values_.resize(values_.size());
  for (std::size_t i = 0; i < values_.size(); ++i) {
    if (!(values_[i] > 0.0))
      throw std::invalid_argument("KernelTable: values must be positive");
    if (i > 0 && values_[i] >= values_[i - 1])
      throw std::invalid_argument("KernelTable: values must be strictly decreasing");
    log_values_[i] = std::log(values_[i]);
  }
  head_exponent_ = -(params.d - 1.0);
  // Tail r^{-d/2} e^{-mu r} matched in value and log-slope at r_max, so the
  // subleading Bessel corrections are absorbed into mu.
  double g = values_.back();
  double gp = green_derivative(params, r_max);
  tail_rate_ = -gp / g - 0.5 * params.d / r_max;
  tail_coeff_ = g * std::pow(r_max, 0.5 * params.d) * std::exp(tail_rate_ * r_max);
}

KernelTable KernelTable::build(const KernelParams& params, double r_min,
                               double r_max, int n_points) {
  if (!(r_min > 0.0) || !(r_max > r_min))
    throw std::invalid_argument("KernelTable: need 0 < r_min < r_max");
  if (n_points < 16) throw std::invalid_argument("KernelTable: n_points >= 16");
  const double l0 = std::log(r_min);
  // Doubles the grid until midpoint interpolation meets the 1e-6 invariant.
  for (int attempt = 0;; ++attempt) {
    const double step = (std::log(r_max) - l0) / (n_points - 1);
    std::vector<double> vals(n_points);
    for (int i = 0; i < n_points; ++i)
      vals[i] = green_evaluate(params, std::exp(l0 + i * step));
    KernelTable table(params, r_min, r_max, std::move(vals));
    double worst = 0.0;
    for (int i = 0; i + 1 < n_points; ++i) {
      double r = std::exp(l0 + (i + 0.5) * step);
      double direct = green_evaluate(params, r);
      worst = std::max(worst, std::fabs(table.evaluate(r) - direct) / direct);
    }
    if (worst <= 1e-6 || attempt == 4) return table;
    n_points *= 2;
  }
}

double KernelTable::radius(int i) const { return std::exp(log_r_min_ + i * log_step_); }

double KernelTable::evaluate(double r) const {
  if (!(r > 0.0)) throw std::domain_error("KernelTable: r must be > 0");
  if (r < r_min_) return values_.front() * std::pow(r / r_min_, head_exponent_);
  if (r >= r_max_)
    return tail_coeff_ * std::pow(r, -0.5 * params_.d) * std::exp(-tail_rate_ * r);
  const double u = (std::log(r) - log_r_min_) / log_step_;
  const std::size_t n = log_values_.size();
  // Grid-node queries return the stored value exactly.
  double nearest = std::round(u);
  if (std::fabs(u - nearest) < 1e-9 && nearest >= 0.0 &&
      nearest < static_cast<double>(n))
    return values_[static_cast<std::size_t>(nearest)];
  std::size_t i = static_cast<std::size_t>(u);
  if (i >= n - 1) i = n - 2;
  // 4-point Lagrange cubic in log-log, clamped to the grid at the ends.
  std::size_t i0 = (i == 0) ? 0 : i - 1;
  if (i0 + 3 >= n) i0 = n - 4;
  const double x = u - static_cast<double>(i0);
  const double y0 = log_values_[i0], y1 = log_values_[i0 + 1];
  const double y2 = log_values_[i0 + 2], y3 = log_values_[i0 + 3];
  const double c0 = -(x - 1.0) * (x - 2.0) * (x - 3.0) / 6.0;
  const double c1 = x * (x - 2.0) * (x - 3.0) / 2.0;
  const double c2 = -x * (x - 1.0) * (x - 3.0) / 2.0;
  const double c3 = x * (x - 1.0) * (x - 2.0) / 6.0;
  return std::exp(c0 * y0 + c1 * y1 + c2 * y2 + c3 * y3);
}

void KernelTable::dump(std::ostream& os) const {
  char buf[128];
  std::snprintf(buf, sizeof buf, "%d %.17g %d %.17g %.17g\n", params_.d, params_.m,
                n_points(), r_min_, r_max_);
  os << buf;
  for (int i = 0; i < n_points(); ++i) {
    std::snprintf(buf, sizeof buf, "%.17g %.17g\n", radius(i), values_[i]);
    os << buf;
  }
}

KernelTable KernelTable::load(std::istream& is) {
  int d = 0, n = 0;
  double m = 0.0, r_min = 0.0, r_max = 0.0;
  if (!(is >> d >> m >> n >> r_min >> r_max))
    throw std::runtime_error("KernelTable::load: bad header");
  if (n < 16) throw std::runtime_error("KernelTable::load: bad n_points");
  std::vector<double> vals(n);
  for (int i = 0; i < n; ++i) {
    double r = 0.0, v = 0.0;
    if (!(is >> r >> v)) throw std::runtime_error("KernelTable::load: short file");
    vals[i] = v;
  }
  return KernelTable(KernelParams(d, m), r_min, r_max, std::move(vals));
}

}  // namespace cpn
