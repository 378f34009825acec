#include "cpn/field.hpp"

#include <algorithm>
#include <cmath>

#include "cpn/quadrature.hpp"
#include "cpn/special.hpp"

namespace cpn {

// ------------------------------------------------------------ RadialKernel

// Uniform-step radial table with even reflection at 0 and a slope-matched
// exponential tail; used for the mollified kernel which is finite at r = 0.
struct RadialKernel::UniformTable {
  double step;
  std::vector<double> values;  // r_i = i * step
  double tail_rate;
  double tail_coeff;
  double r_max;
  int d;

  double evaluate(double r) const {
    if (r >= r_max)
      return tail_coeff * std::pow(r, -0.5 * d) * std::exp(-tail_rate * r);
    double u = r / step;
    std::ptrdiff_t i = static_cast<std::ptrdiff_t>(u);
    double x = u - static_cast<double>(i);
    // 4-point cubic with even reflection below zero.
    auto at = [&](std::ptrdiff_t j) {
      j = j < 0 ? -j : j;
      if (j >= static_cast<std::ptrdiff_t>(values.size()))
        j = static_cast<std::ptrdiff_t>(values.size()) - 1;
      return values[j];
    };
    double y0 = at(i - 1), y1 = at(i), y2 = at(i + 1), y3 = at(i + 2);
    double c0 = -x * (x - 1.0) * (x - 2.0) / 6.0;
    double c1 = (x + 1.0) * (x - 1.0) * (x - 2.0) / 2.0;
    double c2 = -(x + 1.0) * x * (x - 2.0) / 2.0;
    double c3 = (x + 1.0) * x * (x - 1.0) / 6.0;
    return c0 * y0 + c1 * y1 + c2 * y2 + c3 * y3;
  }
};

RadialKernel RadialKernel::green(const KernelParams& params) {
  RadialKernel k;
  k.kind_ = Kind::Green;
  k.params_ = params;
  k.log_table_ = std::make_shared<KernelTable>(
      KernelTable::build(params, 1e-4 / params.m, 60.0 / params.m, 512));
  return k;
}

RadialKernel RadialKernel::green_direct(const KernelParams& params) {
  RadialKernel k;
  k.kind_ = Kind::Green;
  k.params_ = params;
  return k;
}

RadialKernel RadialKernel::mollified(const KernelParams& params,
                                     const MollifierParams& moll) {
  RadialKernel k;
  k.kind_ = Kind::Mollified;
  k.params_ = params;
  k.epsilon_ = moll.epsilon;
  auto table = std::make_shared<UniformTable>();
  table->d = params.d;
  table->step = std::min(moll.epsilon / 8.0, 0.02 / params.m);
  table->r_max = 40.0 / params.m;
  std::size_t n = static_cast<std::size_t>(table->r_max / table->step) + 2;
  table->values.resize(n);
  for (std::size_t i = 0; i < n; ++i)
    table->values[i] = green_mollified(params, moll, i * table->step);
  // Log-slope match at r_max for the tail (G_eps ~ G out there).
  double g = table->values[n - 1];
  double gm = table->values[n - 2];
  double slope = (std::log(g) - std::log(gm)) / table->step;
  table->r_max = (n - 1) * table->step;
  table->tail_rate = -slope - 0.5 * params.d / table->r_max;
  table->tail_coeff = g * std::pow(table->r_max, 0.5 * params.d) *
                      std::exp(table->tail_rate * table->r_max);
  k.uniform_table_ = std::move(table);
  return k;
}

RadialKernel RadialKernel::indicator(double radius) {
  if (!(radius > 0.0))
    throw std::invalid_argument("RadialKernel::indicator: radius must be > 0");
  RadialKernel k;
  k.kind_ = Kind::Indicator;
  k.radius_ = radius;
  return k;
}

double RadialKernel::evaluate(double r) const {
  switch (kind_) {
    case Kind::Green:
      return log_table_ ? log_table_->evaluate(r) : green_evaluate(*params_, r);
    case Kind::Mollified:
      return uniform_table_->evaluate(std::fabs(r));
    case Kind::Indicator:
      return std::fabs(r) < radius_ ? 1.0 : 0.0;
  }
  return 0.0;
}

double RadialKernel::decay_scale() const {
  if (params_) return params_->m;
  return 1.0 / radius_;
}

// ------------------------------------------------------------ FieldContext

FieldContext::FieldContext(const RadialKernel& k, const ChargeConfiguration& c,
                           double delta)
    : kernel(&k), config(&c), rescaled(false), z(1.0), delta_pos(delta) {}

FieldContext::FieldContext(const RadialKernel& k, const ChargeConfiguration& c,
                           double z_, bool rescaled_, double delta)
    : kernel(&k), config(&c), rescaled(rescaled_), z(z_), delta_pos(delta) {
  if (rescaled && !(z > 0.0))
    throw std::invalid_argument("FieldContext: rescale requires z > 0");
}

double FieldContext::charge(std::size_t j) const {
  double s = config->charges[j];
  return rescaled ? s / std::sqrt(z) : s;
}

double field_at(const FieldContext& ctx, std::span<const double> x) {
  const ChargeConfiguration& cfg = *ctx.config;
  const int d = cfg.d;
  const double scale = ctx.rescaled ? 1.0 / std::sqrt(ctx.z) : 1.0;
  double acc = 0.0;
  const double* pos = cfg.positions.data();
  for (std::size_t j = 0; j < cfg.size(); ++j, pos += d) {
    double q = 0.0;
    for (int k = 0; k < d; ++k) {
      double dx = x[k] - pos[k];
      q += dx * dx;
    }
    double r = std::sqrt(q);
    if (r < ctx.delta_pos && ctx.kernel->singular_at_origin())
      throw SingularFieldError("field_at: evaluation point within delta_pos of a particle");
    acc += cfg.charges[j] * ctx.kernel->evaluate(r);
  }
  return scale * acc;
}

// -------------------------------------------------- ConvolvedTestFunction

namespace {

// Angular kernel over the unit sphere: T_d(a) = e^{-a} int_{S^{d-1}} e^{a cos}
//   = (2 pi)^{d/2} a^{1-d/2} e^{-a} I_{d/2-1}(a), continuous at a = 0.
double angular_kernel(int d, double a) {
  if (a < 1e-8) return 2.0 * std::pow(M_PI, 0.5 * d) / std::tgamma(0.5 * d);
  return std::pow(2.0 * M_PI, 0.5 * d) * std::pow(a, 1.0 - 0.5 * d) *
         bessel_i_scaled(0.5 * d - 1.0, a);
}

// (K * bump)(x) at distance rho from the bump center:
//   A int_0^smax K(s) s^{d-1} exp(-(rho-s)^2/(2w^2)) T_d(s rho / w^2) ds.
double convolve_bump_radial(const RadialKernel& kernel, int d, double rho,
                            double width, double amplitude) {
  const double w = width;
  double smax = rho + 9.0 * w;
  if (kernel.kind() == RadialKernel::Kind::Indicator)
    smax = std::min(smax, kernel.indicator_radius());
  if (!(smax > 0.0)) return 0.0;

  std::vector<double> bp;
  bp.push_back(0.0);
  double first = std::min(w, smax) * 1e-4;
  for (double s = first; s < smax; s *= 1.45) bp.push_back(s);
  for (double s = std::max(0.0, rho - 9.0 * w); s < smax; s += 0.5 * w)
    if (s > 0.0) bp.push_back(s);
  if (kernel.kind() == RadialKernel::Kind::Indicator &&
      kernel.indicator_radius() < smax)
    bp.push_back(kernel.indicator_radius());
  bp.push_back(smax);
  std::sort(bp.begin(), bp.end());
  bp.erase(std::unique(bp.begin(), bp.end(),
                       [](double a, double b) { return b - a < 1e-14; }),
           bp.end());

  const double inv2w2 = 1.0 / (2.0 * w * w);
  auto integrand = [&](double s) {
    double diff = rho - s;
    return kernel.evaluate(s) * std::pow(s, d - 1.0) *
           std::exp(-diff * diff * inv2w2) * angular_kernel(d, s * rho / (w * w));
  };
  return amplitude * integrate_breakpoints(integrand, bp, 12);
}

}  // namespace

struct ConvolvedTestFunction::BumpProfile {
  std::vector<double> center;
  double width;
  double amplitude;
  const RadialKernel* kernel;
  int d;
  // Profiled mode: uniform table in rho.
  double step = 0.0;
  std::vector<double> table;

  double exact(double rho) const {
    return convolve_bump_radial(*kernel, d, rho, width, amplitude);
  }

  double value(double rho) const {
    if (table.empty()) return exact(rho);
    double u = rho / step;
    std::ptrdiff_t i = static_cast<std::ptrdiff_t>(u);
    if (i + 2 >= static_cast<std::ptrdiff_t>(table.size())) return exact(rho);
    double x = u - static_cast<double>(i);
    auto at = [&](std::ptrdiff_t j) { return table[j < 0 ? -j : j]; };
    double y0 = at(i - 1), y1 = at(i), y2 = at(i + 1), y3 = at(i + 2);
    double c0 = -x * (x - 1.0) * (x - 2.0) / 6.0;
    double c1 = (x + 1.0) * (x - 1.0) * (x - 2.0) / 2.0;
    double c2 = -(x + 1.0) * x * (x - 2.0) / 2.0;
    double c3 = (x + 1.0) * x * (x - 1.0) / 6.0;
    return c0 * y0 + c1 * y1 + c2 * y2 + c3 * y3;
  }
};

ConvolvedTestFunction::ConvolvedTestFunction(const ConvolvedTestFunction&) = default;
ConvolvedTestFunction::ConvolvedTestFunction(ConvolvedTestFunction&&) noexcept = default;
ConvolvedTestFunction& ConvolvedTestFunction::operator=(const ConvolvedTestFunction&) = default;
ConvolvedTestFunction& ConvolvedTestFunction::operator=(ConvolvedTestFunction&&) noexcept = default;
ConvolvedTestFunction::~ConvolvedTestFunction() = default;

ConvolvedTestFunction::ConvolvedTestFunction(const RadialKernel& kernel,
                                             const TestFunction& f, Mode mode,
                                             double profile_reach)
    : d_(f.dimension()), mode_(mode) {
  for (const TestFunction::Atom& atom : f.atoms()) {
    if (atom.kind != TestFunction::Atom::Kind::GaussianBump)
      throw std::invalid_argument(
          "ConvolvedTestFunction: only gaussian-bump atoms convolve; "
          "box indicators are not supported here");
    BumpProfile p;
    p.center = atom.center;
    p.width = atom.width;
    p.amplitude = atom.amplitude;
    p.kernel = &kernel;
    p.d = d_;
    if (mode == Mode::Profiled) {
      double reach = profile_reach > 0.0
                         ? profile_reach
                         : 60.0 / kernel.decay_scale() + 18.0 * atom.width;
      p.step = atom.width / 10.0;
      std::size_t n = static_cast<std::size_t>(reach / p.step) + 3;
      p.table.resize(n);
      for (std::size_t i = 0; i < n; ++i) p.table[i] = p.exact(i * p.step);
    }
    profiles_.push_back(std::move(p));
  }
}

double ConvolvedTestFunction::evaluate(std::span<const double> x) const {
  double acc = 0.0;
  for (const BumpProfile& p : profiles_) {
    double q = 0.0;
    for (int k = 0; k < d_; ++k) {
      double dx = x[k] - p.center[k];
      q += dx * dx;
    }
    acc += p.value(std::sqrt(q));
  }
  return acc;
}

double pair_field(const FieldContext& ctx, const ConvolvedTestFunction& kf) {
  const ChargeConfiguration& cfg = *ctx.config;
  double acc = 0.0;
  for (std::size_t j = 0; j < cfg.size(); ++j)
    acc += ctx.charge(j) * kf.evaluate(cfg.position(j));
  return acc;
}

double sample_field_pairing(const Box& box, double z, const ChargeLaw& law,
                            const ConvolvedTestFunction& kf, bool rescaled,
                            RngStream& rng) {
  if (!(z > 0.0)) throw std::domain_error("sample_field_pairing: z must be > 0");
  const int d = box.dimension();
  const std::uint64_t n = rng.poisson(z * box.volume());
  const double scale = rescaled ? 1.0 / std::sqrt(z) : 1.0;
  double acc = 0.0;
  double y[16];
  for (std::uint64_t j = 0; j < n; ++j) {
    for (int k = 0; k < d; ++k) y[k] = rng.uniform(box.lo[k], box.hi[k]);
    acc += law.sample(rng) * kf.evaluate({y, static_cast<std::size_t>(d)});
  }
  return scale * acc;
}

// ------------------------------------------------------------ FieldExponent

FieldExponent::FieldExponent(const Box& particle_box, const RadialKernel& kernel,
                             const TestFunction& f, double padding,
                             int panels_per_axis, int gl_order,
                             ConvolvedTestFunction::Mode mode)
    : domain_(particle_box.padded(padding)) {
  const int d = domain_.dimension();
  double extent = 0.0;
  for (int k = 0; k < d; ++k)
    extent = std::max(extent, domain_.hi[k] - domain_.lo[k]);
  if (panels_per_axis <= 0)
    panels_per_axis =
        std::max(8, static_cast<int>(std::ceil(extent * kernel.decay_scale() / 0.5)));

  double diag = 0.0;
  for (int k = 0; k < d; ++k) diag += (domain_.hi[k] - domain_.lo[k]) *
                                      (domain_.hi[k] - domain_.lo[k]);
  ConvolvedTestFunction conv(kernel, f, mode, std::sqrt(diag) * 1.2);

  auto fill = [&](int panels, std::vector<double>& weights, std::vector<double>& g) {
    TensorGrid grid = build_tensor_grid(domain_.lo, domain_.hi, panels, gl_order);
    weights = std::move(grid.weights);
    g.resize(weights.size());
    for (std::size_t i = 0; i < g.size(); ++i)
      g[i] = conv.evaluate({grid.point(i), static_cast<std::size_t>(d)});
  };
  fill(panels_per_axis, weights_fine_, g_fine_);
  fill(std::max(4, (2 * panels_per_axis) / 3), weights_coarse_, g_coarse_);
}

std::complex<double> FieldExponent::exponent_on(std::span<const double> g,
                                                std::span<const double> w,
                                                double z, const ChargeLaw& law,
                                                double t, bool rescaled) const {
  const double scale = rescaled ? 1.0 / std::sqrt(z) : 1.0;
  double re = 0.0, im = 0.0;
  for (const ChargeLaw::Atom& a : law.atoms()) {
    double c = t * a.value * scale;
    double racc = 0.0, iacc = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) {
      double phase = c * g[i];
      racc += w[i] * (std::cos(phase) - 1.0);
      iacc += w[i] * std::sin(phase);
    }
    re += a.prob * racc;
    im += a.prob * iacc;
  }
  return std::complex<double>(z * re, z * im);
}

std::complex<double> FieldExponent::exponent(double z, const ChargeLaw& law,
                                             double t, bool rescaled) const {
  return exponent_on(g_fine_, weights_fine_, z, law, t, rescaled);
}

std::complex<double> FieldExponent::cf(double z, const ChargeLaw& law, double t,
                                       bool rescaled) const {
  return std::exp(exponent(z, law, t, rescaled));
}

double FieldExponent::exponent_error(double z, const ChargeLaw& law, double t,
                                     bool rescaled) const {
  return std::abs(exponent(z, law, t, rescaled) -
                  exponent_on(g_coarse_, weights_coarse_, z, law, t, rescaled));
}

double FieldExponent::quadratic_form() const {
  double acc = 0.0;
  for (std::size_t i = 0; i < g_fine_.size(); ++i)
    acc += weights_fine_[i] * g_fine_[i] * g_fine_[i];
  return acc;
}

std::complex<double> field_char_analytic(const Box& box, double z,
                                         const ChargeLaw& law,
                                         const RadialKernel& kernel,
                                         const TestFunction& f, double t,
                                         bool rescaled, double padding,
                                         double abs_tol) {
  if (padding < 0.0) padding = 10.0 / kernel.decay_scale();
  if (t == 0.0) return 1.0;
  int panels = 0;
  for (int attempt = 0; attempt < 3; ++attempt) {
    FieldExponent ex(box, kernel, f, padding, panels, 6);
    if (ex.exponent_error(z, law, t, rescaled) < abs_tol)
      return ex.cf(z, law, t, rescaled);
    double extent = 0.0;
    for (int k = 0; k < box.dimension(); ++k)
      extent = std::max(extent, ex.domain().hi[k] - ex.domain().lo[k]);
    if (panels == 0)
      panels = 2 * std::max(8, static_cast<int>(std::ceil(
                                   extent * kernel.decay_scale() / 0.5)));
    else
      panels *= 2;
  }
  throw QuadratureError("field_char_analytic: exponent quadrature did not converge");
}

double free_covariance(const RadialKernel& kernel, const TestFunction& f,
                       const TestFunction& h, double z, const ChargeLaw& law,
                       double padding) {
  if (padding < 0.0) padding = 12.0 / kernel.decay_scale();
  const int d = f.dimension();
  Box sf = f.support_box();
  Box sh = h.support_box();
  std::vector<double> lo(d), hi(d);
  for (int k = 0; k < d; ++k) {
    lo[k] = std::min(sf.lo[k], sh.lo[k]) - padding;
    hi[k] = std::max(sf.hi[k], sh.hi[k]) + padding;
  }
  Box domain(lo, hi);
  double diag = 0.0;
  for (int k = 0; k < d; ++k)
    diag += (hi[k] - lo[k]) * (hi[k] - lo[k]);
  ConvolvedTestFunction cf_(kernel, f, ConvolvedTestFunction::Mode::Profiled,
                            std::sqrt(diag) * 1.2);
  ConvolvedTestFunction ch(kernel, h, ConvolvedTestFunction::Mode::Profiled,
                           std::sqrt(diag) * 1.2);
  double extent = 0.0;
  for (int k = 0; k < d; ++k) extent = std::max(extent, hi[k] - lo[k]);
  int panels = std::max(8, static_cast<int>(std::ceil(extent * kernel.decay_scale() / 0.5)));
  auto value_at = [&](int p) {
    TensorGrid grid = build_tensor_grid(domain.lo, domain.hi, p, 6);
    double acc = 0.0;
    for (std::size_t i = 0; i < grid.count(); ++i) {
      std::span<const double> x{grid.point(i), static_cast<std::size_t>(d)};
      acc += grid.weights[i] * cf_.evaluate(x) * ch.evaluate(x);
    }
    return acc;
  };
  double fine = value_at(panels);
  double coarse = value_at(std::max(4, (2 * panels) / 3));
  if (std::fabs(fine - coarse) > 1e-4 * (std::fabs(fine) + 1e-12))
    fine = value_at(2 * panels);
  return z * law.second_moment() * fine;
}

}  // namespace cpn
