#include "cpn/noise.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "cpn/quadrature.hpp"

namespace cpn {

// ---------------------------------------------------------------- Box

Box::Box(std::vector<double> lo_, std::vector<double> hi_)
    : lo(std::move(lo_)), hi(std::move(hi_)) {
  if (lo.size() != hi.size() || lo.empty())
    throw std::invalid_argument("Box: corner dimension mismatch");
  for (std::size_t k = 0; k < lo.size(); ++k)
    if (!(lo[k] < hi[k])) throw std::invalid_argument("Box: need lo < hi per axis");
  if (!std::isfinite(volume()) || !(volume() > 0.0))
    throw std::invalid_argument("Box: volume must be positive and finite");
}

double Box::volume() const {
  double v = 1.0;
  for (std::size_t k = 0; k < lo.size(); ++k) v *= hi[k] - lo[k];
  return v;
}

bool Box::contains(std::span<const double> x) const {
  if (x.size() != lo.size()) return false;
  for (std::size_t k = 0; k < lo.size(); ++k)
    if (x[k] < lo[k] || x[k] > hi[k]) return false;
  return true;
}

Box Box::padded(double pad) const {
  Box b = *this;
  for (std::size_t k = 0; k < lo.size(); ++k) {
    b.lo[k] -= pad;
    b.hi[k] += pad;
  }
  return b;
}

Box Box::scaled(double alpha) const {
  Box b = *this;
  for (std::size_t k = 0; k < lo.size(); ++k) {
    b.lo[k] *= alpha;
    b.hi[k] *= alpha;
    if (b.lo[k] > b.hi[k]) std::swap(b.lo[k], b.hi[k]);
  }
  return b;
}

// ---------------------------------------------------------------- ChargeLaw

ChargeLaw::ChargeLaw(Kind kind, std::vector<Atom> atoms)
    : kind_(kind), atoms_(std::move(atoms)) {
  if (atoms_.empty()) throw std::invalid_argument("ChargeLaw: empty support");
  double total = 0.0;
  support_bound_ = 0.0;
  for (const Atom& a : atoms_) {
    if (a.prob < 0.0) throw std::invalid_argument("ChargeLaw: negative probability");
    total += a.prob;
    support_bound_ = std::max(support_bound_, std::fabs(a.value));
  }
  if (std::fabs(total - 1.0) > 1e-12)
    throw std::invalid_argument("ChargeLaw: probabilities must sum to 1");
  cumulative_.reserve(atoms_.size());
  double c = 0.0;
  for (const Atom& a : atoms_) {
    c += a.prob;
    cumulative_.push_back(c);
  }
  cumulative_.back() = 1.0;
  // Symmetry: every (s, p) must have a matching (-s, p).
  symmetric_ = true;
  for (const Atom& a : atoms_) {
    double want = -a.value;
    double got = 0.0;
    for (const Atom& b : atoms_)
      if (std::fabs(b.value - want) <= 1e-12 * std::max(1.0, std::fabs(want)))
        got += b.prob;
    if (std::fabs(got - a.prob) > 1e-12) {
      symmetric_ = false;
      break;
    }
  }
}

ChargeLaw ChargeLaw::two_point_symmetric(double c) {
  if (!(c > 0.0)) throw std::invalid_argument("two_point_symmetric: c must be > 0");
  return ChargeLaw(Kind::TwoPointSymmetric, {{-c, 0.5}, {c, 0.5}});
}

ChargeLaw ChargeLaw::point_mass(double c) {
  return ChargeLaw(Kind::PointMass, {{c, 1.0}});
}

ChargeLaw ChargeLaw::discrete(std::vector<double> values, std::vector<double> probs) {
  if (values.size() != probs.size() || values.empty())
    throw std::invalid_argument("discrete: values/probs mismatch");
  std::vector<Atom> atoms;
  atoms.reserve(values.size());
  for (std::size_t i = 0; i < values.size(); ++i)
    atoms.push_back({values[i], probs[i]});
  return ChargeLaw(Kind::Discrete, std::move(atoms));
}

double ChargeLaw::moment(int k) const {
  double m = 0.0;
  for (const Atom& a : atoms_) m += a.prob * std::pow(a.value, k);
  return m;
}

double ChargeLaw::sample(RngStream& rng) const {
  double u = rng.next_double();
  for (std::size_t i = 0; i < cumulative_.size(); ++i)
    if (u < cumulative_[i]) return atoms_[i].value;
  return atoms_.back().value;
}

std::string ChargeLaw::describe() const {
  char buf[64];
  std::ostringstream os;
  switch (kind_) {
    case Kind::TwoPointSymmetric:
      std::snprintf(buf, sizeof buf, "two_point_symmetric %.17g", support_bound_);
      os << buf;
      break;
    case Kind::PointMass:
      std::snprintf(buf, sizeof buf, "point_mass %.17g", atoms_[0].value);
      os << buf;
      break;
    case Kind::Discrete:
      os << "discrete";
      for (const Atom& a : atoms_) {
        std::snprintf(buf, sizeof buf, " %.17g:%.17g", a.value, a.prob);
        os << buf;
      }
      break;
  }
  return os.str();
}

ChargeLaw ChargeLaw::parse(const std::string& descriptor) {
  std::istringstream is(descriptor);
  std::string kind;
  is >> kind;
  if (kind == "two_point_symmetric") {
    double c;
    if (!(is >> c)) throw std::invalid_argument("law parse: missing c");
    return two_point_symmetric(c);
  }
  if (kind == "point_mass") {
    double c;
    if (!(is >> c)) throw std::invalid_argument("law parse: missing c");
    return point_mass(c);
  }
  if (kind == "discrete") {
    std::vector<double> values, probs;
    std::string tok;
    while (is >> tok) {
      auto colon = tok.find(':');
      if (colon == std::string::npos)
        throw std::invalid_argument("law parse: expected value:prob");
      values.push_back(std::stod(tok.substr(0, colon)));
      probs.push_back(std::stod(tok.substr(colon + 1)));
    }
    return discrete(std::move(values), std::move(probs));
  }
  throw std::invalid_argument("law parse: unknown kind '" + kind + "'");
}

// ------------------------------------------------- ChargeConfiguration

ChargeConfiguration::ChargeConfiguration(Box box_)
    : d(box_.dimension()), box(std::move(box_)) {}

void ChargeConfiguration::add(std::span<const double> y, double s) {
  if (static_cast<int>(y.size()) != d)
    throw std::invalid_argument("ChargeConfiguration::add: dimension mismatch");
  if (!box.contains(y))
    throw std::invalid_argument("ChargeConfiguration::add: position outside box");
  positions.insert(positions.end(), y.begin(), y.end());
  charges.push_back(s);
}

void ChargeConfiguration::remove(std::size_t j) {
  const std::size_t n = size();
  if (j >= n) throw std::logic_error("ChargeConfiguration::remove: bad index");
  for (int k = 0; k < d; ++k)
    positions[j * d + k] = positions[(n - 1) * d + k];
  charges[j] = charges[n - 1];
  positions.resize((n - 1) * d);
  charges.pop_back();
}

ChargeConfiguration ChargeConfiguration::merge(const ChargeConfiguration& a,
                                               const ChargeConfiguration& b) {
  if (a.d != b.d) throw std::invalid_argument("merge: dimension mismatch");
  std::vector<double> lo(a.d), hi(a.d);
  for (int k = 0; k < a.d; ++k) {
    lo[k] = std::min(a.box.lo[k], b.box.lo[k]);
    hi[k] = std::max(a.box.hi[k], b.box.hi[k]);
  }
  ChargeConfiguration out{Box(lo, hi)};
  out.positions = a.positions;
  out.positions.insert(out.positions.end(), b.positions.begin(), b.positions.end());
  out.charges = a.charges;
  out.charges.insert(out.charges.end(), b.charges.begin(), b.charges.end());
  return out;
}

void ChargeConfiguration::dump(std::ostream& os, double z,
                               const std::string& law_descriptor,
                               std::uint64_t seed, std::uint64_t stream_id) const {
  char buf[256];
  std::snprintf(buf, sizeof buf, "d %d n %zu z %.17g stream %llu %llu\n", d, size(),
                z, static_cast<unsigned long long>(seed),
                static_cast<unsigned long long>(stream_id));
  os << buf;
  os << "box";
  for (double v : box.lo) {
    std::snprintf(buf, sizeof buf, " %.17g", v);
    os << buf;
  }
  for (double v : box.hi) {
    std::snprintf(buf, sizeof buf, " %.17g", v);
    os << buf;
  }
  os << "\nlaw " << law_descriptor << "\n";
  for (std::size_t j = 0; j < size(); ++j) {
    std::snprintf(buf, sizeof buf, "%.17g", charges[j]);
    os << buf;
    for (int k = 0; k < d; ++k) {
      std::snprintf(buf, sizeof buf, " %.17g", positions[j * d + k]);
      os << buf;
    }
    os << "\n";
  }
}

ChargeConfiguration ChargeConfiguration::load(std::istream& is) {
  std::string tok;
  int d = 0;
  std::size_t n = 0;
  double z = 0.0;
  std::uint64_t seed = 0, id = 0;
  if (!(is >> tok >> d) || tok != "d")
    throw std::runtime_error("configuration load: bad header");
  if (!(is >> tok >> n) || tok != "n")
    throw std::runtime_error("configuration load: bad header");
  if (!(is >> tok >> z) || tok != "z")
    throw std::runtime_error("configuration load: bad header");
  if (!(is >> tok >> seed >> id) || tok != "stream")
    throw std::runtime_error("configuration load: bad header");
  if (!(is >> tok) || tok != "box")
    throw std::runtime_error("configuration load: bad box");
  std::vector<double> lo(d), hi(d);
  for (int k = 0; k < d; ++k) is >> lo[k];
  for (int k = 0; k < d; ++k) is >> hi[k];
  if (!(is >> tok) || tok != "law")
    throw std::runtime_error("configuration load: bad law line");
  std::string law_line;
  std::getline(is, law_line);
  ChargeConfiguration out{Box(lo, hi)};
  std::vector<double> y(d);
  for (std::size_t j = 0; j < n; ++j) {
    double s;
    if (!(is >> s)) throw std::runtime_error("configuration load: short file");
    for (int k = 0; k < d; ++k) is >> y[k];
    out.add(y, s);
  }
  return out;
}

// ------------------------------------------------------- TestFunction

namespace {

// int_lo^hi exp(-(x-c)^2 / (2 w^2)) dx
double gaussian_axis_integral(double c, double w, double lo, double hi) {
  const double s = w * M_SQRT2;
  return w * std::sqrt(0.5 * M_PI) *
         (std::erf((hi - c) / s) - std::erf((lo - c) / s));
}

double overlap_length(double alo, double ahi, double blo, double bhi) {
  return std::max(0.0, std::min(ahi, bhi) - std::max(alo, blo));
}

}  // namespace

TestFunction::TestFunction(std::vector<Atom> atoms) : atoms_(std::move(atoms)) {
  if (atoms_.empty()) throw std::invalid_argument("TestFunction: empty");
  int d = dimension();
  for (const Atom& a : atoms_) {
    int ad = a.kind == Atom::Kind::GaussianBump ? static_cast<int>(a.center.size())
                                                : static_cast<int>(a.lo.size());
    if (ad != d) throw std::invalid_argument("TestFunction: mixed dimensions");
  }
}

int TestFunction::dimension() const {
  const Atom& a = atoms_.front();
  return a.kind == Atom::Kind::GaussianBump ? static_cast<int>(a.center.size())
                                            : static_cast<int>(a.lo.size());
}

TestFunction TestFunction::gaussian_bump(std::vector<double> center, double width,
                                         double amplitude) {
  if (!(width > 0.0)) throw std::invalid_argument("gaussian_bump: width must be > 0");
  Atom a;
  a.kind = Atom::Kind::GaussianBump;
  a.center = std::move(center);
  a.width = width;
  a.amplitude = amplitude;
  return TestFunction({std::move(a)});
}

TestFunction TestFunction::box_indicator(Box box) {
  Atom a;
  a.kind = Atom::Kind::BoxIndicator;
  a.lo = box.lo;
  a.hi = box.hi;
  return TestFunction({std::move(a)});
}

TestFunction TestFunction::finite_sum(std::vector<TestFunction> parts) {
  if (parts.empty()) throw std::invalid_argument("finite_sum: empty");
  std::vector<Atom> atoms;
  for (TestFunction& p : parts)
    for (Atom& a : p.atoms_) atoms.push_back(std::move(a));
  return TestFunction(std::move(atoms));
}

double TestFunction::evaluate(std::span<const double> x) const {
  double v = 0.0;
  for (const Atom& a : atoms_) {
    if (a.kind == Atom::Kind::GaussianBump) {
      double q = 0.0;
      for (std::size_t k = 0; k < a.center.size(); ++k) {
        double dx = x[k] - a.center[k];
        q += dx * dx;
      }
      v += a.amplitude * std::exp(-0.5 * q / (a.width * a.width));
    } else {
      bool inside = true;
      for (std::size_t k = 0; k < a.lo.size(); ++k)
        if (x[k] < a.lo[k] || x[k] > a.hi[k]) {
          inside = false;
          break;
        }
      if (inside) v += 1.0;
    }
  }
  return v;
}

double TestFunction::integral(const Box& domain) const {
  double total = 0.0;
  for (const Atom& a : atoms_) {
    if (a.kind == Atom::Kind::GaussianBump) {
      double v = a.amplitude;
      for (std::size_t k = 0; k < a.center.size(); ++k)
        v *= gaussian_axis_integral(a.center[k], a.width, domain.lo[k], domain.hi[k]);
      total += v;
    } else {
      double v = 1.0;
      for (std::size_t k = 0; k < a.lo.size(); ++k)
        v *= overlap_length(a.lo[k], a.hi[k], domain.lo[k], domain.hi[k]);
      total += v;
    }
  }
  return total;
}

double TestFunction::integral_sq(const Box& domain) const {
  // Expand (sum_i a_i)^2; every cross term has a closed form.
  double total = 0.0;
  const int d = dimension();
  for (const Atom& a : atoms_) {
    for (const Atom& b : atoms_) {
      if (a.kind == Atom::Kind::GaussianBump && b.kind == Atom::Kind::GaussianBump) {
        // Product of two Gaussians: Gaussian with width w* and shifted center.
        double wa2 = a.width * a.width, wb2 = b.width * b.width;
        double wsum = wa2 + wb2;
        double wstar = std::sqrt(wa2 * wb2 / wsum);
        double pref = a.amplitude * b.amplitude;
        double v = 1.0;
        for (int k = 0; k < d; ++k) {
          double diff = a.center[k] - b.center[k];
          double cstar = (a.center[k] * wb2 + b.center[k] * wa2) / wsum;
          v *= std::exp(-0.5 * diff * diff / wsum) *
               gaussian_axis_integral(cstar, wstar, domain.lo[k], domain.hi[k]);
        }
        total += pref * v;
      } else if (a.kind == Atom::Kind::BoxIndicator &&
                 b.kind == Atom::Kind::BoxIndicator) {
        double v = 1.0;
        for (int k = 0; k < d; ++k) {
          double lo = std::max({a.lo[k], b.lo[k], domain.lo[k]});
          double hi = std::min({a.hi[k], b.hi[k], domain.hi[k]});
          v *= std::max(0.0, hi - lo);
        }
        total += v;
      } else {
        const Atom& g = a.kind == Atom::Kind::GaussianBump ? a : b;
        const Atom& ind = a.kind == Atom::Kind::GaussianBump ? b : a;
        double v = g.amplitude;
        for (int k = 0; k < d; ++k) {
          double lo = std::max(ind.lo[k], domain.lo[k]);
          double hi = std::min(ind.hi[k], domain.hi[k]);
          if (!(hi > lo)) {
            v = 0.0;
            break;
          }
          v *= gaussian_axis_integral(g.center[k], g.width, lo, hi);
        }
        total += v;
      }
    }
  }
  return total;
}

Box TestFunction::support_box() const {
  const int d = dimension();
  std::vector<double> lo(d, 1e300), hi(d, -1e300);
  for (const Atom& a : atoms_) {
    for (int k = 0; k < d; ++k) {
      if (a.kind == Atom::Kind::GaussianBump) {
        lo[k] = std::min(lo[k], a.center[k] - 8.5 * a.width);
        hi[k] = std::max(hi[k], a.center[k] + 8.5 * a.width);
      } else {
        lo[k] = std::min(lo[k], a.lo[k]);
        hi[k] = std::max(hi[k], a.hi[k]);
      }
    }
  }
  return Box(lo, hi);
}

// ------------------------------------------------------- operations

ChargeConfiguration sample_configuration(const Box& box, double z,
                                         const ChargeLaw& law, RngStream& rng) {
  if (!(z > 0.0)) throw std::domain_error("sample_configuration: z must be > 0");
  const int d = box.dimension();
  const std::uint64_t n = rng.poisson(z * box.volume());
  ChargeConfiguration config{box};
  config.positions.reserve(n * d);
  config.charges.reserve(n);
  std::vector<double> y(d);
  for (std::uint64_t j = 0; j < n; ++j) {
    for (int k = 0; k < d; ++k) y[k] = rng.uniform(box.lo[k], box.hi[k]);
    config.positions.insert(config.positions.end(), y.begin(), y.end());
    config.charges.push_back(law.sample(rng));
  }
  return config;
}

double pair_noise(const ChargeConfiguration& config, const TestFunction& f) {
  double acc = 0.0;
  for (std::size_t j = 0; j < config.size(); ++j)
    acc += config.charges[j] * f.evaluate(config.position(j));
  return acc;
}

double sample_noise_pairing(const Box& box, double z, const ChargeLaw& law,
                            const TestFunction& f, RngStream& rng) {
  if (!(z > 0.0)) throw std::domain_error("sample_noise_pairing: z must be > 0");
  const int d = box.dimension();
  const std::uint64_t n = rng.poisson(z * box.volume());
  double acc = 0.0;
  double y[16];
  for (std::uint64_t j = 0; j < n; ++j) {
    for (int k = 0; k < d; ++k) y[k] = rng.uniform(box.lo[k], box.hi[k]);
    acc += law.sample(rng) * f.evaluate({y, static_cast<std::size_t>(d)});
  }
  return acc;
}

namespace {

std::complex<double> levy_exponent_over_box(const Box& box, double z,
                                            const ChargeLaw& law,
                                            const TestFunction& f, double t,
                                            double abs_tol, const char* context) {
  // sum_s p_s (e^{i t s f(x)} - 1), integrated by panel-doubling tensor GL.
  auto integrand_at = [&](const double* x, int d) {
    double fx = f.evaluate({x, static_cast<std::size_t>(d)});
    double re = 0.0, im = 0.0;
    for (const ChargeLaw::Atom& a : law.atoms()) {
      double phase = t * a.value * fx;
      re += a.prob * (std::cos(phase) - 1.0);
      im += a.prob * std::sin(phase);
    }
    return std::complex<double>(re, im);
  };
  const int d = box.dimension();
  std::complex<double> prev;
  int panels = 4;
  for (int level = 0;; ++level) {
    TensorGrid grid = build_tensor_grid(box.lo, box.hi, panels, 8);
    std::complex<double> acc = 0.0;
    for (std::size_t i = 0; i < grid.count(); ++i)
      acc += grid.weights[i] * integrand_at(grid.point(i), d);
    if (level > 0 && std::abs(acc - prev) * z < abs_tol) return z * acc;
    if (level >= 6)
      throw QuadratureError(std::string("characteristic-function quadrature did not "
                                        "converge: ") +
                            context);
    prev = acc;
    panels *= 2;
  }
}

}  // namespace

std::complex<double> noise_char_analytic(const Box& box, double z,
                                         const ChargeLaw& law,
                                         const TestFunction& f, double t,
                                         double abs_tol) {
  if (t == 0.0) return 1.0;
  // A single box indicator integrates exactly: f is 1 on the overlap, 0 off it.
  auto atoms = f.atoms();
  if (atoms.size() == 1 && atoms[0].kind == TestFunction::Atom::Kind::BoxIndicator) {
    double vol = 1.0;
    for (int k = 0; k < box.dimension(); ++k)
      vol *= overlap_length(atoms[0].lo[k], atoms[0].hi[k], box.lo[k], box.hi[k]);
    std::complex<double> per_charge = 0.0;
    for (const ChargeLaw::Atom& a : law.atoms())
      per_charge += a.prob * (std::exp(std::complex<double>(0.0, t * a.value)) - 1.0);
    return std::exp(z * vol * per_charge);
  }
  std::complex<double> ex =
      levy_exponent_over_box(box, z, law, f, t, abs_tol, "noise_char_analytic");
  return std::exp(ex);
}

Moments campbell_moments(const Box& box, double z, const ChargeLaw& law,
                         const TestFunction& f) {
  return Moments{z * law.mean() * f.integral(box),
                 z * law.second_moment() * f.integral_sq(box)};
}

}  // namespace cpn
