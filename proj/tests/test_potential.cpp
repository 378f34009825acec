#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "cpn/potential.hpp"
#include "cpn/quadrature.hpp"

using cpn::Box;
using cpn::ChargeConfiguration;
using cpn::InteractionDomain;
using cpn::KernelParams;
using cpn::Move;
using cpn::PotentialSpec;
using cpn::RadialKernel;
using cpn::RngStream;

namespace {

Box box2(double a, double b) { return Box({a, a}, {b, b}); }

ChargeConfiguration config_with(Box b, std::vector<std::vector<double>> ys,
                                std::vector<double> ss) {
  ChargeConfiguration c{std::move(b)};
  for (std::size_t i = 0; i < ys.size(); ++i) c.add(ys[i], ss[i]);
  return c;
}

}  // namespace

TEST_CASE("potential_value per variant; v(0) = 0 everywhere") {
  auto trig = PotentialSpec::trigonometric({{1.0, 1.0}});
  auto renorm = PotentialSpec::renormalized_cosine(2.0, 0.5);
  auto wall = PotentialSpec::hard_wall(2.0);
  auto trig_level = PotentialSpec::trigger(1.5);
  auto quad = PotentialSpec::quadratic();
  for (const auto* s : {&trig, &renorm, &wall, &trig_level, &quad})
    CHECK(cpn::potential_value(*s, 0.0) == 0.0);

  CHECK(cpn::potential_value(trig, M_PI) == doctest::Approx(-2.0));
  // Paper's hard-sphere density: v = 0 below 2, infinite at or above.
  CHECK(cpn::potential_value(wall, 1.9) == 0.0);
  CHECK(std::isinf(cpn::potential_value(wall, 2.1)));
  CHECK(std::isinf(cpn::potential_value(wall, 2.0)));
  CHECK(cpn::potential_value(trig_level, 1.4) == 0.0);
  CHECK(cpn::potential_value(trig_level, 1.6) == 1.0);
  CHECK(cpn::potential_value(quad, -3.0) == 9.0);
  CHECK(cpn::potential_value(renorm, M_PI / 2.0) ==
        doctest::Approx((std::cos(M_PI) - 1.0) / 0.5));

  CHECK_THROWS_AS(PotentialSpec::trigonometric({{1.0, 0.0}}), std::invalid_argument);
  CHECK_THROWS_AS(PotentialSpec::hard_wall(0.0), std::invalid_argument);
  CHECK_THROWS_AS(PotentialSpec::renormalized_cosine(1.0, 0.0),
                  std::invalid_argument);
}

TEST_CASE("interaction energy: empty configuration and hard-sphere geometry") {
  RadialKernel ball = RadialKernel::indicator(0.4);
  auto wall = PotentialSpec::hard_wall(2.0);
  InteractionDomain dom;
  dom.pad_lengths = 2.2;

  ChargeConfiguration empty{box2(0.0, 2.0)};
  CHECK(cpn::interaction_energy(empty, ball, wall, dom) == 0.0);

  // |y1 - y2| = 2.5 R: no overlap; 1.5 R: overlap, U = +inf.
  auto apart = config_with(box2(0.0, 2.0), {{0.5, 1.0}, {1.5, 1.0}}, {1.0, 1.0});
  CHECK(cpn::interaction_energy(apart, ball, wall, dom) == 0.0);
  auto close = config_with(box2(0.0, 2.0), {{0.7, 1.0}, {1.3, 1.0}}, {1.0, 1.0});
  CHECK(std::isinf(cpn::interaction_energy(close, ball, wall, dom)));
}

TEST_CASE("hard spheres: grid threshold rule agrees with the pairwise rule") {
  RadialKernel ball = RadialKernel::indicator(0.4);
  auto wall = PotentialSpec::hard_wall(2.0);
  InteractionDomain dom;
  dom.pad_lengths = 2.2;
  dom.base_h = 0.08 / ball.decay_scale();
  dom.max_depth = 4;
  RngStream rng(41, 0);
  int overlaps = 0;
  int done = 0;
  while (done < 500) {
    double y1[2] = {rng.uniform(0.0, 2.0), rng.uniform(0.0, 2.0)};
    double y2[2] = {rng.uniform(0.0, 2.0), rng.uniform(0.0, 2.0)};
    double dist = std::hypot(y1[0] - y2[0], y1[1] - y2[1]);
    // The boundary set has measure zero; skip a thin shell around it so the
    // finite grid and the exact rule are comparing the same configuration.
    if (std::fabs(dist - 0.8) < 0.03) continue;
    ++done;
    auto c = config_with(box2(0.0, 2.0), {{y1[0], y1[1]}, {y2[0], y2[1]}},
                         {1.0, 1.0});
    double exact = cpn::interaction_energy(c, ball, wall, dom);
    double grid = cpn::interaction_energy_quadrature(c, ball, wall, dom);
    if (std::isinf(exact)) ++overlaps;
    CHECK(std::isinf(exact) == std::isinf(grid));
    if (!std::isinf(exact)) CHECK(grid == 0.0);
  }
  CHECK(overlaps > 50);  // the draw actually exercises both branches
}

TEST_CASE("single-particle trigonometric U: grid route vs radial route, 1e-6") {
  KernelParams params(2, 1.0);
  RadialKernel kernel = RadialKernel::green_direct(params);
  const double alpha = 2.0, s = 1.0;
  auto spec = PotentialSpec::trigonometric({{1.0, alpha}});
  auto c = config_with(box2(0.0, 2.0), {{1.0, 1.0}}, {s});
  InteractionDomain dom;
  dom.max_depth = 16;
  double grid = cpn::interaction_energy(c, kernel, spec, dom);
  std::vector<PotentialSpec::TrigTerm> terms{{1.0, alpha * s}};
  double sphere = 2.0 * M_PI;
  double radial = sphere * cpn::radial_trig_energy(params, terms);
  CHECK(std::fabs(grid - radial) < 1e-6 * std::fabs(radial));
}

TEST_CASE("U: permutation invariance (exact) and translation covariance") {
  KernelParams params(2, 1.0);
  RadialKernel kernel = RadialKernel::green(params);
  auto spec = PotentialSpec::trigonometric({{0.7, 1.0}, {0.3, 2.5}});
  InteractionDomain dom;
  dom.pad_lengths = 5.0;
  dom.max_depth = 6;
  dom.base_h = 0.15;
  RngStream rng(43, 0);
  auto base = config_with(box2(0.0, 2.0),
                          {{0.3, 1.1}, {1.7, 0.4}, {0.9, 1.9}, {1.2, 1.2}},
                          {1.0, -1.0, 1.0, -1.0});
  double u0 = cpn::interaction_energy(base, kernel, spec, dom);
  CHECK(std::isfinite(u0));
  for (int rep = 0; rep < 100; ++rep) {
    ChargeConfiguration shuffled{base.box};
    std::vector<std::size_t> order{0, 1, 2, 3};
    for (std::size_t k = 3; k > 0; --k)
      std::swap(order[k], order[rng.next_u64() % (k + 1)]);
    for (std::size_t j : order) shuffled.add(base.position(j), base.charges[j]);
    CHECK(cpn::interaction_energy(shuffled, kernel, spec, dom) == u0);
  }
  // Shift particles and box together.
  ChargeConfiguration moved{box2(0.5, 2.5)};
  for (std::size_t j = 0; j < base.size(); ++j) {
    std::vector<double> y{base.positions[j * 2] + 0.5,
                          base.positions[j * 2 + 1] + 0.5};
    moved.add(y, base.charges[j]);
  }
  double u1 = cpn::interaction_energy(moved, kernel, spec, dom);
  CHECK(u1 == doctest::Approx(u0).epsilon(1e-10));
}

TEST_CASE("U finite for trigonometric specs on random configurations") {
  KernelParams params(2, 1.0);
  RadialKernel kernel = RadialKernel::green(params);
  auto spec = PotentialSpec::trigonometric({{1.0, 3.0}});
  InteractionDomain dom;
  dom.pad_lengths = 6.0;
  dom.max_depth = 8;
  RngStream rng(47, 0);
  for (int rep = 0; rep < 3; ++rep) {
    auto c = cpn::sample_configuration(box2(0.0, 2.0), 1.5,
                                       cpn::ChargeLaw::two_point_symmetric(1.0), rng);
    CHECK(std::isfinite(cpn::interaction_energy(c, kernel, spec, dom)));
  }
}

TEST_CASE("trigger potential: single-particle U equals the level-set ball volume") {
  KernelParams params(2, 1.0);
  RadialKernel kernel = RadialKernel::green_direct(params);
  const double level = 0.3;
  auto spec = PotentialSpec::trigger(level);
  auto c = config_with(box2(0.0, 2.0), {{1.0, 1.0}}, {1.0});
  InteractionDomain dom;
  dom.max_depth = 12;
  double grid = cpn::interaction_energy(c, kernel, spec, dom);
  // G(r) >= level iff r <= r_level; bisect the monotone kernel.
  double lo = 1e-6, hi = 10.0;
  for (int i = 0; i < 200; ++i) {
    double mid = 0.5 * (lo + hi);
    (cpn::green_evaluate(params, mid) >= level ? lo : hi) = mid;
  }
  double want = M_PI * lo * lo;
  CHECK(grid == doctest::Approx(want).epsilon(1e-3));
}

TEST_CASE("quadratic potential: kernel validity and exact indicator values") {
  auto quad = PotentialSpec::quadratic();
  KernelParams params(2, 1.0);
  InteractionDomain dom;
  dom.pad_lengths = 3.0;
  auto c = config_with(box2(0.0, 2.0), {{1.0, 1.0}}, {1.5});
  CHECK_THROWS_AS(
      cpn::interaction_energy(c, RadialKernel::green(params), quad, dom),
      std::invalid_argument);

  // Indicator kernel: U = s^2 * pi R^2 for one particle.
  RadialKernel ball = RadialKernel::indicator(0.5);
  dom.max_depth = 10;
  dom.base_h = 0.02;
  double u1 = cpn::interaction_energy(c, ball, quad, dom);
  CHECK(u1 == doctest::Approx(1.5 * 1.5 * M_PI * 0.25).epsilon(1e-4));

  // Two overlapping unit charges: U = 2 pi R^2 + 2 * lens(dist).
  double dist = 0.6, R = 0.5;
  auto c2 = config_with(box2(0.0, 2.0), {{0.7, 1.0}, {1.3, 1.0}}, {1.0, 1.0});
  double lens = 2.0 * R * R * std::acos(dist / (2.0 * R)) -
                0.5 * dist * std::sqrt(4.0 * R * R - dist * dist);
  double u2 = cpn::interaction_energy(c2, ball, quad, dom);
  CHECK(u2 == doctest::Approx(2.0 * M_PI * R * R + 2.0 * lens).epsilon(1e-3));

  // Mollified kernel: single particle, U = s^2 int G_eps^2.
  cpn::MollifierParams eps(0.5);
  RadialKernel moll = RadialKernel::mollified(params, eps);
  InteractionDomain dm;
  dm.pad_lengths = 8.0;
  auto breaks = cpn::geometric_breakpoints(1e-3, 20.0, 1.3, true);
  double radial = 2.0 * M_PI *
                  cpn::integrate_breakpoints(
                      [&](double r) {
                        double g = cpn::green_mollified(params, eps, r);
                        return g * g * r;
                      },
                      breaks, 12);
  double um = cpn::interaction_energy(c, moll, quad, dm);
  CHECK(um == doctest::Approx(1.5 * 1.5 * radial).epsilon(1e-3));
}

TEST_CASE("delta_energy: null displacement, insertion into empty, reversibility") {
  KernelParams params(2, 1.0);
  RadialKernel kernel = RadialKernel::green(params);
  auto spec = PotentialSpec::trigonometric({{1.0, 2.0}});
  InteractionDomain dom;
  dom.pad_lengths = 6.0;
  dom.max_depth = 8;

  auto c = config_with(box2(0.0, 2.0), {{0.6, 0.6}, {1.4, 1.5}}, {1.0, -1.0});
  CHECK(cpn::delta_energy(c, kernel, spec, dom,
                          Move::displace(0, {0.6, 0.6})) == 0.0);

  ChargeConfiguration empty{box2(0.0, 2.0)};
  double du = cpn::delta_energy(empty, kernel, spec, dom, Move::insert({1.0, 1.0}, 1.0));
  auto single = config_with(box2(0.0, 2.0), {{1.0, 1.0}}, {1.0});
  double u_single = cpn::interaction_energy(single, kernel, spec, dom);
  CHECK(du == doctest::Approx(u_single).epsilon(1e-6));

  // Insert then delete the same particle: exact negatives.
  double d_ins = cpn::delta_energy(c, kernel, spec, dom, Move::insert({1.0, 0.9}, 1.0));
  auto c_plus = cpn::apply_move(c, Move::insert({1.0, 0.9}, 1.0));
  double d_del = cpn::delta_energy(c_plus, kernel, spec, dom,
                                   Move::erase(c_plus.size() - 1));
  CHECK(d_del == doctest::Approx(-d_ins).epsilon(1e-12));

  CHECK_THROWS_AS(cpn::delta_energy(c, kernel, spec, dom, Move::erase(5)),
                  std::logic_error);
}

TEST_CASE("delta_energy tracks the full difference U(eta') - U(eta)") {
  KernelParams params(2, 1.0);
  RadialKernel kernel = RadialKernel::green(params);
  auto spec = PotentialSpec::trigonometric({{1.0, 2.0}});
  InteractionDomain dom;
  dom.pad_lengths = 8.0;
  dom.max_depth = 8;
  auto c = config_with(box2(0.0, 2.0), {{0.6, 0.6}, {1.4, 1.5}}, {1.0, -1.0});
  for (const Move& mv :
       {Move::insert({0.9, 1.2}, -1.0), Move::erase(1),
        Move::displace(0, {1.1, 0.5}), Move::recharge(0, -1.0)}) {
    double du = cpn::delta_energy(c, kernel, spec, dom, mv);
    double full = cpn::interaction_energy(cpn::apply_move(c, mv), kernel, spec, dom) -
                  cpn::interaction_energy(c, kernel, spec, dom);
    CHECK_MESSAGE(std::fabs(du - full) < 2e-4,
                  "move kind=", static_cast<int>(mv.kind), " du=", du,
                  " full=", full);
  }
}

TEST_CASE("hard-sphere delta: overlap insert is +inf, removing it is -inf") {
  RadialKernel ball = RadialKernel::indicator(0.4);
  auto wall = PotentialSpec::hard_wall(2.0);
  InteractionDomain dom;
  dom.pad_lengths = 2.2;
  auto c = config_with(box2(0.0, 2.0), {{1.0, 1.0}}, {1.0});
  double du = cpn::delta_energy(c, ball, wall, dom, Move::insert({1.2, 1.0}, 1.0));
  CHECK(std::isinf(du));
  CHECK(du > 0.0);
  double ok = cpn::delta_energy(c, ball, wall, dom, Move::insert({1.9, 1.9}, 1.0));
  CHECK(ok == 0.0);
}

TEST_CASE("renorm normalizer: trivial alpha, range, errors") {
  KernelParams params(2, 1.0);
  auto law = cpn::ChargeLaw::two_point_symmetric(1.0);
  CHECK(cpn::renorm_normalizer(2.0, 0.0, law, params) == 1.0);
  double n1 = cpn::renorm_normalizer(1.0, 5.0, law, params);
  CHECK(n1 > 0.0);
  CHECK(n1 <= 1.0);
  CHECK_THROWS_AS(
      cpn::renorm_normalizer(1.0, 5.0, cpn::ChargeLaw::point_mass(1.0), params),
      std::domain_error);
  CHECK_THROWS_AS(cpn::renorm_normalizer(0.0, 5.0, law, params), std::domain_error);
}

TEST_CASE("renorm normalizer: resolution self-convergence to 1e-6") {
  KernelParams params(2, 1.0);
  auto law = cpn::ChargeLaw::two_point_symmetric(1.0);
  for (double z : {1.0, 100.0}) {
    double coarse = cpn::renorm_normalizer(z, 5.0, law, params, 1.0);
    double fine = cpn::renorm_normalizer(z, 5.0, law, params, 0.5);
    CHECK(std::fabs(coarse - fine) < 1e-6 * std::fabs(fine));
  }
}

TEST_CASE("renorm normalizer decreases along an increasing z grid") {
  KernelParams params(2, 1.0);
  auto law = cpn::ChargeLaw::two_point_symmetric(1.0);
  double prev = 2.0;
  for (double z : {1.0, 10.0, 100.0, 1000.0, 10000.0}) {
    double n = cpn::renorm_normalizer(z, 5.0, law, params);
    CHECK(n < prev);
    prev = n;
  }
  CHECK(cpn::renorm_normalizer(100.0, 5.0, law, params) <
        cpn::renorm_normalizer(1.0, 5.0, law, params));
}
