#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <sstream>
#include <vector>

#include "cpn/kernel.hpp"
#include "cpn/quadrature.hpp"
#include "cpn/special.hpp"
#include "oracles.hpp"

using cpn::KernelParams;
using cpn::KernelTable;
using cpn::MollifierParams;

namespace {

double rel_err(double got, double want) {
  return std::fabs(got - want) / std::fabs(want);
}

}  // namespace

TEST_CASE("bessel_k agrees with the standard library across orders") {
  for (double nu : {0.0, 0.5, 1.0, 1.5, 2.0, 2.5, 3.0}) {
    for (double x : {0.05, 0.3, 1.0, 2.0, 3.0, 7.0, 15.0, 25.0, 60.0}) {
      double want = std::cyl_bessel_k(nu, x);
      CHECK_MESSAGE(rel_err(cpn::bessel_k(nu, x), want) < 1e-12,
                    "nu=", nu, " x=", x);
    }
  }
}

TEST_CASE("bessel_i_scaled agrees with the standard library") {
  for (double nu : {0.0, 0.5, 1.0, 1.5, 2.0}) {
    for (double x : {0.01, 0.4, 2.0, 10.0, 50.0}) {
      double want = std::exp(-x) * std::cyl_bessel_i(nu, x);
      CHECK_MESSAGE(rel_err(cpn::bessel_i_scaled(nu, x), want) < 1e-10,
                    "nu=", nu, " x=", x);
    }
    // Large-argument branch against the asymptotic-stable identity
    // I_{1/2} scaled = (1 - e^{-2x}) / sqrt(2 pi x).
    double x = 900.0;
    double want_half = (1.0 - std::exp(-2.0 * x)) / std::sqrt(2.0 * M_PI * x);
    CHECK(rel_err(cpn::bessel_i_scaled(0.5, x), want_half) < 1e-9);
  }
}

TEST_CASE("d=2 elementary reduction: G = exp(-mr)/(2 pi r)") {
  for (double m : {0.5, 1.0, 2.0})
    for (double r : {0.01, 0.3, 1.0, 5.0}) {
      double want = std::exp(-m * r) / (2.0 * M_PI * r);
      CHECK(rel_err(cpn::green_evaluate(KernelParams(2, m), r), want) < 1e-13);
    }
  CHECK(cpn::green_evaluate(KernelParams(2, 1.0), 1.0) ==
        doctest::Approx(0.058549831524319168).epsilon(1e-12));
}

TEST_CASE("d=4 elementary reduction: G = m exp(-mr)(1+1/(mr))/(4 pi^2 r^2)") {
  for (double m : {0.5, 1.0, 2.0})
    for (double r : {0.05, 0.7, 2.0}) {
      double want =
          m * std::exp(-m * r) * (1.0 + 1.0 / (m * r)) / (4.0 * M_PI * M_PI * r * r);
      CHECK(rel_err(cpn::green_evaluate(KernelParams(4, m), r), want) < 1e-13);
    }
  double want = std::exp(-2.0) * 1.5 / (16.0 * M_PI * M_PI);
  CHECK(cpn::green_evaluate(KernelParams(4, 1.0), 2.0) ==
        doctest::Approx(want).epsilon(1e-12));
}

TEST_CASE("dimensional scaling identity G_{d,m}(r) = m^{d-1} G_{d,1}(m r)") {
  for (int d : {2, 3, 4, 5}) {
    for (double m : {0.25, 1.7}) {
      for (double r : {0.1, 1.0, 4.0}) {
        double lhs = cpn::green_evaluate(KernelParams(d, m), r);
        double rhs =
            std::pow(m, d - 1.0) * cpn::green_evaluate(KernelParams(d, 1.0), m * r);
        CHECK(rel_err(lhs, rhs) < 1e-13);
      }
    }
  }
}

TEST_CASE("green_evaluate rejects bad input") {
  CHECK_THROWS_AS(cpn::green_evaluate(KernelParams(2, 1.0), 0.0), std::domain_error);
  CHECK_THROWS_AS(cpn::green_evaluate(KernelParams(2, 1.0), -1.0), std::domain_error);
  CHECK_THROWS_AS(KernelParams(1, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(KernelParams(3, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(KernelParams(3, -2.0), std::invalid_argument);
}

TEST_CASE("closed form vs independent Fourier-inversion oracle") {
  // d in {2,3,4}, m in {0.5,1,2}, 20 log-spaced radii in [0.1/m, 10/m].
  for (int d : {2, 3, 4}) {
    for (double m : {0.5, 1.0, 2.0}) {
      KernelParams p(d, m);
      for (int i = 0; i < 20; ++i) {
        double r = (0.1 / m) * std::pow(100.0, i / 19.0);
        double want = cpn::oracle::green_fourier_inversion(p, r);
        CHECK_MESSAGE(rel_err(cpn::green_evaluate(p, r), want) < 1e-4,
                      "d=", d, " m=", m, " r=", r);
      }
    }
  }
}

TEST_CASE("closed form vs subordination oracle (tight)") {
  for (int d : {2, 3, 4, 5}) {
    KernelParams p(d, 1.0);
    for (double r : {0.05, 0.5, 2.0, 8.0})
      CHECK(rel_err(cpn::green_evaluate(p, r),
                    cpn::oracle::green_subordination(p, r)) < 1e-10);
  }
}

TEST_CASE("near-origin exponent is -(d-1) within 2%") {
  for (int d : {2, 3, 4}) {
    KernelParams p(d, 1.0);
    // Least-squares slope of log G vs log r over [1e-3, 1e-2]/m.
    std::vector<double> xs, ys;
    for (int i = 0; i < 12; ++i) {
      double r = 1e-3 * std::pow(10.0, i / 11.0);
      xs.push_back(std::log(r));
      ys.push_back(std::log(cpn::green_evaluate(p, r)));
    }
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
      mx += xs[i];
      my += ys[i];
    }
    mx /= xs.size();
    my /= ys.size();
    double sxy = 0, sxx = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
      sxy += (xs[i] - mx) * (ys[i] - my);
      sxx += (xs[i] - mx) * (xs[i] - mx);
    }
    double slope = sxy / sxx;
    CHECK(std::fabs(slope - (-(d - 1.0))) < 0.02 * (d - 1.0));
  }
}

TEST_CASE("fitted tail decay rate is -m within 2%") {
  // log G = a + b r + c log r over [8/m, 12/m]: the joint fit isolates the
  // exponential rate b from the algebraic prefactor, and b must be -m.
  for (int d : {2, 3, 4}) {
    for (double m : {0.5, 2.0}) {
      KernelParams p(d, m);
      const int n = 9;
      double A[3][3] = {};
      double rhs[3] = {};
      for (int i = 0; i < n; ++i) {
        double r = (8.0 + 0.5 * i) / m;
        double row[3] = {1.0, r, std::log(r)};
        double y = std::log(cpn::green_evaluate(p, r));
        for (int a = 0; a < 3; ++a) {
          rhs[a] += row[a] * y;
          for (int b = 0; b < 3; ++b) A[a][b] += row[a] * row[b];
        }
      }
      // Gaussian elimination on the 3x3 normal equations.
      for (int c = 0; c < 3; ++c) {
        int piv = c;
        for (int rr = c + 1; rr < 3; ++rr)
          if (std::fabs(A[rr][c]) > std::fabs(A[piv][c])) piv = rr;
        std::swap(A[c], A[piv]);
        std::swap(rhs[c], rhs[piv]);
        for (int rr = 0; rr < 3; ++rr) {
          if (rr == c) continue;
          double factor = A[rr][c] / A[c][c];
          for (int cc = 0; cc < 3; ++cc) A[rr][cc] -= factor * A[c][cc];
          rhs[rr] -= factor * rhs[c];
        }
      }
      double rate = rhs[1] / A[1][1];
      CHECK_MESSAGE(std::fabs(rate - (-m)) < 0.02 * m, "d=", d, " m=", m,
                    " rate=", rate);
    }
  }
}

TEST_CASE("G is locally integrable; G^2 is not square integrable at 0") {
  for (int d : {2, 3, 4}) {
    KernelParams p(d, 1.0);
    double sphere = 2.0 * std::pow(M_PI, 0.5 * d) / std::tgamma(0.5 * d);
    auto radial = [&](double cutoff, int power) {
      auto breaks = cpn::geometric_breakpoints(2.0 * cutoff, 1.0, 1.3, false);
      breaks.insert(breaks.begin(), cutoff);
      return sphere * cpn::integrate_breakpoints(
                          [&](double s) {
                            double g = cpn::green_evaluate(p, s);
                            return (power == 1 ? g : g * g) * std::pow(s, d - 1.0);
                          },
                          breaks, 16);
    };
    // int_{|x|<1} G dx is finite: shrinking the inner cutoff changes little.
    double m1 = radial(1e-4, 1), m2 = radial(1e-6, 1);
    CHECK(std::isfinite(m2));
    CHECK(std::fabs(m2 - m1) < 0.02 * std::fabs(m1));
    // int G^2 grows without bound as the cutoff shrinks: each cutoff decade
    // adds at least as much as the previous one (log growth in d=2, power
    // growth above).
    double v1 = radial(1e-2, 2), v2 = radial(1e-4, 2), v3 = radial(1e-6, 2);
    CHECK(v2 - v1 > 0.0);
    CHECK(v3 - v2 > 0.8 * (v2 - v1));
  }
}

TEST_CASE("green_derivative matches finite differences and is negative") {
  for (int d : {2, 3, 5}) {
    KernelParams p(d, 1.3);
    for (double r : {0.2, 1.0, 4.0}) {
      double h = 1e-5 * r;
      double fd = (cpn::green_evaluate(p, r + h) - cpn::green_evaluate(p, r - h)) /
                  (2.0 * h);
      double an = cpn::green_derivative(p, r);
      CHECK(an < 0.0);
      CHECK(rel_err(an, fd) < 1e-7);
    }
  }
}

TEST_CASE("mollified kernel: finite at zero, monotone, converges to G") {
  KernelParams p(2, 1.0);
  MollifierParams eps(0.01);
  double at0 = cpn::green_mollified(p, eps, 0.0);
  CHECK(std::isfinite(at0));
  CHECK(at0 > 0.0);
  for (double r : {0.05, 0.3, 1.0, 3.0})
    CHECK(cpn::green_mollified(p, eps, r) <= at0);
  // Pointwise mollifier convergence at r=1 (spec example tolerance 1e-3).
  CHECK(rel_err(cpn::green_mollified(p, eps, 1.0), cpn::green_evaluate(p, 1.0)) <
        1e-3);
  // Smaller epsilon gets closer.
  MollifierParams tight(0.001);
  CHECK(rel_err(cpn::green_mollified(p, tight, 1.0), cpn::green_evaluate(p, 1.0)) <
        1e-5);
  CHECK_THROWS_AS(MollifierParams(0.0), std::invalid_argument);
  CHECK_THROWS_AS(MollifierParams(-0.5), std::invalid_argument);
}

TEST_CASE("mollified kernel in d=3 and d=4 stays consistent with G") {
  for (int d : {3, 4}) {
    KernelParams p(d, 1.0);
    MollifierParams eps(0.005);
    CHECK(rel_err(cpn::green_mollified(p, eps, 1.0),
                  cpn::green_evaluate(p, 1.0)) < 1e-3);
  }
}

TEST_CASE("table: node exactness, midpoint 1e-6, asymptote and tail queries") {
  KernelParams p(3, 1.0);
  KernelTable table = KernelTable::build(p, 1e-3, 40.0, 256);
  // Grid nodes come back exactly.
  for (int i : {0, 1, 100, 255})
    CHECK(table.evaluate(table.radius(i)) == table.value(i));
  // Midpoints within 1e-6 relative of direct evaluation.
  double worst = 0.0;
  for (int i = 0; i + 1 < table.n_points(); ++i) {
    double r = std::sqrt(table.radius(i) * table.radius(i + 1));
    worst = std::max(worst, rel_err(table.evaluate(r), cpn::green_evaluate(p, r)));
  }
  CHECK(worst < 1e-6);
  // Below r_min: the r^{-(d-1)} asymptote, continuous at r_min.
  double just_below = table.evaluate(0.9999e-3);
  CHECK(rel_err(just_below, cpn::green_evaluate(p, 0.9999e-3)) < 1e-4);
  // Above r_max: positive, smaller than the r_max value, and the matched
  // tail form tracks G to about a percent even at 2 r_max.
  double tail = table.evaluate(80.0);
  CHECK(tail > 0.0);
  CHECK(tail < table.evaluate(40.0 - 1e-12));
  CHECK(rel_err(tail, cpn::green_evaluate(p, 80.0)) < 1e-2);
}

TEST_CASE("table construction errors") {
  KernelParams p(2, 1.0);
  CHECK_THROWS_AS(KernelTable::build(p, 0.0, 1.0, 64), std::invalid_argument);
  CHECK_THROWS_AS(KernelTable::build(p, 2.0, 1.0, 64), std::invalid_argument);
  CHECK_THROWS_AS(KernelTable::build(p, 0.1, 1.0, 8), std::invalid_argument);
}

TEST_CASE("table dump/load round trip is exact") {
  KernelParams p(2, 0.7);
  KernelTable table = KernelTable::build(p, 0.01, 30.0, 64);
  std::stringstream ss;
  table.dump(ss);
  KernelTable back = KernelTable::load(ss);
  CHECK(back.n_points() == table.n_points());
  for (int i = 0; i < table.n_points(); ++i)
    CHECK(back.value(i) == table.value(i));
  std::stringstream again;
  back.dump(again);
  std::stringstream first;
  table.dump(first);
  CHECK(again.str() == first.str());
}
