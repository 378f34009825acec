#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "cpn/rng.hpp"
#include "cpn/stats.hpp"

using cpn::EstimatorAccumulator;
using cpn::RngStream;

TEST_CASE("merge with empty is identity; counts add") {
  EstimatorAccumulator a(16), e(16);
  RngStream r(1, 1);
  for (int i = 0; i < 64; ++i) a.add(r.next_double());
  auto m = EstimatorAccumulator::merge(a, e);
  CHECK(m.count() == 64);
  CHECK(m.mean() == doctest::Approx(a.mean()).epsilon(1e-15));
  EstimatorAccumulator b(16);
  for (int i = 0; i < 32; ++i) b.add(r.next_double());
  CHECK(EstimatorAccumulator::merge(a, b).count() == 96);
}

TEST_CASE("merged mean equals pooled mean to 1e-12 relative") {
  RngStream r(2, 0);
  std::vector<double> xs(4096);
  for (double& x : xs) x = r.uniform(-3.0, 7.0);
  EstimatorAccumulator a(64), b(64), whole(64);
  for (std::size_t i = 0; i < xs.size(); ++i) {
    whole.add(xs[i]);
    (i < 2048 ? a : b).add(xs[i]);
  }
  auto m = EstimatorAccumulator::merge(a, b);
  CHECK(std::fabs(m.mean() - whole.mean()) <= 1e-12 * std::fabs(whole.mean()));
  CHECK(std::fabs(m.variance() - whole.variance()) <=
        1e-12 * std::fabs(whole.variance()));
}

TEST_CASE("merge order over several accumulators does not change summaries") {
  RngStream r(3, 0);
  std::vector<EstimatorAccumulator> accs(5, EstimatorAccumulator(32));
  for (auto& acc : accs)
    for (int i = 0; i < 320; ++i) acc.add(r.next_normal());
  auto left = accs[0];
  for (int i = 1; i < 5; ++i) left = EstimatorAccumulator::merge(left, accs[i]);
  auto right = accs[4];
  for (int i = 3; i >= 0; --i) right = EstimatorAccumulator::merge(accs[i], right);
  CHECK(left.mean() == doctest::Approx(right.mean()).epsilon(1e-12));
  auto sl = left.summarize(), sr = right.summarize();
  CHECK(sl.stderr_ == doctest::Approx(sr.stderr_).epsilon(1e-12));
}

TEST_CASE("incompatible batch sizes are a logic error") {
  EstimatorAccumulator a(16), b(32);
  CHECK_THROWS_AS(EstimatorAccumulator::merge(a, b), std::logic_error);
}

TEST_CASE("constant input gives zero stderr") {
  EstimatorAccumulator a(8);
  for (int i = 0; i < 64; ++i) a.add(2.5);
  auto s = a.summarize();
  CHECK(s.mean == 2.5);
  CHECK(s.stderr_ == 0.0);
}

TEST_CASE("summarize requires two complete batches") {
  EstimatorAccumulator a(64);
  for (int i = 0; i < 65; ++i) a.add(1.0);
  CHECK_THROWS_AS(a.summarize(), std::domain_error);
}

TEST_CASE("batch-means stderr close to iid stderr on iid input") {
  RngStream r(4, 0);
  EstimatorAccumulator a(100);
  const int n = 100000;
  for (int i = 0; i < n; ++i) a.add(r.next_normal());
  auto s = a.summarize();
  double iid = std::sqrt(a.variance() / n);
  CHECK(s.stderr_ > 0.7 * iid);
  CHECK(s.stderr_ < 1.3 * iid);
}

TEST_CASE("batch-means stderr is stable under batch doubling on AR(1) input") {
  // x_{k+1} = rho x_k + noise; batch means see through the autocorrelation.
  RngStream r(5, 0);
  const double rho = 0.7;
  const int n = 200000;
  std::vector<double> xs(n);
  double x = 0.0;
  for (int i = 0; i < n; ++i) {
    x = rho * x + r.next_normal();
    xs[i] = x;
  }
  EstimatorAccumulator a(500), b(1000);
  for (double v : xs) {
    a.add(v);
    b.add(v);
  }
  double sa = a.summarize().stderr_;
  double sb = b.summarize().stderr_;
  // Sampling variability of the stderr itself: ~ se / sqrt(2 (B-1)).
  double wiggle = 3.0 * (sa / std::sqrt(2.0 * (a.complete_batches() - 1.0)) +
                         sb / std::sqrt(2.0 * (b.complete_batches() - 1.0)));
  CHECK(std::fabs(sa - sb) < wiggle);
  // And both must exceed the naive iid stderr by roughly 1/(1-rho).
  double iid = std::sqrt(a.variance() / n);
  CHECK(sa > 1.5 * iid);
}

TEST_CASE("ecf: t=0 exactly one; constant samples give exp(itc)") {
  std::vector<double> xs(200, 1.5);
  std::vector<double> ts{0.0, 0.7};
  auto pts = cpn::ecf_estimate(xs, ts);
  CHECK(pts[0].estimate.real() == 1.0);
  CHECK(pts[0].estimate.imag() == 0.0);
  CHECK(pts[0].ci_radius > 0.0);
  CHECK(pts[1].estimate.real() == doctest::Approx(std::cos(0.7 * 1.5)).epsilon(1e-14));
  CHECK(pts[1].estimate.imag() == doctest::Approx(std::sin(0.7 * 1.5)).epsilon(1e-14));
}

TEST_CASE("ecf needs at least 100 samples") {
  std::vector<double> xs(50, 0.0);
  std::vector<double> ts{0.0};
  CHECK_THROWS_AS(cpn::ecf_estimate(xs, ts), std::domain_error);
}

TEST_CASE("ecf of standard normal matches exp(-t^2/2) within CI") {
  RngStream r(6, 0);
  const int n = 100000;
  std::vector<double> xs(n);
  for (double& v : xs) v = r.next_normal();
  std::vector<double> ts;
  for (int i = -10; i <= 10; ++i) ts.push_back(0.3 * i);
  auto pts = cpn::ecf_estimate(xs, ts);
  for (std::size_t i = 0; i < ts.size(); ++i) {
    double want = std::exp(-0.5 * ts[i] * ts[i]);
    CHECK(std::fabs(pts[i].estimate.real() - want) < pts[i].ci_radius);
    CHECK(std::fabs(pts[i].estimate.imag()) < pts[i].ci_radius);
  }
}

TEST_CASE("pairwise sum matches plain sum") {
  RngStream r(7, 0);
  std::vector<double> xs(1001);
  double plain = 0.0;
  for (double& v : xs) {
    v = r.uniform(-1.0, 1.0);
    plain += v;
  }
  CHECK(cpn::pairwise_sum(xs) == doctest::Approx(plain).epsilon(1e-12));
}
