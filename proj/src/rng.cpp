#include "cpn/rng.hpp"

#include <cmath>
#include <stdexcept>

namespace cpn {

namespace {

constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ull;

// SplitMix64 finalizer (Steele/Lea/Flood via Vigna): bijective on u64.
inline std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

inline std::uint64_t derive_key(std::uint64_t seed, std::uint64_t id) {
  // Two mixing rounds so that nearby (seed, id) pairs decorrelate.
  std::uint64_t k = mix64(seed + kGolden) ^ mix64(id * 0xD1342543DE82EF95ull + 0x2545F4914F6CDD1Dull);
  return mix64(k + kGolden);
}

}  // namespace

RngStream::RngStream(std::uint64_t seed, std::uint64_t stream_id)
    : seed_(seed), stream_id_(stream_id), key_(derive_key(seed, stream_id)) {}

std::uint64_t RngStream::next_u64() {
  std::uint64_t c = counter_++;
  return mix64(key_ + c * kGolden);
}

double RngStream::next_double() {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double RngStream::uniform(double a, double b) {
  return a + (b - a) * next_double();
}

double RngStream::next_normal() {
  // Box-Muller; u clamped away from 0 so log stays finite.
  double u = next_double();
  double v = next_double();
  if (u < 0x1.0p-60) u = 0x1.0p-60;
  return std::sqrt(-2.0 * std::log(u)) * std::cos(2.0 * M_PI * v);
}

std::uint64_t RngStream::poisson(double mean) {
  if (!(mean > 0.0)) {
    if (mean == 0.0) return 0;
    throw std::domain_error("poisson: mean must be >= 0");
  }
  if (mean < 30.0) {
    // Sequential inversion on the CDF.
    double p = std::exp(-mean);
    double cum = p;
    double u = next_double();
    std::uint64_t n = 0;
    while (u > cum) {
      ++n;
      p *= mean / static_cast<double>(n);
      cum += p;
      if (n > 2000) break;  // cumulative roundoff guard; P(N>2000 | mean<30) ~ 0
    }
    return n;
  }
  // PTRS transformed rejection, Hoermann (1993). Exact for mean >= 10.
  const double b = 0.931 + 2.53 * std::sqrt(mean);
  const double a = -0.059 + 0.02483 * b;
  const double inv_alpha = 1.1239 + 1.1328 / (b - 3.4);
  const double v_r = 0.9277 - 3.6224 / (b - 2.0);
  const double log_mean = std::log(mean);
  for (;;) {
    double u = next_double() - 0.5;
    double v = next_double();
    double us = 0.5 - std::fabs(u);
    double k = std::floor((2.0 * a / us + b) * u + mean + 0.43);
    if (us >= 0.07 && v <= v_r) return static_cast<std::uint64_t>(k);
    if (k < 0.0 || (us < 0.013 && v > us)) continue;
    double lhs = std::log(v * inv_alpha / (a / (us * us) + b));
    double rhs = k * log_mean - mean - std::lgamma(k + 1.0);
    if (lhs <= rhs) return static_cast<std::uint64_t>(k);
  }
}

RngStream RngStream::split(std::uint64_t child_id) const {
  // Child id space is decoupled from the parent's by mixing in our own id.
  return RngStream(seed_, mix64(stream_id_ + kGolden) + child_id);
}

}  // namespace cpn
