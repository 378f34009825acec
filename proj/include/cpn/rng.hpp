// Counter-based splittable random streams. A draw is a keyed bijective mix
// of (seed, stream id, counter); distinct ids give statistically independent
// streams without coordination, so parallel workers can each own one.
#pragma once

#include <cstdint>

namespace cpn {

class RngStream {
 public:
  RngStream(std::uint64_t seed, std::uint64_t stream_id);

  std::uint64_t next_u64();

  /// Uniform in [0, 1), 53-bit resolution.
  double next_double();

  /// Uniform in [a, b).
  double uniform(double a, double b);

  /// Standard normal (Box-Muller, one of the pair discarded).
  double next_normal();

  /// Poisson count: sequential inversion for mean < 30, PTRS transformed
  /// rejection (Hoermann) above.
  std::uint64_t poisson(double mean);

  /// Derived stream with an unrelated id; (seed, child_id) fully determines it.
  RngStream split(std::uint64_t child_id) const;

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream_id() const { return stream_id_; }
  std::uint64_t counter() const { return counter_; }

 private:
  std::uint64_t seed_;
  std::uint64_t stream_id_;
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

}  // namespace cpn
