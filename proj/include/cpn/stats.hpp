// Mergeable streaming estimators, batch-means error bars, and empirical
// characteristic functions with conservative confidence bands.
#pragma once

#include <complex>
#include <cstdint>
#include <span>
#include <vector>

namespace cpn {

/// Streaming mean/variance (Welford) plus batch means for correlated input.
/// Merge of two accumulators equals the accumulator of the concatenated
/// streams up to floating-point reassociation; batch buffers merge only when
/// alignment allows (whole batches), otherwise merge() throws.
class EstimatorAccumulator {
 public:
  explicit EstimatorAccumulator(std::uint64_t batch_size = 64);

  void add(double x);

  std::uint64_t count() const { return count_; }
  double mean() const;
  /// Unbiased sample variance of the raw stream.
  double variance() const;
  std::uint64_t batch_size() const { return batch_size_; }
  std::uint64_t complete_batches() const { return batch_means_.size(); }

  static EstimatorAccumulator merge(const EstimatorAccumulator& a,
                                    const EstimatorAccumulator& b);

  struct Summary {
    double mean;
    double stderr_;  // batch-means standard error of the mean
    std::uint64_t count;
  };
  /// Requires >= 2 complete batches.
  Summary summarize() const;

 private:
  std::uint64_t batch_size_;
  std::uint64_t count_ = 0;
  double mean_ = 0.0;
  double m2_ = 0.0;
  std::vector<double> batch_means_;
  double batch_sum_ = 0.0;
  std::uint64_t batch_fill_ = 0;
};

struct EcfPoint {
  std::complex<double> estimate;
  double ci_radius;  // 99% bound on each of the real/imaginary parts
};

/// Empirical characteristic function (1/N) sum exp(i t X_k) on a t grid.
/// CI radius is the conservative bounded-variable value 2.58/sqrt(N).
/// Requires at least 100 samples.
std::vector<EcfPoint> ecf_estimate(std::span<const double> samples,
                                   std::span<const double> t_grid);

/// Deterministic pairwise (cascade) sum; merge order independent of thread
/// scheduling because callers pass a fixed-order vector.
double pairwise_sum(std::span<const double> values);

}  // namespace cpn
