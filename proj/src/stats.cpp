#include "cpn/stats.hpp"

#include <cmath>
#include <stdexcept>

namespace cpn {

EstimatorAccumulator::EstimatorAccumulator(std::uint64_t batch_size)
    : batch_size_(batch_size) {
  if (batch_size == 0) throw std::invalid_argument("batch_size must be > 0");
}

void EstimatorAccumulator::add(double x) {
  ++count_;
  double delta = x - mean_;
  mean_ += delta / static_cast<double>(count_);
  m2_ += delta * (x - mean_);

  batch_sum_ += x;
  if (++batch_fill_ == batch_size_) {
    batch_means_.push_back(batch_sum_ / static_cast<double>(batch_size_));
    batch_sum_ = 0.0;
    batch_fill_ = 0;
  }
}

double EstimatorAccumulator::mean() const {
  if (count_ == 0) throw std::domain_error("mean of empty accumulator");
  return mean_;
}

double EstimatorAccumulator::variance() const {
  if (count_ < 2) throw std::domain_error("variance needs >= 2 samples");
  return m2_ / static_cast<double>(count_ - 1);
}

EstimatorAccumulator EstimatorAccumulator::merge(const EstimatorAccumulator& a,
                                                 const EstimatorAccumulator& b) {
  if (a.batch_size_ != b.batch_size_)
    throw std::logic_error("merge: incompatible batch sizes");
  if (b.count_ == 0) return a;
  if (a.count_ == 0) return b;
  if (a.batch_fill_ != 0)
    throw std::logic_error(
        "merge: left accumulator has a partial batch; feed workers whole batches");

  EstimatorAccumulator out(a.batch_size_);
  out.count_ = a.count_ + b.count_;
  double na = static_cast<double>(a.count_), nb = static_cast<double>(b.count_);
  double delta = b.mean_ - a.mean_;
  out.mean_ = a.mean_ + delta * nb / (na + nb);
  out.m2_ = a.m2_ + b.m2_ + delta * delta * na * nb / (na + nb);

  out.batch_means_ = a.batch_means_;
  out.batch_means_.insert(out.batch_means_.end(), b.batch_means_.begin(),
                          b.batch_means_.end());
  out.batch_sum_ = b.batch_sum_;
  out.batch_fill_ = b.batch_fill_;
  return out;
}

EstimatorAccumulator::Summary EstimatorAccumulator::summarize() const {
  if (batch_means_.size() < 2)
    throw std::domain_error("summarize needs >= 2 complete batches");
  double bm = 0.0;
  for (double v : batch_means_) bm += v;
  bm /= static_cast<double>(batch_means_.size());
  double s2 = 0.0;
  for (double v : batch_means_) s2 += (v - bm) * (v - bm);
  s2 /= static_cast<double>(batch_means_.size() - 1);
  double se = std::sqrt(s2 / static_cast<double>(batch_means_.size()));
  return Summary{mean(), se, count_};
}

std::vector<EcfPoint> ecf_estimate(std::span<const double> samples,
                                   std::span<const double> t_grid) {
  if (samples.size() < 100)
    throw std::domain_error("ecf_estimate: need at least 100 samples");
  const double n = static_cast<double>(samples.size());
  const double radius = 2.58 / std::sqrt(n);
  std::vector<EcfPoint> out;
  out.reserve(t_grid.size());
  for (double t : t_grid) {
    double re = 0.0, im = 0.0;
    for (double x : samples) {
      re += std::cos(t * x);
      im += std::sin(t * x);
    }
    out.push_back(EcfPoint{{re / n, im / n}, radius});
  }
  return out;
}

double pairwise_sum(std::span<const double> values) {
  const std::size_t n = values.size();
  if (n == 0) return 0.0;
  if (n <= 8) {
    double s = 0.0;
    for (double v : values) s += v;
    return s;
  }
  std::size_t half = n / 2;
  return pairwise_sum(values.subspan(0, half)) + pairwise_sum(values.subspan(half));
}

}  // namespace cpn
