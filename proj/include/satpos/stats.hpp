#ifndef SATPOS_STATS_HPP
#define SATPOS_STATS_HPP

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace satpos {

/// Running mean and squared-deviation sum (Welford); merge() is exact Chan
/// combination, so an ordered merge of chunks is reproducible.
struct RunningMoments {
  long n = 0;
  double mean = 0.0;
  double m2 = 0.0;

  void add(double x) {
    ++n;
    const double d = x - mean;
    mean += d / static_cast<double>(n);
    m2 += d * (x - mean);
  }

  void merge(const RunningMoments& o) {
    if (o.n == 0) return;
    const long total = n + o.n;
    const double d = o.mean - mean;
    mean += d * static_cast<double>(o.n) / static_cast<double>(total);
    m2 += o.m2 + d * d * static_cast<double>(n) * static_cast<double>(o.n) /
                     static_cast<double>(total);
    n = total;
  }

  double variance() const { return n < 2 ? 0.0 : m2 / static_cast<double>(n - 1); }
  double stddev() const { return std::sqrt(variance()); }
  double std_err() const { return n < 2 ? 0.0 : std::sqrt(variance() / static_cast<double>(n)); }
};

inline double median(std::vector<double> v) {
  if (v.empty()) throw std::invalid_argument("median of empty sample");
  const auto mid = v.size() / 2;
  std::nth_element(v.begin(), v.begin() + static_cast<long>(mid), v.end());
  const double hi = v[mid];
  if (v.size() % 2 == 1) return hi;
  const double lo = *std::max_element(v.begin(), v.begin() + static_cast<long>(mid));
  return 0.5 * (lo + hi);
}

}  // namespace satpos

#endif  // SATPOS_STATS_HPP
