#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <vector>

#include "emoarc/error.hpp"

namespace emoarc::metrics {

struct ErrorStats {
  double mean = 0.0;
  double std = 0.0;  // population
  double median = 0.0;
  double p90 = 0.0;
  double p95 = 0.0;
  std::size_t n = 0;
};

/// Nearest-rank percentile of an ascending sample: the ceil(percent*n/100)-th
/// order statistic (1-based), computed in integer arithmetic.
inline double nearest_rank(std::span<const double> sorted, unsigned percent) {
  if (sorted.empty()) throw ValidationError("percentile of empty sample");
  const std::size_t n = sorted.size();
  std::size_t rank = (static_cast<std::size_t>(percent) * n + 99) / 100;
  rank = std::clamp<std::size_t>(rank, 1, n);
  return sorted[rank - 1];
}

inline ErrorStats error_stats(std::span<const double> abs_errors) {
  if (abs_errors.empty()) throw ValidationError("error_stats: empty input");
  for (double e : abs_errors)
    if (!(e >= 0.0)) throw ValidationError("error_stats: negative or NaN absolute error");
  std::vector<double> sorted(abs_errors.begin(), abs_errors.end());
  std::sort(sorted.begin(), sorted.end());
  ErrorStats s;
  s.n = sorted.size();
  double sum = 0.0;
  for (double e : abs_errors) sum += e;
  s.mean = sum / static_cast<double>(s.n);
  double ss = 0.0;
  for (double e : abs_errors) ss += (e - s.mean) * (e - s.mean);
  s.std = std::sqrt(ss / static_cast<double>(s.n));
  s.median = nearest_rank(sorted, 50);
  s.p90 = nearest_rank(sorted, 90);
  s.p95 = nearest_rank(sorted, 95);
  return s;
}

}  // namespace emoarc::metrics
