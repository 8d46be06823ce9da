#pragma once

#include <cmath>
#include <span>
#include <string>

#include "emoarc/error.hpp"

namespace emoarc::metrics {

/// Population moments of a pair of equal-length sequences. Sums run
/// sequentially in index order so results are bit-reproducible. A sequence
/// whose elements are all identical gets exactly zero variance and its
/// element as mean.
struct PairMoments {
  double mean_x = 0.0;
  double mean_y = 0.0;
  double var_x = 0.0;
  double var_y = 0.0;
  double cov = 0.0;
  bool const_x = false;
  bool const_y = false;
};

namespace detail {

inline bool all_equal(std::span<const double> v) {
  for (double x : v)
    if (x != v.front()) return false;
  return true;
}

inline void check_pair(std::span<const double> x, std::span<const double> y, const char* what) {
  if (x.size() != y.size())
    throw ValidationError(std::string(what) + ": length mismatch (" + std::to_string(x.size()) + " vs " +
                          std::to_string(y.size()) + ")");
  if (x.size() < 2) throw ValidationError(std::string(what) + ": need at least 2 values");
}

}  // namespace detail

inline PairMoments pair_moments(std::span<const double> x, std::span<const double> y) {
  PairMoments m;
  const double n = static_cast<double>(x.size());
  m.const_x = detail::all_equal(x);
  m.const_y = detail::all_equal(y);
  double sx = 0.0, sy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
  }
  m.mean_x = m.const_x ? x.front() : sx / n;
  m.mean_y = m.const_y ? y.front() : sy / n;
  double vx = 0.0, vy = 0.0, c = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = x[i] - m.mean_x;
    const double dy = y[i] - m.mean_y;
    vx += dx * dx;
    vy += dy * dy;
    c += dx * dy;
  }
  m.var_x = vx / n;
  m.var_y = vy / n;
  m.cov = c / n;
  return m;
}

/// Concordance correlation coefficient with population moments:
///   2 cov / (var_y + var_yhat + (mean_y - mean_yhat)^2)
/// Defined when only one input is constant; throws NumericError when the
/// denominator is zero (both constant with equal means).
inline double ccc(std::span<const double> y, std::span<const double> y_hat) {
  detail::check_pair(y, y_hat, "ccc");
  const auto m = pair_moments(y, y_hat);
  const double bias = m.mean_x - m.mean_y;
  const double denom = m.var_x + m.var_y + bias * bias;
  if (denom == 0.0) throw NumericError("ccc undefined: both signals constant and equal");
  return 2.0 * m.cov / denom;
}

/// Pearson product-moment correlation; throws NumericError on constant input.
inline double pearson(std::span<const double> y, std::span<const double> y_hat) {
  detail::check_pair(y, y_hat, "pearson");
  const auto m = pair_moments(y, y_hat);
  if (m.const_x || m.const_y || m.var_x == 0.0 || m.var_y == 0.0)
    throw NumericError("pearson undefined: constant input");
  double r = m.cov / std::sqrt(m.var_x * m.var_y);
  if (r > 1.0) r = 1.0;
  if (r < -1.0) r = -1.0;
  return r;
}

}  // namespace emoarc::metrics
