#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

namespace mlmc::testing {

inline bool rel_close(double a, double b, double tol) {
  return std::fabs(a - b) <= tol * std::max({std::fabs(a), std::fabs(b), 1e-300});
}

// Plain two-pass mean and standard error, kept independent of LevelStats.
struct Moments {
  double mean = 0.0;
  double variance = 0.0;
  double se = 0.0;
};

inline Moments moments(std::span<const double> xs) {
  Moments m;
  const double n = static_cast<double>(xs.size());
  for (double x : xs) m.mean += x;
  m.mean /= n;
  for (double x : xs) m.variance += (x - m.mean) * (x - m.mean);
  m.variance /= n - 1.0;
  m.se = std::sqrt(m.variance / n);
  return m;
}

// Least-squares slope of y against x.
inline double ls_slope(std::span<const double> x, std::span<const double> y) {
  const double n = static_cast<double>(x.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    sxy += x[i] * y[i];
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

}  // namespace mlmc::testing
