#include "mlmc/level_stats.hpp"

#include <algorithm>

#include "mlmc/error.hpp"

namespace mlmc {

LevelStats LevelStats::exact(int level, double value) {
  LevelStats s(level);
  s.count_ = 1;
  s.mean_ = value;
  s.exact_ = true;
  return s;
}

void LevelStats::add(double sample, std::uint64_t steps) {
  if (exact_) throw ConfigError("cannot add samples to an exact level");
  ++count_;
  const double delta = sample - mean_;
  mean_ += delta / static_cast<double>(count_);
  m2_ += delta * (sample - mean_);
  steps_ += steps;
}

void LevelStats::merge(const LevelStats& other) {
  if (other.count_ == 0) return;
  if (exact_ || other.exact_) throw ConfigError("cannot merge into or from an exact level");
  if (count_ == 0) {
    const int level = level_;
    *this = other;
    level_ = level;
    return;
  }
  const double n_a = static_cast<double>(count_);
  const double n_b = static_cast<double>(other.count_);
  const double n = n_a + n_b;
  const double delta = other.mean_ - mean_;
  mean_ += delta * (n_b / n);
  m2_ += other.m2_ + delta * delta * (n_a * n_b / n);
  count_ += other.count_;
  steps_ += other.steps_;
}

double LevelStats::variance() const {
  if (exact_ || count_ < 2) return 0.0;
  return std::max(0.0, m2_ / static_cast<double>(count_ - 1));
}

}  // namespace mlmc
