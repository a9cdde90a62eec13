#pragma once

#include <cstdint>

namespace mlmc {

/// Streaming count / mean / unbiased variance of level-difference samples
/// (Welford update, Chan et al. pairwise merge) plus the steps spent.
class LevelStats {
 public:
  explicit LevelStats(int level = 0) : level_(level) {}

  /// A level whose mean is known exactly: N = 1, V = 0, no steps charged.
  static LevelStats exact(int level, double value);

  void add(double sample, std::uint64_t steps);
  void merge(const LevelStats& other);

  int level() const { return level_; }
  std::uint64_t count() const { return count_; }
  double mean() const { return mean_; }
  /// Unbiased sample variance; 0 for exact levels, and 0 when count < 2.
  double variance() const;
  /// False until two samples are present (exact levels always have one).
  bool has_variance() const { return exact_ || count_ >= 2; }
  bool is_exact() const { return exact_; }
  std::uint64_t step_cost() const { return steps_; }

 private:
  int level_;
  std::uint64_t count_ = 0;
  double mean_ = 0.0;
  double m2_ = 0.0;
  std::uint64_t steps_ = 0;
  bool exact_ = false;
};

}  // namespace mlmc
