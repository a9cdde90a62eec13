#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "mlmc/level_stats.hpp"
#include "mlmc/payoff.hpp"
#include "mlmc/schemes.hpp"
#include "mlmc/sde.hpp"

namespace mlmc {

struct MlmcConfig {
  /// Target RMS error.
  double epsilon = 1e-2;
  /// Refinement factor M, h_l = T M^-l.
  int refinement = 2;
  SchemeKind scheme = SchemeKind::Euler;
  /// Replace the base level by its exact Ito-linearized mean. Requires a C2
  /// payoff. approx-milstein always simulates the augmented system; this
  /// flag only decides whether its base level is exact or sampled.
  bool ito_linearize = false;
  /// Initial samples on level 1 (and on level 0 when it is sampled).
  std::uint64_t initial_samples = 400;
  int max_level = 12;
  std::uint64_t global_seed = 0;
  /// Worker threads for path sampling; 0 selects the hardware concurrency.
  /// Results do not depend on this value.
  unsigned threads = 0;
  /// When set, run levels 0..fixed_level with optimal allocation and skip the
  /// bias test.
  std::optional<int> fixed_level;
};

struct MlmcResult {
  double estimate = 0.0;
  std::vector<LevelStats> levels;
  /// Weighted step count: sum_l N_l (steps per sample) / T, times the
  /// dimension weight.
  double total_cost = 0.0;
  bool converged = false;
  /// max(|Y_L|, |Y_{L-1}| / M) at termination.
  double bias_proxy = 0.0;
  /// sum_l V_l / N_l.
  double sampling_variance = 0.0;
  bool exact_base_level = false;
  /// (d+1)/d when the augmented system was simulated, else 1.
  double dimension_weight = 1.0;
  int refinement = 2;
  double horizon = 0.0;
  SchemeKind scheme = SchemeKind::Euler;

  int final_level() const { return static_cast<int>(levels.size()) - 1; }
};

/// N_l = ceil( (2/eps^2) sqrt(V_l h_l) sum_k sqrt(V_k / h_k) ) for the levels
/// given. The ceiling ignores a relative 1e-12 excess so that exact products
/// are not bumped by rounding. Throws ConfigError for eps <= 0 and
/// DimensionError for mismatched spans.
std::vector<std::uint64_t> optimal_sample_sizes(std::span<const double> variances,
                                                std::span<const double> step_sizes,
                                                double epsilon);

/// Level 1 -> first_level_samples; level L > 1 -> ceil(M^{-(beta+1)/2} N_{L-1}), at least 2.
std::uint64_t initial_samples(int level, int refinement, Rational beta, std::uint64_t previous_n,
                              std::uint64_t first_level_samples = 400);

/// True iff level >= 2 and max(|Y_L|, |Y_{L-1}| / M) <= eps / sqrt(2).
bool converged(double y_last, double y_prev, int refinement, double epsilon, int level);

/// Weighted step cost of the given level statistics. Sampled level 0 is
/// charged N_0 / h_0; an exact level 0 costs nothing.
double total_cost(std::span<const LevelStats> levels, const SchemeDescriptor& scheme,
                  int refinement, double horizon, double dimension_weight);

/// Paths and weights actually simulated for a configuration.
struct PreparedProblem {
  SystemPtr system;
  PayoffPtr payoff;
  bool exact_base_level = false;
  double base_value = 0.0;
  double dimension_weight = 1.0;
};

/// Applies the augmentation rules and validates scheme/payoff compatibility.
/// Throws ConfigError / DimensionError.
PreparedProblem prepare(const MlmcConfig& config, SystemPtr system, PayoffPtr payoff);

/// Draws coupled samples for one level in fixed-size path chunks. Chunks are
/// merged in index order, so the statistics are bitwise independent of the
/// thread count.
class LevelSampler {
 public:
  static constexpr std::uint64_t kChunk = 1024;

  LevelSampler(SystemPtr system, PayoffPtr payoff, SchemeKind scheme, int refinement,
               std::uint64_t global_seed, unsigned threads);

  /// Statistics of paths [first_path, first_path + count) at `level`.
  LevelStats sample(int level, std::uint64_t first_path, std::uint64_t count) const;
  /// Appends `extra` new paths, continuing the path index after stats.count().
  void extend(LevelStats& stats, std::uint64_t extra) const;

 private:
  SystemPtr system_;
  PayoffPtr payoff_;
  SchemeKind scheme_;
  int refinement_;
  std::uint64_t seed_;
  unsigned threads_;
};

/// Adaptive multilevel estimate. Non-convergence at max_level is reported in
/// the result, not thrown.
MlmcResult run(const MlmcConfig& config, SystemPtr system, PayoffPtr payoff);

}  // namespace mlmc
