#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "mlmc/matrix.hpp"

namespace mlmc {

/// Philox4x32-10 counter-based generator (Salmon et al., SC'11).
/// Stateless: the output block is a pure function of (counter, key).
struct Philox4x32 {
  using Counter = std::array<std::uint32_t, 4>;
  using Key = std::array<std::uint32_t, 2>;

  static Counter generate(Counter counter, Key key);
};

/// Open-interval (0,1) uniform with 52 random bits from two 32-bit words.
double uniform_from_bits(std::uint32_t hi, std::uint32_t lo);

/// Inverse of the standard normal CDF (Wichura, AS241), |rel err| ~ 1e-16.
double inverse_normal_cdf(double p);

/// Identifies the increments of one coarse step of one path at one level.
/// Equal seeds give identical streams; distinct (level, path_index,
/// coarse_step_index) triples map to distinct Philox counters.
struct PathSeed {
  std::uint64_t global_seed = 0;
  std::uint32_t level = 0;
  std::uint64_t path_index = 0;
  std::uint64_t coarse_step_index = 0;

  friend bool operator==(const PathSeed&, const PathSeed&) = default;
};

inline constexpr std::uint32_t kMaxSeedLevel = 255;
inline constexpr std::uint64_t kMaxSeedIndex = (std::uint64_t{1} << 44) - 1;

/// The M fine Brownian increments (rows) of one coarse step, D noise
/// components (columns), each sub-step of length delta_t.
class IncrementGrid {
 public:
  IncrementGrid() = default;
  IncrementGrid(std::size_t substeps, std::size_t noise_dim, double delta_t);

  std::size_t substeps() const { return substeps_; }
  std::size_t noise_dim() const { return noise_dim_; }
  double delta_t() const { return delta_t_; }

  double operator()(std::size_t m, std::size_t j) const { return values_[m * noise_dim_ + j]; }
  double& operator()(std::size_t m, std::size_t j) { return values_[m * noise_dim_ + j]; }

  std::span<const double> row(std::size_t m) const {
    return std::span<const double>(values_).subspan(m * noise_dim_, noise_dim_);
  }
  std::span<double> row(std::size_t m) {
    return std::span<double>(values_).subspan(m * noise_dim_, noise_dim_);
  }

  std::span<const double> values() const { return values_; }

  friend bool operator==(const IncrementGrid&, const IncrementGrid&) = default;

 private:
  std::size_t substeps_ = 0;
  std::size_t noise_dim_ = 0;
  double delta_t_ = 0.0;
  std::vector<double> values_;
};

/// Draws an M x D grid of increments with covariance delta_t * R R^T per row.
/// Throws DimensionError on M == 0, D == 0, a non-positive step, a factor of
/// the wrong shape, or seed fields outside the packable range.
IncrementGrid sample_increments(const PathSeed& seed, std::size_t substeps, std::size_t noise_dim,
                                double delta_t, const Matrix& correlation_root);

/// Refills `grid` in place (no allocation); shape and delta_t are taken from it.
void sample_increments_into(const PathSeed& seed, const Matrix& correlation_root,
                            IncrementGrid& grid);

/// Column sums, accumulated in ascending sub-step order.
std::vector<double> coarse_increment(const IncrementGrid& grid);
void coarse_increment_into(const IncrementGrid& grid, std::span<double> out);

/// Discrete Levy-area quadrature
///   A_jk = sum_{m=1}^{M-1} dW_{k,m} * sum_{q<m} dW_{j,q}
/// evaluated with a running prefix sum in O(M D^2).
Matrix levy_quadrature(const IncrementGrid& grid);
void levy_quadrature_into(const IncrementGrid& grid, std::span<double> prefix, Matrix& out);

/// Row m of the result is row (M-1-m) of the input.
IncrementGrid reverse_substeps(const IncrementGrid& grid);

}  // namespace mlmc
