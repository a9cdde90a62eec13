#include "mlmc/brownian.hpp"

#include <cmath>
#include <string>

#include "mlmc/error.hpp"

namespace mlmc {

namespace {

constexpr std::uint32_t kPhiloxM0 = 0xD2511F53u;
constexpr std::uint32_t kPhiloxM1 = 0xCD9E8D57u;
constexpr std::uint32_t kPhiloxW0 = 0x9E3779B9u;
constexpr std::uint32_t kPhiloxW1 = 0xBB67AE85u;

inline void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& hi, std::uint32_t& lo) {
  const std::uint64_t p = static_cast<std::uint64_t>(a) * b;
  hi = static_cast<std::uint32_t>(p >> 32);
  lo = static_cast<std::uint32_t>(p);
}

// Counter words: [block, step lo32, path lo32, level | step hi12 << 8 | path hi12 << 20].
Philox4x32::Counter pack_counter(const PathSeed& seed, std::uint32_t block) {
  const auto step_hi = static_cast<std::uint32_t>(seed.coarse_step_index >> 32);
  const auto path_hi = static_cast<std::uint32_t>(seed.path_index >> 32);
  return {block, static_cast<std::uint32_t>(seed.coarse_step_index),
          static_cast<std::uint32_t>(seed.path_index),
          seed.level | (step_hi << 8) | (path_hi << 20)};
}

void check_seed(const PathSeed& seed) {
  if (seed.level > kMaxSeedLevel || seed.path_index > kMaxSeedIndex ||
      seed.coarse_step_index > kMaxSeedIndex)
    throw DimensionError("path seed field outside the packable counter range");
}

}  // namespace

Philox4x32::Counter Philox4x32::generate(Counter ctr, Key key) {
  for (int round = 0; round < 10; ++round) {
    if (round > 0) {
      key[0] += kPhiloxW0;
      key[1] += kPhiloxW1;
    }
    std::uint32_t hi0, lo0, hi1, lo1;
    mulhilo(kPhiloxM0, ctr[0], hi0, lo0);
    mulhilo(kPhiloxM1, ctr[2], hi1, lo1);
    ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
  }
  return ctr;
}

IncrementGrid::IncrementGrid(std::size_t substeps, std::size_t noise_dim, double delta_t)
    : substeps_(substeps), noise_dim_(noise_dim), delta_t_(delta_t),
      values_(substeps * noise_dim, 0.0) {}

void sample_increments_into(const PathSeed& seed, const Matrix& correlation_root,
                            IncrementGrid& grid) {
  const std::size_t substeps = grid.substeps();
  const std::size_t dim = grid.noise_dim();
  if (substeps == 0 || dim == 0)
    throw DimensionError("increment grid needs at least one sub-step and one noise component");
  if (!(grid.delta_t() > 0.0)) throw DimensionError("increment grid needs a positive sub-step");
  if (correlation_root.rows() != dim || correlation_root.cols() != dim)
    throw DimensionError("correlation factor must be " + std::to_string(dim) + "x" +
                         std::to_string(dim));
  check_seed(seed);

  const Philox4x32::Key key = {static_cast<std::uint32_t>(seed.global_seed),
                               static_cast<std::uint32_t>(seed.global_seed >> 32)};
  const double scale = std::sqrt(grid.delta_t());
  const std::size_t total = substeps * dim;

  // Two normals per Philox block, filled in row-major order.
  Philox4x32::Counter block{};
  for (std::size_t i = 0; i < total; ++i) {
    if (i % 2 == 0) block = Philox4x32::generate(pack_counter(seed, static_cast<std::uint32_t>(i / 2)), key);
    const double u = (i % 2 == 0) ? uniform_from_bits(block[0], block[1])
                                  : uniform_from_bits(block[2], block[3]);
    grid(i / dim, i % dim) = inverse_normal_cdf(u);
  }

  if (correlation_root.is_identity()) {
    for (std::size_t m = 0; m < substeps; ++m)
      for (std::size_t j = 0; j < dim; ++j) grid(m, j) *= scale;
    return;
  }
  std::vector<double> z(dim);
  for (std::size_t m = 0; m < substeps; ++m) {
    for (std::size_t j = 0; j < dim; ++j) z[j] = grid(m, j);
    for (std::size_t j = 0; j < dim; ++j) {
      double acc = 0.0;
      for (std::size_t k = 0; k < dim; ++k) acc += correlation_root(j, k) * z[k];
      grid(m, j) = scale * acc;
    }
  }
}

IncrementGrid sample_increments(const PathSeed& seed, std::size_t substeps, std::size_t noise_dim,
                                double delta_t, const Matrix& correlation_root) {
  if (substeps == 0 || noise_dim == 0)
    throw DimensionError("increment grid needs at least one sub-step and one noise component");
  IncrementGrid grid(substeps, noise_dim, delta_t);
  sample_increments_into(seed, correlation_root, grid);
  return grid;
}

void coarse_increment_into(const IncrementGrid& grid, std::span<double> out) {
  const std::size_t dim = grid.noise_dim();
  if (out.size() != dim) throw DimensionError("coarse increment output has the wrong size");
  for (std::size_t j = 0; j < dim; ++j) out[j] = 0.0;
  for (std::size_t m = 0; m < grid.substeps(); ++m)
    for (std::size_t j = 0; j < dim; ++j) out[j] += grid(m, j);
}

std::vector<double> coarse_increment(const IncrementGrid& grid) {
  std::vector<double> out(grid.noise_dim());
  coarse_increment_into(grid, out);
  return out;
}

void levy_quadrature_into(const IncrementGrid& grid, std::span<double> prefix, Matrix& out) {
  const std::size_t dim = grid.noise_dim();
  if (prefix.size() != dim || out.rows() != dim || out.cols() != dim)
    throw DimensionError("levy quadrature buffers have the wrong size");
  for (double& v : out.data()) v = 0.0;
  if (grid.substeps() == 0) return;
  for (std::size_t j = 0; j < dim; ++j) prefix[j] = grid(0, j);
  for (std::size_t m = 1; m < grid.substeps(); ++m) {
    for (std::size_t j = 0; j < dim; ++j)
      for (std::size_t k = 0; k < dim; ++k) out(j, k) += prefix[j] * grid(m, k);
    for (std::size_t j = 0; j < dim; ++j) prefix[j] += grid(m, j);
  }
}

Matrix levy_quadrature(const IncrementGrid& grid) {
  Matrix out(grid.noise_dim(), grid.noise_dim());
  std::vector<double> prefix(grid.noise_dim());
  levy_quadrature_into(grid, prefix, out);
  return out;
}

IncrementGrid reverse_substeps(const IncrementGrid& grid) {
  IncrementGrid out(grid.substeps(), grid.noise_dim(), grid.delta_t());
  const std::size_t last = grid.substeps() - 1;
  for (std::size_t m = 0; m < grid.substeps(); ++m)
    for (std::size_t j = 0; j < grid.noise_dim(); ++j) out(m, j) = grid(last - m, j);
  return out;
}

}  // namespace mlmc
