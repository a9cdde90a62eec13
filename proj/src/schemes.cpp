#include "mlmc/schemes.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <string>

#include "mlmc/error.hpp"

namespace mlmc {

namespace {

constexpr std::array<SchemeDescriptor, 4> kSchemes = {{
    {SchemeKind::Euler, "euler", {1, 1}, {1, 2}, {1, 1}, CostRule::Euler},
    {SchemeKind::Milstein, "milstein", {1, 1}, {1, 1}, {2, 1}, CostRule::Euler},
    {SchemeKind::Antithetic, "antithetic", {1, 1}, {1, 2}, {2, 1}, CostRule::Antithetic},
    {SchemeKind::ApproxMilstein, "approx-milstein", {1, 1}, {1, 2}, {2, 1},
     CostRule::ApproxMilstein},
}};

}  // namespace

const SchemeDescriptor& describe(SchemeKind kind) {
  for (const auto& s : kSchemes)
    if (s.kind == kind) return s;
  throw ConfigError("unknown scheme kind");
}

SchemeKind parse_scheme(std::string_view name) {
  for (const auto& s : kSchemes)
    if (s.name == name) return s.kind;
  throw ConfigError("unknown scheme '" + std::string(name) +
                    "' (expected euler, milstein, antithetic or approx-milstein)");
}

std::uint64_t int_pow(int base, int exponent) {
  if (base < 1 || exponent < 0) throw DimensionError("int_pow needs base >= 1 and exponent >= 0");
  std::uint64_t r = 1;
  for (int i = 0; i < exponent; ++i) {
    if (r > (std::uint64_t{1} << 62) / static_cast<std::uint64_t>(base))
      throw DimensionError("level too deep: step count overflows");
    r *= static_cast<std::uint64_t>(base);
  }
  return r;
}

std::uint64_t steps_per_sample(CostRule rule, int level, int refinement) {
  if (level == 0) return 1;
  const std::uint64_t fine = int_pow(refinement, level);
  const std::uint64_t coarse = int_pow(refinement, level - 1);
  switch (rule) {
    case CostRule::Euler: return fine + coarse;
    case CostRule::Antithetic: return 2 * fine + coarse;
    case CostRule::ApproxMilstein: return fine + 2 * coarse;
  }
  return 0;
}

StepWorkspace::StepWorkspace(const SdeSystem& system)
    : drift(system.state_dim()),
      diffusion(system.state_dim() * system.noise_dim()),
      h(system.state_dim() * system.noise_dim() * system.noise_dim()),
      drift_star(system.state_dim()),
      increment(system.noise_dim()),
      prefix(system.noise_dim()),
      scratch(system.noise_dim() * system.noise_dim()),
      levy(system.noise_dim(), system.noise_dim()) {}

namespace {

void check_sizes(const SdeSystem& system, std::span<const double> state,
                 std::span<const double> dW, std::span<double> out) {
  if (state.size() != system.state_dim() || out.size() != system.state_dim() ||
      dW.size() != system.noise_dim())
    throw DimensionError("step buffers do not match the system dimensions");
}

// scratch(j,k) = dW_j dW_k - Omega_jk h
void fill_second_order(const SdeSystem& system, std::span<const double> dW, double h,
                       std::span<double> scratch) {
  const std::size_t D = system.noise_dim();
  for (std::size_t j = 0; j < D; ++j)
    for (std::size_t k = 0; k < D; ++k) scratch[j * D + k] = dW[j] * dW[k];
  if (system.identity_correlation()) {
    for (std::size_t j = 0; j < D; ++j) scratch[j * D + j] -= h;
    return;
  }
  const Matrix& r = system.correlation_root();
  for (std::size_t j = 0; j < D; ++j)
    for (std::size_t k = 0; k < D; ++k) {
      double omega = 0.0;
      for (std::size_t q = 0; q < D; ++q) omega += r(j, q) * r(k, q);
      scratch[j * D + k] -= omega * h;
    }
}

// out_i = base_i + a_i h + sum_j b_ij dW_j + sum_jk h_ijk scratch_jk, with all
// coefficients already evaluated; out may alias base.
void combine(std::size_t d, std::size_t D, std::span<const double> base,
             std::span<const double> drift, double h, std::span<const double> b,
             std::span<const double> dW, std::span<const double> htensor,
             std::span<const double> scratch, std::span<double> out) {
  for (std::size_t i = 0; i < d; ++i) {
    double v = base[i] + drift[i] * h;
    for (std::size_t j = 0; j < D; ++j) v += b[i * D + j] * dW[j];
    if (!htensor.empty()) {
      const double* hi = htensor.data() + i * D * D;
      for (std::size_t jk = 0; jk < D * D; ++jk) v += hi[jk] * scratch[jk];
    }
    out[i] = v;
  }
}

}  // namespace

void euler_step(const SdeSystem& system, std::span<const double> state, double t, double h,
                std::span<const double> dW, std::span<double> out, StepWorkspace& ws) {
  check_sizes(system, state, dW, out);
  system.drift(state, t, ws.drift);
  system.diffusion(state, t, ws.diffusion);
  combine(system.state_dim(), system.noise_dim(), state, ws.drift, h, ws.diffusion, dW, {}, {},
          out);
}

std::vector<double> euler_step(const SdeSystem& system, std::span<const double> state, double t,
                               double h, std::span<const double> dW) {
  StepWorkspace ws(system);
  std::vector<double> out(system.state_dim());
  euler_step(system, state, t, h, dW, out, ws);
  return out;
}

void milstein_fine_step(const SdeSystem& system, std::span<const double> state, double t, double h,
                        std::span<const double> dW, std::span<double> out, StepWorkspace& ws) {
  check_sizes(system, state, dW, out);
  system.drift(state, t, ws.drift);
  system.diffusion(state, t, ws.diffusion);
  system.h_tensor(state, t, ws.h);
  fill_second_order(system, dW, h, ws.scratch);
  combine(system.state_dim(), system.noise_dim(), state, ws.drift, h, ws.diffusion, dW, ws.h,
          ws.scratch, out);
}

std::vector<double> milstein_fine_step(const SdeSystem& system, std::span<const double> state,
                                       double t, double h, std::span<const double> dW) {
  StepWorkspace ws(system);
  std::vector<double> out(system.state_dim());
  milstein_fine_step(system, state, t, h, dW, out, ws);
  return out;
}

void approx_milstein_coarse_step(const SdeSystem& system, std::span<const double> star_state,
                                 std::span<const double> coarse_state, double t, double coarse_dt,
                                 std::span<const double> coarse_dW, const Matrix& levy,
                                 std::span<double> out, StepWorkspace& ws) {
  check_sizes(system, coarse_state, coarse_dW, out);
  if (star_state.size() != system.state_dim())
    throw DimensionError("starred state does not match the system dimension");
  const std::size_t D = system.noise_dim();
  if (levy.rows() != D || levy.cols() != D)
    throw DimensionError("levy quadrature does not match the noise dimension");

  system.drift(star_state, t, ws.drift_star);
  system.diffusion(coarse_state, t, ws.diffusion);
  system.h_tensor(coarse_state, t, ws.h);
  fill_second_order(system, coarse_dW, coarse_dt, ws.scratch);
  for (std::size_t j = 0; j < D; ++j)
    for (std::size_t k = 0; k < D; ++k) ws.scratch[j * D + k] -= levy(j, k) - levy(k, j);
  combine(system.state_dim(), D, coarse_state, ws.drift_star, coarse_dt, ws.diffusion, coarse_dW,
          ws.h, ws.scratch, out);
}

std::vector<double> approx_milstein_coarse_step(const SdeSystem& system,
                                                std::span<const double> star_state,
                                                std::span<const double> coarse_state, double t,
                                                double coarse_dt, const IncrementGrid& grid) {
  if (grid.noise_dim() != system.noise_dim())
    throw DimensionError("grid noise dimension does not match the system");
  const double expected = static_cast<double>(grid.substeps()) * grid.delta_t();
  if (std::fabs(coarse_dt - expected) > 1e-12 * std::fabs(expected))
    throw DomainError("coarse step must equal M times the grid sub-step");
  StepWorkspace ws(system);
  coarse_increment_into(grid, ws.increment);
  levy_quadrature_into(grid, ws.prefix, ws.levy);
  std::vector<double> out(system.state_dim());
  const std::vector<double> dW = ws.increment;
  approx_milstein_coarse_step(system, star_state, coarse_state, t, coarse_dt, dW, ws.levy, out,
                              ws);
  return out;
}

CoupledEvolver::CoupledEvolver(SystemPtr system, PayoffPtr payoff, SchemeKind scheme,
                               int refinement)
    : system_(std::move(system)),
      payoff_(std::move(payoff)),
      scheme_(scheme),
      refinement_(refinement),
      ws_(*system_) {
  if (!system_ || !payoff_) throw ConfigError("evolver needs a system and a payoff");
  check_payoff_fits(*payoff_, *system_);
  if (refinement_ < 2) throw ConfigError("refinement factor M must be at least 2");
  if (scheme_ == SchemeKind::Milstein && system_->noise_dim() != 1)
    throw ConfigError("full Milstein needs Levy areas for D > 1; use antithetic or approx-milstein");
  if (scheme_ == SchemeKind::ApproxMilstein && payoff_->smoothness() != Smoothness::Linear)
    throw ConfigError(
        "approx-milstein matches coarse and fine means only componentwise; it needs a linear "
        "payoff (Ito-linearize the system first)");
  const std::size_t d = system_->state_dim();
  fine_.resize(d);
  anti_.resize(d);
  coarse_.resize(d);
  star_.resize(d);
  next_.resize(d);
}

const CoupledSample& CoupledEvolver::evolve(int level, const GridSource& source) {
  if (level < 0) throw DimensionError("level must be non-negative");
  sample_.coarse_payoff.reset();
  sample_.auxiliary_terminal.clear();
  sample_.coarse_terminal.clear();
  sample_.max_gap_sq = 0.0;
  if (level == 0)
    evolve_base(source);
  else
    evolve_coupled(level, source);
  sample_.steps_taken = steps_per_sample(describe(scheme_).cost_rule, level, refinement_);
  return sample_;
}

const CoupledSample& CoupledEvolver::evolve(int level, std::uint64_t global_seed,
                                            std::uint64_t path_index) {
  const Matrix& root = system_->correlation_root();
  return evolve(level, [&](std::uint64_t n, IncrementGrid& grid) {
    sample_increments_into(PathSeed{global_seed, static_cast<std::uint32_t>(level), path_index, n},
                           root, grid);
  });
}

void CoupledEvolver::evolve_base(const GridSource& source) {
  const SdeSystem& sys = *system_;
  const double horizon = sys.horizon();
  if (grid_.substeps() != 1 || grid_.noise_dim() != sys.noise_dim() || grid_.delta_t() != horizon)
    grid_ = IncrementGrid(1, sys.noise_dim(), horizon);
  source(0, grid_);
  std::copy(sys.initial_state().begin(), sys.initial_state().end(), fine_.begin());
  if (horizon > 0.0) {
    if (scheme_ == SchemeKind::Euler)
      euler_step(sys, fine_, 0.0, horizon, grid_.row(0), fine_, ws_);
    else
      milstein_fine_step(sys, fine_, 0.0, horizon, grid_.row(0), fine_, ws_);
  }
  sample_.fine_terminal = fine_;
  sample_.fine_payoff = payoff_->value(fine_);
}

void CoupledEvolver::evolve_coupled(int level, const GridSource& source) {
  const SdeSystem& sys = *system_;
  const std::size_t d = sys.state_dim();
  const int M = refinement_;
  const std::uint64_t coarse_steps = int_pow(M, level - 1);
  const double fine_dt = sys.horizon() / static_cast<double>(int_pow(M, level));
  const double coarse_dt = sys.horizon() / static_cast<double>(coarse_steps);

  if (grid_.substeps() != static_cast<std::size_t>(M) || grid_.noise_dim() != sys.noise_dim() ||
      grid_.delta_t() != fine_dt)
    grid_ = IncrementGrid(static_cast<std::size_t>(M), sys.noise_dim(), fine_dt);

  const auto s0 = sys.initial_state();
  std::copy(s0.begin(), s0.end(), fine_.begin());
  std::copy(s0.begin(), s0.end(), coarse_.begin());
  std::copy(s0.begin(), s0.end(), anti_.begin());
  std::copy(s0.begin(), s0.end(), star_.begin());

  double max_gap = 0.0;
  for (std::uint64_t n = 0; n < coarse_steps; ++n) {
    const double t = static_cast<double>(n) * coarse_dt;
    source(n, grid_);
    coarse_increment_into(grid_, ws_.increment);
    const std::span<const double> dW = ws_.increment;

    switch (scheme_) {
      case SchemeKind::Euler:
        for (int m = 0; m < M; ++m)
          euler_step(sys, fine_, t + m * fine_dt, fine_dt, grid_.row(m), fine_, ws_);
        euler_step(sys, coarse_, t, coarse_dt, dW, coarse_, ws_);
        break;
      case SchemeKind::Milstein:
        for (int m = 0; m < M; ++m)
          milstein_fine_step(sys, fine_, t + m * fine_dt, fine_dt, grid_.row(m), fine_, ws_);
        milstein_fine_step(sys, coarse_, t, coarse_dt, dW, coarse_, ws_);
        break;
      case SchemeKind::Antithetic:
        for (int m = 0; m < M; ++m) {
          milstein_fine_step(sys, fine_, t + m * fine_dt, fine_dt, grid_.row(m), fine_, ws_);
          milstein_fine_step(sys, anti_, t + m * fine_dt, fine_dt, grid_.row(M - 1 - m), anti_,
                             ws_);
        }
        milstein_fine_step(sys, coarse_, t, coarse_dt, dW, coarse_, ws_);
        break;
      case SchemeKind::ApproxMilstein:
        for (int m = 0; m < M; ++m)
          milstein_fine_step(sys, fine_, t + m * fine_dt, fine_dt, grid_.row(m), fine_, ws_);
        levy_quadrature_into(grid_, ws_.prefix, ws_.levy);
        approx_milstein_coarse_step(sys, star_, coarse_, t, coarse_dt, dW, ws_.levy, next_, ws_);
        milstein_fine_step(sys, star_, t, coarse_dt, dW, star_, ws_);
        std::swap(coarse_, next_);
        break;
    }

    double gap = 0.0;
    for (std::size_t i = 0; i < d; ++i) gap += (fine_[i] - coarse_[i]) * (fine_[i] - coarse_[i]);
    max_gap = std::max(max_gap, gap);
  }

  sample_.fine_terminal = fine_;
  sample_.coarse_terminal = coarse_;
  sample_.max_gap_sq = max_gap;
  const double coarse_payoff = payoff_->value(coarse_);
  sample_.coarse_payoff = coarse_payoff;
  if (scheme_ == SchemeKind::Antithetic) {
    sample_.auxiliary_terminal = anti_;
    sample_.fine_payoff = 0.5 * (payoff_->value(fine_) + payoff_->value(anti_));
  } else {
    if (scheme_ == SchemeKind::ApproxMilstein) sample_.auxiliary_terminal = star_;
    sample_.fine_payoff = payoff_->value(fine_);
  }
}

namespace {

CoupledSample run_one(SystemPtr system, PayoffPtr payoff, SchemeKind scheme, int level,
                      int refinement, std::uint64_t seed, std::uint64_t path) {
  if (level < 1) throw DimensionError("coupled evolution needs level >= 1");
  CoupledEvolver evolver(std::move(system), std::move(payoff), scheme, refinement);
  return evolver.evolve(level, seed, path);
}

}  // namespace

CoupledSample evolve_euler_coupled(SystemPtr system, PayoffPtr payoff, int level, int refinement,
                                   std::uint64_t global_seed, std::uint64_t path_index) {
  return run_one(std::move(system), std::move(payoff), SchemeKind::Euler, level, refinement,
                 global_seed, path_index);
}

CoupledSample evolve_milstein_coupled(SystemPtr system, PayoffPtr payoff, int level,
                                      int refinement, std::uint64_t global_seed,
                                      std::uint64_t path_index) {
  return run_one(std::move(system), std::move(payoff), SchemeKind::Milstein, level, refinement,
                 global_seed, path_index);
}

CoupledSample evolve_antithetic_coupled(SystemPtr system, PayoffPtr payoff, int level,
                                        int refinement, std::uint64_t global_seed,
                                        std::uint64_t path_index) {
  return run_one(std::move(system), std::move(payoff), SchemeKind::Antithetic, level, refinement,
                 global_seed, path_index);
}

CoupledSample evolve_approx_milstein_coupled(SystemPtr system, PayoffPtr payoff, int level,
                                             int refinement, std::uint64_t global_seed,
                                             std::uint64_t path_index) {
  return run_one(std::move(system), std::move(payoff), SchemeKind::ApproxMilstein, level,
                 refinement, global_seed, path_index);
}

CoupledSample evolve_base_level(SystemPtr system, PayoffPtr payoff, SchemeKind scheme,
                                std::uint64_t global_seed, std::uint64_t path_index) {
  // The base level has no coarse path, so the refinement factor is irrelevant;
  // the payoff restriction of approx-milstein still applies.
  CoupledEvolver evolver(std::move(system), std::move(payoff), scheme, 2);
  return evolver.evolve(0, global_seed, path_index);
}

}  // namespace mlmc
