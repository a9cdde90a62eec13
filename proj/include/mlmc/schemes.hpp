#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "mlmc/brownian.hpp"
#include "mlmc/payoff.hpp"
#include "mlmc/sde.hpp"

namespace mlmc {

enum class SchemeKind { Euler, Milstein, Antithetic, ApproxMilstein };

struct Rational {
  int num = 0;
  int den = 1;
  double value() const { return static_cast<double>(num) / den; }
  friend bool operator==(const Rational&, const Rational&) = default;
};

/// How one coupled sample is charged, in time steps:
///   Euler          fine M^l + coarse M^{l-1}
///   Antithetic     2 M^l + M^{l-1}        (fine and antithetic paths)
///   ApproxMilstein M^l + 2 M^{l-1}        (starred and coarse paths)
enum class CostRule { Euler, Antithetic, ApproxMilstein };

struct SchemeDescriptor {
  SchemeKind kind;
  std::string_view name;
  Rational weak_order;
  Rational strong_order;
  /// Expected V_l ~ h_l^beta for smooth payoffs.
  Rational variance_exponent;
  CostRule cost_rule;
};

const SchemeDescriptor& describe(SchemeKind kind);
/// euler | milstein | antithetic | approx-milstein. Throws ConfigError.
SchemeKind parse_scheme(std::string_view name);

/// Steps charged to one level-l coupled sample (level 0: one step).
std::uint64_t steps_per_sample(CostRule rule, int level, int refinement);

/// Coefficient buffers sized for one system; reuse across steps to avoid
/// allocation. Not shareable between threads.
class StepWorkspace {
 public:
  explicit StepWorkspace(const SdeSystem& system);

  std::vector<double> drift, diffusion, h, drift_star, increment, prefix, scratch;
  Matrix levy;
};

/// state + a h + b dW.
void euler_step(const SdeSystem& system, std::span<const double> state, double t, double h,
                std::span<const double> dW, std::span<double> out, StepWorkspace& ws);
std::vector<double> euler_step(const SdeSystem& system, std::span<const double> state, double t,
                               double h, std::span<const double> dW);

/// Milstein step with the Levy areas dropped:
/// state + a h + b dW + sum_jk h_jk (dW_j dW_k - Omega_jk h).
void milstein_fine_step(const SdeSystem& system, std::span<const double> state, double t, double h,
                        std::span<const double> dW, std::span<double> out, StepWorkspace& ws);
std::vector<double> milstein_fine_step(const SdeSystem& system, std::span<const double> state,
                                       double t, double h, std::span<const double> dW);

/// Coarse step of the approximate-Milstein pair: drift at `star_state`,
/// diffusion and h-tensor at `coarse_state`, with the quadrature Levy-area
/// correction (A - A^T) of the grid subtracted inside the h-term.
/// `coarse_dW` and `levy` must be coarse_increment(grid) and levy_quadrature(grid).
void approx_milstein_coarse_step(const SdeSystem& system, std::span<const double> star_state,
                                 std::span<const double> coarse_state, double t, double coarse_dt,
                                 std::span<const double> coarse_dW, const Matrix& levy,
                                 std::span<double> out, StepWorkspace& ws);
/// Convenience form that derives the increment and the quadrature from `grid`.
/// Throws DomainError unless coarse_dt == M * grid.delta_t() (relative 1e-12).
std::vector<double> approx_milstein_coarse_step(const SdeSystem& system,
                                                std::span<const double> star_state,
                                                std::span<const double> coarse_state, double t,
                                                double coarse_dt, const IncrementGrid& grid);

/// One coupled (fine, coarse) sample of a level. At level 0 only the fine
/// payoff exists.
struct CoupledSample {
  double fine_payoff = 0.0;
  std::optional<double> coarse_payoff;
  std::vector<double> fine_terminal;
  std::vector<double> coarse_terminal;
  /// Antithetic path S^a or starred path S^*; empty for other schemes.
  std::vector<double> auxiliary_terminal;
  std::uint64_t steps_taken = 0;
  /// max over coarse times n of ||S^f_n - S^c_n||^2.
  double max_gap_sq = 0.0;

  double difference() const { return fine_payoff - coarse_payoff.value_or(0.0); }
};

/// Supplies the grid of coarse step n (shape and delta_t preset by the caller).
using GridSource = std::function<void(std::uint64_t coarse_step, IncrementGrid& grid)>;

/// Evolves coupled paths for one scheme. Holds reusable buffers, so one
/// instance per thread; the system and payoff are shared read-only.
class CoupledEvolver {
 public:
  /// Throws ConfigError for Milstein with D > 1, approximate Milstein with a
  /// non-linear payoff, antithetic/approximate Milstein with M < 2.
  CoupledEvolver(SystemPtr system, PayoffPtr payoff, SchemeKind scheme, int refinement);

  /// Level 0: one step of size T. Level l >= 1: coupled pair with
  /// fine step T M^-l over M^{l-1} coarse steps.
  const CoupledSample& evolve(int level, const GridSource& source);
  const CoupledSample& evolve(int level, std::uint64_t global_seed, std::uint64_t path_index);

  const SdeSystem& system() const { return *system_; }
  SchemeKind scheme() const { return scheme_; }
  int refinement() const { return refinement_; }

 private:
  void evolve_base(const GridSource& source);
  void evolve_coupled(int level, const GridSource& source);

  SystemPtr system_;
  PayoffPtr payoff_;
  SchemeKind scheme_;
  int refinement_;
  StepWorkspace ws_;
  IncrementGrid grid_;
  std::vector<double> fine_, anti_, coarse_, star_, next_;
  CoupledSample sample_;
};

CoupledSample evolve_euler_coupled(SystemPtr system, PayoffPtr payoff, int level, int refinement,
                                   std::uint64_t global_seed, std::uint64_t path_index);
CoupledSample evolve_milstein_coupled(SystemPtr system, PayoffPtr payoff, int level,
                                      int refinement, std::uint64_t global_seed,
                                      std::uint64_t path_index);
CoupledSample evolve_antithetic_coupled(SystemPtr system, PayoffPtr payoff, int level,
                                        int refinement, std::uint64_t global_seed,
                                        std::uint64_t path_index);
CoupledSample evolve_approx_milstein_coupled(SystemPtr system, PayoffPtr payoff, int level,
                                             int refinement, std::uint64_t global_seed,
                                             std::uint64_t path_index);
CoupledSample evolve_base_level(SystemPtr system, PayoffPtr payoff, SchemeKind scheme,
                                std::uint64_t global_seed, std::uint64_t path_index);

/// M^level as an integer; throws DimensionError on overflow past 2^62.
std::uint64_t int_pow(int base, int exponent);

}  // namespace mlmc
