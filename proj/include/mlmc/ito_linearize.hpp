#pragma once

#include <memory>

#include "mlmc/payoff.hpp"
#include "mlmc/sde.hpp"

namespace mlmc {

/// The (d+1)-dimensional system obtained by appending P(S) as a state
/// component and evolving it with Ito's lemma:
///
///   alpha_{d+1} = sum_i a_i P_i + 1/2 sum_j sum_{i,k} b_ij b_kj P_ik
///   beta_{d+1,j} = sum_i b_ij P_i
///
/// The first d components reproduce the inner system exactly. The extra
/// h-tensor row only needs first derivatives of beta_{d+1,j}, i.e. the payoff
/// hessian and the inner diffusion jacobian, so it is exact whenever the inner
/// jacobian is.
class AugmentedSystem final : public SdeSystem {
 public:
  AugmentedSystem(SystemPtr inner, PayoffPtr payoff);

  const SdeSystem& inner() const { return *inner_; }
  const Payoff& payoff() const { return *payoff_; }
  /// The linear selector of the appended component.
  const PayoffPtr& selector() const { return selector_; }

  std::string name() const override;
  void drift(std::span<const double> x, double t, std::span<double> out) const override;
  void diffusion(std::span<const double> x, double t, std::span<double> out) const override;
  void diffusion_jacobian(std::span<const double> x, double t,
                          std::span<double> out) const override;
  void h_tensor(std::span<const double> x, double t, std::span<double> out) const override;
  bool analytic_h_tensor() const override { return inner_->analytic_h_tensor(); }

 private:
  static std::vector<double> augmented_initial_state(const SdeSystem& inner, const Payoff& payoff);

  SystemPtr inner_;
  PayoffPtr payoff_;
  PayoffPtr selector_;
};

/// Builds the augmented system. Throws ConfigError for payoffs without two
/// continuous derivatives and DimensionError when the payoff does not fit.
std::shared_ptr<const AugmentedSystem> augment(SystemPtr system, PayoffPtr payoff);

/// P(S0) + alpha_{d+1}(S0, 0) T: the exact mean of the one-step base level.
double base_level_expectation(const AugmentedSystem& aug, double horizon);

}  // namespace mlmc
