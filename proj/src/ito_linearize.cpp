#include "mlmc/ito_linearize.hpp"

#include <algorithm>
#include <utility>

#include "mlmc/error.hpp"
#include "small_buffer.hpp"

namespace mlmc {

std::vector<double> AugmentedSystem::augmented_initial_state(const SdeSystem& inner,
                                                             const Payoff& payoff) {
  std::vector<double> s0(inner.initial_state().begin(), inner.initial_state().end());
  s0.push_back(payoff.value(inner.initial_state()));
  return s0;
}

AugmentedSystem::AugmentedSystem(SystemPtr inner, PayoffPtr payoff)
    : SdeSystem(inner->state_dim() + 1, inner->noise_dim(),
                augmented_initial_state(*inner, *payoff), inner->horizon(),
                inner->correlation_root()),
      inner_(std::move(inner)),
      payoff_(std::move(payoff)),
      selector_(linear(inner_->state_dim())) {}

std::string AugmentedSystem::name() const {
  return inner_->name() + "+ito(" + payoff_->name() + ")";
}

void AugmentedSystem::drift(std::span<const double> x, double t, std::span<double> out) const {
  const std::size_t d = inner_->state_dim();
  const std::size_t D = inner_->noise_dim();
  const auto s = x.first(d);
  inner_->drift(s, t, out.first(d));

  detail::SmallBuffer<64> b(d * D), grad(d), hess(d * d);
  inner_->diffusion(s, t, b.span());
  payoff_->gradient(s, grad.span());
  payoff_->hessian(s, hess.span());

  double alpha = 0.0;
  for (std::size_t i = 0; i < d; ++i) alpha += out[i] * grad[i];
  double second = 0.0;
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t k = 0; k < d; ++k) {
      const double pik = hess[i * d + k];
      if (pik == 0.0) continue;
      double bb = 0.0;
      for (std::size_t j = 0; j < D; ++j) bb += b[i * D + j] * b[k * D + j];
      second += bb * pik;
    }
  out[d] = alpha + 0.5 * second;
}

void AugmentedSystem::diffusion(std::span<const double> x, double t,
                                std::span<double> out) const {
  const std::size_t d = inner_->state_dim();
  const std::size_t D = inner_->noise_dim();
  const auto s = x.first(d);
  inner_->diffusion(s, t, out.first(d * D));
  detail::SmallBuffer<16> grad(d);
  payoff_->gradient(s, grad.span());
  for (std::size_t j = 0; j < D; ++j) {
    double beta = 0.0;
    for (std::size_t i = 0; i < d; ++i) beta += out[i * D + j] * grad[i];
    out[d * D + j] = beta;
  }
}

// d beta_{d+1,j} / d x_l = sum_i (d b_ij/d x_l) P_i + b_ij P_il for l <= d, and
// nothing depends on the appended component.
void AugmentedSystem::diffusion_jacobian(std::span<const double> x, double t,
                                         std::span<double> out) const {
  const std::size_t d = inner_->state_dim();
  const std::size_t D = inner_->noise_dim();
  const std::size_t da = d + 1;
  const auto s = x.first(d);

  detail::SmallBuffer<64> b(d * D), jac(d * D * d), grad(d), hess(d * d);
  inner_->diffusion(s, t, b.span());
  inner_->diffusion_jacobian(s, t, jac.span());
  payoff_->gradient(s, grad.span());
  payoff_->hessian(s, hess.span());

  std::fill(out.begin(), out.begin() + static_cast<std::ptrdiff_t>(da * D * da), 0.0);
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = 0; j < D; ++j)
      for (std::size_t l = 0; l < d; ++l) out[(i * D + j) * da + l] = jac[(i * D + j) * d + l];

  for (std::size_t j = 0; j < D; ++j)
    for (std::size_t l = 0; l < d; ++l) {
      double acc = 0.0;
      for (std::size_t i = 0; i < d; ++i)
        acc += jac[(i * D + j) * d + l] * grad[i] + b[i * D + j] * hess[i * d + l];
      out[(d * D + j) * da + l] = acc;
    }
}

void AugmentedSystem::h_tensor(std::span<const double> x, double t, std::span<double> out) const {
  const std::size_t d = inner_->state_dim();
  const std::size_t D = inner_->noise_dim();
  const std::size_t da = d + 1;
  // Inner rows are unchanged: the inner coefficients ignore the appended component.
  inner_->h_tensor(x.first(d), t, out.first(d * D * D));

  detail::SmallBuffer<64> b(da * D), jac(da * D * da);
  diffusion(x, t, b.span());
  diffusion_jacobian(x, t, jac.span());
  for (std::size_t j = 0; j < D; ++j)
    for (std::size_t k = 0; k < D; ++k) {
      double acc = 0.0;
      for (std::size_t l = 0; l < d; ++l) acc += b[l * D + k] * jac[(d * D + j) * da + l];
      out[(d * D + j) * D + k] = 0.5 * acc;
    }
}

std::shared_ptr<const AugmentedSystem> augment(SystemPtr system, PayoffPtr payoff) {
  if (!system || !payoff) throw ConfigError("augment needs a system and a payoff");
  check_payoff_fits(*payoff, *system);
  if (!payoff->has_derivatives())
    throw ConfigError("Ito linearization needs a payoff with two continuous derivatives; '" +
                      payoff->name() + "' is only Lipschitz");
  return std::make_shared<AugmentedSystem>(std::move(system), std::move(payoff));
}

double base_level_expectation(const AugmentedSystem& aug, double horizon) {
  const std::size_t da = aug.state_dim();
  std::vector<double> alpha(da);
  aug.drift(aug.initial_state(), 0.0, alpha);
  return aug.initial_state()[da - 1] + alpha[da - 1] * horizon;
}

}  // namespace mlmc
