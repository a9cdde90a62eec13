#include "mlmc/sde.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>

#include "mlmc/error.hpp"
#include "small_buffer.hpp"

namespace mlmc {

SdeSystem::SdeSystem(std::size_t state_dim, std::size_t noise_dim,
                     std::vector<double> initial_state, double horizon, Matrix correlation_root)
    : state_dim_(state_dim),
      noise_dim_(noise_dim),
      initial_state_(std::move(initial_state)),
      horizon_(horizon),
      correlation_root_(correlation_root.rows() == 0 ? Matrix::identity(noise_dim)
                                                     : std::move(correlation_root)) {
  if (state_dim_ == 0 || noise_dim_ == 0)
    throw DimensionError("system needs positive state and noise dimensions");
  if (initial_state_.size() != state_dim_)
    throw DimensionError("initial state has " + std::to_string(initial_state_.size()) +
                         " components, expected " + std::to_string(state_dim_));
  if (correlation_root_.rows() != noise_dim_ || correlation_root_.cols() != noise_dim_)
    throw DimensionError("correlation factor must be square of the noise dimension");
  if (!(horizon_ >= 0.0) || !std::isfinite(horizon_))
    throw DomainError("horizon must be finite and non-negative");
  identity_correlation_ = correlation_root_.is_identity();
}

Matrix SdeSystem::correlation() const {
  const std::size_t n = noise_dim_;
  Matrix omega(n, n);
  for (std::size_t j = 0; j < n; ++j)
    for (std::size_t k = 0; k < n; ++k) {
      double acc = 0.0;
      for (std::size_t q = 0; q < n; ++q) acc += correlation_root_(j, q) * correlation_root_(k, q);
      omega(j, k) = acc;
    }
  return omega;
}

void SdeSystem::diffusion_jacobian(std::span<const double> x, double t,
                                   std::span<double> out) const {
  const std::size_t d = state_dim_;
  const std::size_t nb = d * noise_dim_;
  detail::SmallBuffer<64> shifted(d), plus(nb), minus(nb);
  std::copy(x.begin(), x.end(), shifted.begin());
  for (std::size_t l = 0; l < d; ++l) {
    const double step = 1e-6 * (1.0 + std::fabs(x[l]));
    shifted[l] = x[l] + step;
    diffusion(shifted.span(), t, plus.span());
    shifted[l] = x[l] - step;
    diffusion(shifted.span(), t, minus.span());
    shifted[l] = x[l];
    for (std::size_t ij = 0; ij < nb; ++ij) out[ij * d + l] = (plus[ij] - minus[ij]) / (2.0 * step);
  }
}

void SdeSystem::contract_h_tensor(std::span<const double> b, std::span<const double> jacobian,
                                  std::span<double> out) const {
  const std::size_t d = state_dim_;
  const std::size_t D = noise_dim_;
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = 0; j < D; ++j)
      for (std::size_t k = 0; k < D; ++k) {
        double acc = 0.0;
        for (std::size_t l = 0; l < d; ++l) acc += b[l * D + k] * jacobian[(i * D + j) * d + l];
        out[(i * D + j) * D + k] = 0.5 * acc;
      }
}

void SdeSystem::h_tensor(std::span<const double> x, double t, std::span<double> out) const {
  const std::size_t d = state_dim_;
  const std::size_t D = noise_dim_;
  detail::SmallBuffer<64> b(d * D), jac(d * D * d);
  diffusion(x, t, b.span());
  diffusion_jacobian(x, t, jac.span());
  contract_h_tensor(b.span(), jac.span(), out);
}

namespace {

void require_finite(double v, const char* what) {
  if (!std::isfinite(v)) throw DomainError(std::string(what) + " must be finite");
}

class HestonSystem final : public SdeSystem {
 public:
  explicit HestonSystem(const HestonParams& p)
      : SdeSystem(2, 2, {p.initial_volatility, p.initial_price}, p.horizon, {}), p_(p) {}

  std::string name() const override { return "heston"; }

  void drift(std::span<const double> x, double, std::span<double> out) const override {
    out[0] = p_.kappa * (p_.theta - x[0]);
    out[1] = p_.mu * x[1];
  }

  void diffusion(std::span<const double> x, double, std::span<double> out) const override {
    const double root = std::sqrt(std::max(x[0], 0.0));
    out[0] = p_.xi * root;
    out[1] = 0.0;
    out[2] = 0.0;
    out[3] = p_.eta * root * x[1];
  }

  // Derivatives of sqrt(max(S1,0)) are taken as zero on the clamped side.
  void diffusion_jacobian(std::span<const double> x, double,
                          std::span<double> out) const override {
    std::fill(out.begin(), out.begin() + 8, 0.0);
    const bool positive = x[0] > 0.0;
    const double root = positive ? std::sqrt(x[0]) : 0.0;
    const double half_inv_root = positive ? 0.5 / root : 0.0;
    out[(0 * 2 + 0) * 2 + 0] = p_.xi * half_inv_root;
    out[(1 * 2 + 1) * 2 + 0] = p_.eta * x[1] * half_inv_root;
    out[(1 * 2 + 1) * 2 + 1] = p_.eta * root;
  }

  // h111 = xi^2/4, h221 = xi eta S2/4, h222 = eta^2 S1 S2/2 (for S1 > 0).
  void h_tensor(std::span<const double> x, double, std::span<double> out) const override {
    std::fill(out.begin(), out.begin() + 8, 0.0);
    if (!(x[0] > 0.0)) return;
    out[(0 * 2 + 0) * 2 + 0] = 0.25 * p_.xi * p_.xi;
    out[(1 * 2 + 1) * 2 + 0] = 0.25 * p_.xi * p_.eta * x[1];
    out[(1 * 2 + 1) * 2 + 1] = 0.5 * p_.eta * p_.eta * x[0] * x[1];
  }

  bool analytic_h_tensor() const override { return true; }

 private:
  HestonParams p_;
};

class GbmSystem final : public SdeSystem {
 public:
  explicit GbmSystem(const GbmParams& p)
      : SdeSystem(1, 1, {p.initial_value}, p.horizon, {}), p_(p) {}

  std::string name() const override { return "gbm"; }

  void drift(std::span<const double> x, double, std::span<double> out) const override {
    out[0] = p_.mu * x[0];
  }
  void diffusion(std::span<const double> x, double, std::span<double> out) const override {
    out[0] = p_.sigma * x[0];
  }
  void diffusion_jacobian(std::span<const double>, double,
                          std::span<double> out) const override {
    out[0] = p_.sigma;
  }
  void h_tensor(std::span<const double> x, double, std::span<double> out) const override {
    out[0] = 0.5 * p_.sigma * p_.sigma * x[0];
  }
  bool analytic_h_tensor() const override { return true; }

 private:
  GbmParams p_;
};

class FunctionalSystem final : public SdeSystem {
 public:
  FunctionalSystem(std::string name, std::size_t d, std::size_t D, DriftFn drift,
                   DiffusionFn diffusion, std::vector<double> s0, double horizon, Matrix root)
      : SdeSystem(d, D, std::move(s0), horizon, std::move(root)),
        name_(std::move(name)),
        drift_(std::move(drift)),
        diffusion_(std::move(diffusion)) {}

  std::string name() const override { return name_; }
  void drift(std::span<const double> x, double t, std::span<double> out) const override {
    drift_(x, t, out);
  }
  void diffusion(std::span<const double> x, double t, std::span<double> out) const override {
    diffusion_(x, t, out);
  }

 private:
  std::string name_;
  DriftFn drift_;
  DiffusionFn diffusion_;
};

}  // namespace

SystemPtr heston_system(const HestonParams& p) {
  require_finite(p.kappa, "kappa");
  require_finite(p.theta, "theta");
  require_finite(p.xi, "xi");
  require_finite(p.mu, "mu");
  require_finite(p.eta, "eta");
  require_finite(p.horizon, "horizon");
  if (!(p.initial_volatility > 0.0) || !std::isfinite(p.initial_volatility))
    throw DomainError("heston initial volatility must be positive");
  if (!(p.initial_price > 0.0) || !std::isfinite(p.initial_price))
    throw DomainError("heston initial price must be positive");
  return std::make_shared<HestonSystem>(p);
}

SystemPtr gbm_system(const GbmParams& p) {
  require_finite(p.mu, "mu");
  require_finite(p.sigma, "sigma");
  require_finite(p.horizon, "horizon");
  if (!(p.initial_value > 0.0) || !std::isfinite(p.initial_value))
    throw DomainError("gbm initial value must be positive");
  return std::make_shared<GbmSystem>(p);
}

SystemPtr make_system(std::string name, std::size_t state_dim, std::size_t noise_dim,
                      DriftFn drift, DiffusionFn diffusion, std::vector<double> initial_state,
                      double horizon, Matrix correlation_root) {
  if (!drift || !diffusion) throw ConfigError("system needs drift and diffusion callables");
  return std::make_shared<FunctionalSystem>(std::move(name), state_dim, noise_dim,
                                            std::move(drift), std::move(diffusion),
                                            std::move(initial_state), horizon,
                                            std::move(correlation_root));
}

}  // namespace mlmc
