#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "mlmc/matrix.hpp"

namespace mlmc {

/// A system dS_i = a_i(S,t) dt + sum_j b_ij(S,t) dW_j with correlated noise
/// (E[dW dW^T] = Omega dt, Omega = R R^T).
///
/// Layouts of the flat output buffers:
///   diffusion           b[i*D + j]
///   diffusion_jacobian  J[(i*D + j)*d + l] = d b_ij / d x_l
///   h_tensor            h[(i*D + j)*D + k] = 1/2 sum_l b_lk d b_ij / d x_l
///
/// Implementations must be immutable and safe to evaluate concurrently.
class SdeSystem {
 public:
  SdeSystem(std::size_t state_dim, std::size_t noise_dim, std::vector<double> initial_state,
            double horizon, Matrix correlation_root);
  virtual ~SdeSystem() = default;

  std::size_t state_dim() const { return state_dim_; }
  std::size_t noise_dim() const { return noise_dim_; }
  std::span<const double> initial_state() const { return initial_state_; }
  double horizon() const { return horizon_; }
  const Matrix& correlation_root() const { return correlation_root_; }
  /// Omega = R R^T.
  Matrix correlation() const;
  bool identity_correlation() const { return identity_correlation_; }

  virtual std::string name() const = 0;

  virtual void drift(std::span<const double> x, double t, std::span<double> out) const = 0;
  virtual void diffusion(std::span<const double> x, double t, std::span<double> out) const = 0;

  /// Default: central differences of diffusion() with step 1e-6 (1 + |x_l|).
  virtual void diffusion_jacobian(std::span<const double> x, double t,
                                  std::span<double> out) const;

  /// Default: contracted from diffusion() and diffusion_jacobian().
  virtual void h_tensor(std::span<const double> x, double t, std::span<double> out) const;

  /// False when h_tensor relies on finite differences (lower accuracy).
  virtual bool analytic_h_tensor() const { return false; }

 protected:
  void contract_h_tensor(std::span<const double> b, std::span<const double> jacobian,
                         std::span<double> out) const;

 private:
  std::size_t state_dim_;
  std::size_t noise_dim_;
  std::vector<double> initial_state_;
  double horizon_;
  Matrix correlation_root_;
  bool identity_correlation_;
};

using SystemPtr = std::shared_ptr<const SdeSystem>;

struct HestonParams {
  double kappa = 1.0;
  double theta = 1.0;
  double xi = 1.0;
  double mu = 1.0;
  double eta = 0.25;
  double initial_volatility = 0.5;
  double initial_price = 1.0;
  double horizon = 0.125;
};

/// dS1 = kappa (theta - S1) dt + xi sqrt(S1) dW1
/// dS2 = mu S2 dt + eta sqrt(S1) S2 dW2
/// sqrt(S1) is evaluated as sqrt(max(S1, 0)). Analytic h-tensor.
/// Throws DomainError for non-finite parameters or non-positive initial state.
SystemPtr heston_system(const HestonParams& params = {});

struct GbmParams {
  double mu = 1.0;
  double sigma = 0.2;
  double initial_value = 1.0;
  double horizon = 0.125;
};

/// dS = mu S dt + sigma S dW, with E[S(T)] = S0 exp(mu T).
SystemPtr gbm_system(const GbmParams& params = {});

using DriftFn = std::function<void(std::span<const double> x, double t, std::span<double> out)>;
using DiffusionFn = DriftFn;

/// User-defined system from plain callables; its h-tensor comes from central
/// differences of the diffusion (analytic_h_tensor() == false).
SystemPtr make_system(std::string name, std::size_t state_dim, std::size_t noise_dim,
                      DriftFn drift, DiffusionFn diffusion, std::vector<double> initial_state,
                      double horizon, Matrix correlation_root = {});

}  // namespace mlmc
