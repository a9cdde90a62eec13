#pragma once

#include <cstddef>
#include <map>
#include <memory>
#include <span>
#include <string>

namespace mlmc {

class SdeSystem;

enum class Smoothness { C2, Lipschitz, Linear };

/// Scalar functional of the terminal state. Component indices are 0-based.
/// gradient()/hessian() are available iff smoothness is C2 or Linear; the
/// hessian is written row-major d x d.
class Payoff {
 public:
  explicit Payoff(Smoothness smoothness) : smoothness_(smoothness) {}
  virtual ~Payoff() = default;

  Smoothness smoothness() const { return smoothness_; }
  bool has_derivatives() const { return smoothness_ != Smoothness::Lipschitz; }

  virtual std::string name() const = 0;
  /// Smallest state dimension the payoff can be evaluated on.
  virtual std::size_t required_dim() const = 0;

  virtual double value(std::span<const double> x) const = 0;
  /// Throws ConfigError when the payoff has no derivatives.
  virtual void gradient(std::span<const double> x, std::span<double> out) const;
  virtual void hessian(std::span<const double> x, std::span<double> out) const;

 private:
  Smoothness smoothness_;
};

using PayoffPtr = std::shared_ptr<const Payoff>;

/// max(0, S_m - strike). Lipschitz, no derivatives.
PayoffPtr european_call(std::size_t component, double strike);
/// sin(S_m).
PayoffPtr sin_of_component(std::size_t component);
/// S_m.
PayoffPtr linear(std::size_t component);
/// S_i S_j.
PayoffPtr quadratic(std::size_t i, std::size_t j);

/// Named construction used by configuration front-ends.
/// Names: call | sin | linear | quadratic. Options (1-based components, as in
/// the usual mathematical notation): "component", "component2", "strike".
/// Defaults: last state component; strike = that component's initial value.
/// Throws DimensionError when an index exceeds the system dimension and
/// ConfigError for unknown names.
PayoffPtr make_builtin_payoff(const std::string& name, const std::map<std::string, double>& options,
                              const SdeSystem& system);

/// Throws DimensionError if `payoff` cannot be evaluated on `system`.
void check_payoff_fits(const Payoff& payoff, const SdeSystem& system);

}  // namespace mlmc
