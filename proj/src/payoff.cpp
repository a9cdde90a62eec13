#include "mlmc/payoff.hpp"

#include <algorithm>
#include <cmath>

#include "mlmc/error.hpp"
#include "mlmc/sde.hpp"

namespace mlmc {

void Payoff::gradient(std::span<const double>, std::span<double>) const {
  throw ConfigError("payoff '" + name() + "' has no gradient");
}

void Payoff::hessian(std::span<const double>, std::span<double>) const {
  throw ConfigError("payoff '" + name() + "' has no hessian");
}

namespace {

class EuropeanCall final : public Payoff {
 public:
  EuropeanCall(std::size_t m, double strike)
      : Payoff(Smoothness::Lipschitz), m_(m), strike_(strike) {}
  std::string name() const override { return "call"; }
  std::size_t required_dim() const override { return m_ + 1; }
  double value(std::span<const double> x) const override {
    return std::max(0.0, x[m_] - strike_);
  }

 private:
  std::size_t m_;
  double strike_;
};

class SinOfComponent final : public Payoff {
 public:
  explicit SinOfComponent(std::size_t m) : Payoff(Smoothness::C2), m_(m) {}
  std::string name() const override { return "sin"; }
  std::size_t required_dim() const override { return m_ + 1; }
  double value(std::span<const double> x) const override { return std::sin(x[m_]); }
  void gradient(std::span<const double> x, std::span<double> out) const override {
    std::fill(out.begin(), out.end(), 0.0);
    out[m_] = std::cos(x[m_]);
  }
  void hessian(std::span<const double> x, std::span<double> out) const override {
    std::fill(out.begin(), out.end(), 0.0);
    out[m_ * x.size() + m_] = -std::sin(x[m_]);
  }

 private:
  std::size_t m_;
};

class LinearSelector final : public Payoff {
 public:
  explicit LinearSelector(std::size_t m) : Payoff(Smoothness::Linear), m_(m) {}
  std::string name() const override { return "linear"; }
  std::size_t required_dim() const override { return m_ + 1; }
  double value(std::span<const double> x) const override { return x[m_]; }
  void gradient(std::span<const double>, std::span<double> out) const override {
    std::fill(out.begin(), out.end(), 0.0);
    out[m_] = 1.0;
  }
  void hessian(std::span<const double>, std::span<double> out) const override {
    std::fill(out.begin(), out.end(), 0.0);
  }

 private:
  std::size_t m_;
};

class Quadratic final : public Payoff {
 public:
  Quadratic(std::size_t i, std::size_t j) : Payoff(Smoothness::C2), i_(i), j_(j) {}
  std::string name() const override { return "quadratic"; }
  std::size_t required_dim() const override { return std::max(i_, j_) + 1; }
  double value(std::span<const double> x) const override { return x[i_] * x[j_]; }
  void gradient(std::span<const double> x, std::span<double> out) const override {
    std::fill(out.begin(), out.end(), 0.0);
    out[i_] += x[j_];
    out[j_] += x[i_];
  }
  void hessian(std::span<const double> x, std::span<double> out) const override {
    std::fill(out.begin(), out.end(), 0.0);
    const std::size_t d = x.size();
    out[i_ * d + j_] += 1.0;
    out[j_ * d + i_] += 1.0;
  }

 private:
  std::size_t i_, j_;
};

std::size_t component_option(const std::map<std::string, double>& options, const char* key,
                             std::size_t fallback, std::size_t dim) {
  auto it = options.find(key);
  if (it == options.end()) return fallback;
  const double v = it->second;
  if (v != std::floor(v) || v < 1.0 || v > static_cast<double>(dim))
    throw DimensionError(std::string("payoff ") + key + " must be an integer in [1, " +
                         std::to_string(dim) + "]");
  return static_cast<std::size_t>(v) - 1;
}

}  // namespace

PayoffPtr european_call(std::size_t component, double strike) {
  return std::make_shared<EuropeanCall>(component, strike);
}
PayoffPtr sin_of_component(std::size_t component) {
  return std::make_shared<SinOfComponent>(component);
}
PayoffPtr linear(std::size_t component) { return std::make_shared<LinearSelector>(component); }
PayoffPtr quadratic(std::size_t i, std::size_t j) { return std::make_shared<Quadratic>(i, j); }

void check_payoff_fits(const Payoff& payoff, const SdeSystem& system) {
  if (payoff.required_dim() > system.state_dim())
    throw DimensionError("payoff '" + payoff.name() + "' needs " +
                         std::to_string(payoff.required_dim()) + " state components, system '" +
                         system.name() + "' has " + std::to_string(system.state_dim()));
}

PayoffPtr make_builtin_payoff(const std::string& name, const std::map<std::string, double>& options,
                              const SdeSystem& system) {
  const std::size_t d = system.state_dim();
  const std::size_t m = component_option(options, "component", d - 1, d);
  PayoffPtr payoff;
  if (name == "call") {
    auto it = options.find("strike");
    const double strike = it != options.end() ? it->second : system.initial_state()[m];
    payoff = european_call(m, strike);
  } else if (name == "sin") {
    payoff = sin_of_component(m);
  } else if (name == "linear") {
    payoff = linear(m);
  } else if (name == "quadratic") {
    payoff = quadratic(m, component_option(options, "component2", m, d));
  } else {
    throw ConfigError("unknown payoff '" + name + "' (expected call, sin, linear or quadratic)");
  }
  check_payoff_fits(*payoff, system);
  return payoff;
}

}  // namespace mlmc
