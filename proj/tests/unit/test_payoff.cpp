#include <cmath>
#include <random>

#include "doctest.h"
#include "mlmc/error.hpp"
#include "mlmc/payoff.hpp"
#include "mlmc/sde.hpp"
#include "support.hpp"

using namespace mlmc;
using mlmc::testing::rel_close;

namespace {

// Central differences of value(); checked against the analytic derivatives.
void check_derivatives(const Payoff& p, std::vector<double> x) {
  const std::size_t d = x.size();
  std::vector<double> g(d), hess(d * d);
  p.gradient(x, g);
  p.hessian(x, hess);
  for (std::size_t i = 0; i < d; ++i) {
    const double step = 1e-5 * (1.0 + std::fabs(x[i]));
    const double keep = x[i];
    x[i] = keep + step;
    const double fp = p.value(x);
    std::vector<double> gp(d);
    p.gradient(x, gp);
    x[i] = keep - step;
    const double fm = p.value(x);
    std::vector<double> gm(d);
    p.gradient(x, gm);
    x[i] = keep;
    CHECK(std::fabs((fp - fm) / (2 * step) - g[i]) <= 1e-5 * std::max(1.0, std::fabs(g[i])));
    for (std::size_t k = 0; k < d; ++k) {
      const double fd = (gp[k] - gm[k]) / (2 * step);
      CHECK(std::fabs(fd - hess[k * d + i]) <= 1e-5 * std::max(1.0, std::fabs(fd)));
    }
  }
}

}  // namespace

TEST_CASE("sin payoff hand values") {
  const auto p = sin_of_component(1);
  const std::vector<double> x{0.5, 1.0};
  CHECK(p->smoothness() == Smoothness::C2);
  CHECK(p->required_dim() == 2);
  CHECK(rel_close(p->value(x), std::sin(1.0), 1e-15));
  std::vector<double> g(2), h(4);
  p->gradient(x, g);
  p->hessian(x, h);
  CHECK(g[0] == 0.0);
  CHECK(rel_close(g[1], std::cos(1.0), 1e-15));
  CHECK(rel_close(h[3], -std::sin(1.0), 1e-15));
  CHECK(h[0] == 0.0);
  CHECK(h[1] == 0.0);
  CHECK(h[2] == 0.0);
}

TEST_CASE("linear payoff") {
  const auto p = linear(1);
  const std::vector<double> x{0.5, 1.0};
  CHECK(p->smoothness() == Smoothness::Linear);
  CHECK(p->value(x) == 1.0);
  std::vector<double> g(2), h(4, 7.0);
  p->gradient(x, g);
  p->hessian(x, h);
  CHECK(g == std::vector<double>{0.0, 1.0});
  for (double v : h) CHECK(v == 0.0);
}

TEST_CASE("european call") {
  const auto p = european_call(1, 1.0);
  CHECK(p->smoothness() == Smoothness::Lipschitz);
  CHECK_FALSE(p->has_derivatives());
  CHECK(p->value(std::vector<double>{0.5, 1.3}) == doctest::Approx(0.3).epsilon(1e-14));
  CHECK(p->value(std::vector<double>{0.5, 0.7}) == 0.0);
  std::vector<double> g(2), h(4);
  CHECK_THROWS_AS(p->gradient(std::vector<double>{0.5, 1.3}, g), ConfigError);
  CHECK_THROWS_AS(p->hessian(std::vector<double>{0.5, 1.3}, h), ConfigError);
}

TEST_CASE("quadratic payoff") {
  const auto p = quadratic(0, 1);
  CHECK(p->value(std::vector<double>{2.0, 3.0}) == 6.0);
  const auto sq = quadratic(1, 1);
  CHECK(sq->value(std::vector<double>{2.0, 3.0}) == 9.0);
  std::vector<double> h(4);
  sq->hessian(std::vector<double>{2.0, 3.0}, h);
  CHECK(h == std::vector<double>{0.0, 0.0, 0.0, 2.0});
}

TEST_CASE("analytic derivatives match finite differences") {
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> u(0.1, 3.0);
  const PayoffPtr payoffs[] = {sin_of_component(0), sin_of_component(2), linear(1),
                               quadratic(0, 2), quadratic(1, 1)};
  for (int trial = 0; trial < 100; ++trial)
    for (const auto& p : payoffs) check_derivatives(*p, {u(rng), u(rng), u(rng)});
}

TEST_CASE("named payoffs use 1-based components and defaults") {
  const auto heston = heston_system();
  const std::vector<double> x{0.5, 1.3};

  const auto call = make_builtin_payoff("call", {}, *heston);
  CHECK(call->value(x) == doctest::Approx(0.3).epsilon(1e-14));  // strike = S2(0) = 1
  const auto call_k = make_builtin_payoff("call", {{"strike", 1.2}}, *heston);
  CHECK(call_k->value(x) == doctest::Approx(0.1).epsilon(1e-12));

  CHECK(make_builtin_payoff("sin", {}, *heston)->value(x) == std::sin(1.3));
  CHECK(make_builtin_payoff("sin", {{"component", 1}}, *heston)->value(x) == std::sin(0.5));
  CHECK(make_builtin_payoff("linear", {}, *heston)->value(x) == 1.3);
  CHECK(make_builtin_payoff("quadratic", {{"component", 1}, {"component2", 2}}, *heston)
            ->value(x) == 0.5 * 1.3);

  CHECK_THROWS_AS(make_builtin_payoff("sin", {{"component", 3}}, *heston), DimensionError);
  CHECK_THROWS_AS(make_builtin_payoff("sin", {{"component", 0}}, *heston), DimensionError);
  CHECK_THROWS_AS(make_builtin_payoff("sin", {{"component", 1.5}}, *heston), DimensionError);
  CHECK_THROWS_AS(make_builtin_payoff("digital", {}, *heston), ConfigError);
}

TEST_CASE("payoff dimension check") {
  const auto gbm = gbm_system();
  CHECK_NOTHROW(check_payoff_fits(*linear(0), *gbm));
  CHECK_THROWS_AS(check_payoff_fits(*linear(1), *gbm), DimensionError);
}
