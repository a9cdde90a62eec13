// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "mlmc/brownian.hpp"
#include "mlmc/engine.hpp"
#include "mlmc/experiment.hpp"
#include "mlmc/ito_linearize.hpp"
#include "mlmc/schemes.hpp"
#include "support.hpp"

using namespace mlmc;
using mlmc::testing::ls_slope;
using mlmc::testing::moments;
using mlmc::testing::rel_close;

namespace {

constexpr std::uint64_t kSeed = 20130601;

struct Verdict {
  bool pass = true;
  std::string detail;

  void require(bool ok, const std::string& what) {
    pass = pass && ok;
    if (!detail.empty()) detail += "; ";
    detail += what + (ok ? "" : " [x]");
  }
};

std::string fmt(double x, int digits = 4) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*g", digits, x);
  return buf;
}

// Every converged adaptive run is collected for the sampling-budget check.
struct BudgetEntry {
  std::string label;
  double epsilon;
  double sampled_variance;
};
std::vector<BudgetEntry> g_budget;

MlmcResult tracked_run(const std::string& label, const MlmcConfig& c, SystemPtr s, PayoffPtr p) {
  MlmcResult r = run(c, std::move(s), std::move(p));
  if (r.converged) {
    double v = 0.0;
    for (const auto& l : r.levels)
      if (!l.is_exact()) v += l.variance() / static_cast<double>(l.count());
    g_budget.push_back({label, c.epsilon, v});
  }
  return r;
}

MlmcConfig config(SchemeKind scheme, int M, double eps, bool ito, std::uint64_t seed = kSeed) {
  MlmcConfig c;
  c.scheme = scheme;
  c.refinement = M;
  c.epsilon = eps;
  c.ito_linearize = ito;
  c.global_seed = seed;
  c.threads = 0;
  return c;
}

double column(const Table& t, std::size_t row, const std::string& name) {
  const Cell& c = t.rows[row][t.column_index(name)];
  if (const auto* d = std::get_if<double>(&c)) return *d;
  return static_cast<double>(std::get<std::int64_t>(c));
}

Verdict variance_slopes() {
  struct Case {
    const char* label;
    const char* scheme;
    const char* payoff;
    const char* refine;
    bool ito;
    double lo, hi;
  };
  const Case cases[] = {
      {"euler/sin", "euler", "sin", "2", false, 0.8, 1.2},
      {"approx-milstein+ito/sin", "approx-milstein", "sin", "2", true, 1.7, 2.3},
      {"antithetic/sin M=2", "antithetic", "sin", "2", false, 1.7, 2.3},
      {"antithetic/sin M=4", "antithetic", "sin", "4", false, 1.7, 2.3},
      {"antithetic/call", "antithetic", "call", "2", false, 1.3, 1.8},
  };
  Verdict v;
  const auto start = std::chrono::steady_clock::now();
  for (const auto& c : cases) {
    ExperimentSpec s;
    apply_setting(s, "scheme", c.scheme);
    apply_setting(s, "payoff", c.payoff);
    apply_setting(s, "refine", c.refine);
    apply_setting(s, "ito-linearize", c.ito ? "true" : "false");
    apply_setting(s, "samples", "100000");
    apply_setting(s, "min-level", "2");
    apply_setting(s, "max-level", "6");
    apply_setting(s, "seed", std::to_string(kSeed));
    const Table t = variance_scan(s);
    std::vector<double> lh, lv;
    for (std::size_t r = 0; r < t.rows.size(); ++r) {
      lh.push_back(std::log(column(t, r, "h_l")));
      lv.push_back(std::log(column(t, r, "V_l")));
    }
    const double slope = ls_slope(lh, lv);
    v.require(slope >= c.lo && slope <= c.hi,
              std::string(c.label) + " " + fmt(slope, 3) + " in [" + fmt(c.lo) + "," + fmt(c.hi) + "]");
  }
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  v.require(secs <= 600.0, "runtime " + fmt(secs, 3) + " s");
  return v;
}

Verdict equal_expectations() {
  // Plain Heston with a linear payoff keeps the system two-dimensional.
  const auto sys = heston_system();
  const auto payoff = linear(1);
  const std::uint64_t n = 100000;
  CoupledEvolver level2(sys, payoff, SchemeKind::ApproxMilstein, 2);
  CoupledEvolver level1(sys, payoff, SchemeKind::ApproxMilstein, 2);
  std::vector<std::vector<double>> coarse(2), fine(2), star_gap(2);
  for (std::uint64_t p = 0; p < n; ++p) {
    const auto& a = level2.evolve(2, kSeed, p);
    for (int i = 0; i < 2; ++i) {
      coarse[i].push_back(a.coarse_terminal[i]);
      star_gap[i].push_back(a.auxiliary_terminal[i] - a.coarse_terminal[i]);
    }
    // Independent paths for the level below.
    const auto& b = level1.evolve(1, kSeed + 1, p);
    for (int i = 0; i < 2; ++i) fine[i].push_back(b.fine_terminal[i]);
  }
  Verdict v;
  for (int i = 0; i < 2; ++i) {
    const auto c = moments(coarse[i]), f = moments(fine[i]), g = moments(star_gap[i]);
    const double se = std::hypot(c.se, f.se);
    const double z1 = std::fabs(c.mean - f.mean) / se;
    // Components without a Levy-area term coincide exactly, so the gap can be identically zero.
    const double z2 = g.se > 0.0 ? std::fabs(g.mean) / g.se : (g.mean == 0.0 ? 0.0 : INFINITY);
    v.require(z1 <= 3.0, "S" + std::to_string(i + 1) + " coarse(l=2) vs fine(l=1) " + fmt(z1, 3) + " SE");
    v.require(z2 <= 3.0, "S" + std::to_string(i + 1) + " starred vs coarse " + fmt(z2, 3) + " SE");
  }
  return v;
}

// Direct double sum over the reversed rows, independent of the library's prefix-sum form.
double reversed_area(const IncrementGrid& g, std::size_t j, std::size_t k) {
  const std::size_t M = g.substeps();
  double a = 0.0;
  for (std::size_t m = 1; m < M; ++m)
    for (std::size_t q = 0; q < m; ++q) a += g(M - 1 - m, k) * g(M - 1 - q, j);
  return a;
}

Verdict transpose_lemma() {
  std::mt19937_64 rng(kSeed);
  std::uniform_int_distribution<int> pick_m(2, 8), pick_d(1, 3);
  std::normal_distribution<double> z(0.0, 1.0);
  double worst = 0.0;
  int grids = 0;
  for (; grids < 10000; ++grids) {
    const auto M = static_cast<std::size_t>(pick_m(rng));
    const auto D = static_cast<std::size_t>(pick_d(rng));
    IncrementGrid g(M, D, 0.1);
    for (std::size_t m = 0; m < M; ++m)
      for (std::size_t j = 0; j < D; ++j) g(m, j) = std::sqrt(0.1) * z(rng);
    const Matrix a = levy_quadrature(g);
    const Matrix r = levy_quadrature(reverse_substeps(g));
    for (std::size_t j = 0; j < D; ++j)
      for (std::size_t k = 0; k < D; ++k) {
        // Scale by the summed term magnitudes: an exact zero would otherwise make
        // a relative comparison meaningless.
        double scale = 0.0;
        for (std::size_t m = 0; m < M; ++m)
          for (std::size_t q = 0; q < M; ++q) scale += std::fabs(g(m, k) * g(q, j));
        worst = std::max(worst, std::fabs(r(j, k) - a(k, j)) / scale);
        worst = std::max(worst, std::fabs(reversed_area(g, j, k) - a(k, j)) / scale);
      }
  }
  Verdict v;
  v.require(worst <= 1e-12, std::to_string(grids) + " grids, worst relative " + fmt(worst, 3));
  return v;
}

Verdict exact_base_level() {
  const auto aug = augment(heston_system(), sin_of_component(1));
  const double exact = base_level_expectation(*aug, aug->horizon());
  const LevelSampler sampler(aug, aug->selector(), SchemeKind::Euler, 2, kSeed, 0);
  const LevelStats s = sampler.sample(0, 0, 1000000);
  const double se = std::sqrt(s.variance() / static_cast<double>(s.count()));
  const double z = std::fabs(s.mean() - exact) / se;
  Verdict v;
  v.require(std::fabs(exact - 0.907365) < 5e-7, "closed form " + fmt(exact, 7));
  v.require(z <= 3.0, "1e6-sample mean " + fmt(s.mean(), 7) + ", " + fmt(z, 3) + " SE");
  return v;
}

Verdict gbm_oracle() {
  const double target = std::exp(0.125), eps = 0.01;
  const SchemeKind schemes[] = {SchemeKind::Euler, SchemeKind::Milstein, SchemeKind::Antithetic,
                                SchemeKind::ApproxMilstein};
  Verdict v;
  for (SchemeKind k : schemes) {
    const std::string name(describe(k).name);
    int failures = 0;
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
      const auto r = tracked_run("gbm " + name, config(k, 2, eps, false, seed), gbm_system(), linear(0));
      if (!r.converged || std::fabs(r.estimate - target) > 3.0 * eps) ++failures;
    }
    v.require(failures <= 1, name + " " + std::to_string(failures) + "/20 outside 3 eps");
  }
  return v;
}

Verdict optimal_m() {
  double cost[6] = {};
  for (int M : {2, 4, 5}) {
    const auto r = tracked_run("call M=" + std::to_string(M),
                               config(SchemeKind::Antithetic, M, 1e-3, false),
                               heston_system(), european_call(1, 1.0));
    cost[M] = r.converged ? r.total_cost : INFINITY;
  }
  Verdict v;
  v.require(cost[4] < cost[2], "K(4)=" + fmt(cost[4], 6) + " < K(2)=" + fmt(cost[2], 6));
  v.require(cost[5] < cost[2], "K(5)=" + fmt(cost[5], 6) + " < K(2)=" + fmt(cost[2], 6));
  return v;
}

Verdict ito_savings() {
  Verdict v;
  for (SchemeKind k : {SchemeKind::Euler, SchemeKind::Antithetic, SchemeKind::ApproxMilstein}) {
    const std::string name(describe(k).name);
    double cost[2] = {};
    for (int ito = 0; ito < 2; ++ito) {
      const auto r = tracked_run("sin " + name, config(k, 4, 2e-3, ito == 1), heston_system(),
                                 sin_of_component(1));
      cost[ito] = r.converged ? r.total_cost : INFINITY;
    }
    v.require(cost[1] < cost[0], name + " " + fmt(cost[1], 6) + " < " + fmt(cost[0], 6));
  }
  return v;
}

Verdict sampling_budget() {
  Verdict v;
  double worst = 0.0;
  std::string worst_label;
  for (const auto& e : g_budget) {
    const double ratio = e.sampled_variance / (e.epsilon * e.epsilon);
    if (ratio > worst) {
      worst = ratio;
      worst_label = e.label;
    }
  }
  v.require(!g_budget.empty(), std::to_string(g_budget.size()) + " converged runs");
  v.require(worst <= 0.55, "max sum V/N / eps^2 = " + fmt(worst, 4) + " (" + worst_label + ")");
  return v;
}

Verdict determinism() {
  auto body = [](unsigned threads) {
    ExperimentSpec s;
    for (const char* scheme : {"euler", "antithetic", "approx-milstein"})
      apply_setting(s, "scheme", scheme);
    for (const char* m : {"2", "4"}) apply_setting(s, "refine", m);
    for (const char* e : {"1e-2", "5e-3", "2e-3"}) apply_setting(s, "eps", e);
    apply_setting(s, "threads", std::to_string(threads));
    std::ostringstream os;
    write_csv(cost_scan(s), os, version_stamp());
    const std::string text = os.str();
    return text.substr(text.find('\n') + 1);
  };
  const std::string one = body(1), eight = body(8);
  Verdict v;
  v.require(one == eight, std::to_string(one.size()) + " bytes, threads 1 vs 8 identical");
  return v;
}

Verdict hand_values() {
  Verdict v;
  const auto check = [&](const std::string& what, double got, double want) {
    v.require(rel_close(got, want, 1e-10), what + "=" + fmt(got, 10));
  };
  const auto unit_gbm = gbm_system({1.0, 1.0, 1.0, 0.125});
  const std::vector<double> one{1.0};
  check("D^f", milstein_fine_step(*unit_gbm, one, 0.0, 0.1, std::vector<double>{0.2})[0], 1.27);
  IncrementGrid g(2, 1, 0.1);
  g(0, 0) = g(1, 0) = 0.1;
  check("D^c", approx_milstein_coarse_step(*unit_gbm, one, one, 0.0, 0.2, g)[0], 1.32);

  const std::vector<double> v1{0.01}, h1{0.0625}, v2{0.01, 0.0025}, h2{0.25, 0.125};
  const auto n1 = optimal_sample_sizes(v1, h1, 0.1), n2 = optimal_sample_sizes(v2, h2, 0.1);
  v.require(n1 == std::vector<std::uint64_t>{2}, "N={" + std::to_string(n1[0]) + "}");
  v.require(n2 == std::vector<std::uint64_t>{4, 2},
            "N={" + std::to_string(n2[0]) + "," + std::to_string(n2[1]) + "}");
  check("N^i(M=4)", static_cast<double>(initial_samples(2, 4, {2, 1}, 400)), 50.0);
  check("N^i(M=2)", static_cast<double>(initial_samples(2, 2, {1, 1}, 400)), 200.0);

  std::vector<LevelStats> levels{LevelStats(0), LevelStats(1)};
  for (int i = 0; i < 100; ++i) levels[0].add(0.0, 1);
  for (int i = 0; i < 50; ++i) levels[1].add(0.0, 1);
  check("K^e", total_cost(levels, describe(SchemeKind::Euler), 2, 0.125, 1.0), 2000.0);
  check("K^a", total_cost(levels, describe(SchemeKind::Antithetic), 2, 0.125, 1.0), 2800.0);

  const auto aug = augment(heston_system(), sin_of_component(1));
  const std::vector<double> x{0.5, 1.0, std::sin(1.0)};
  std::vector<double> a(3), b(6), h(8);
  aug->drift(x, 0.0, a);
  aug->diffusion(x, 0.0, b);
  check("alpha3", a[2], std::cos(1.0) - std::sin(1.0) / 64.0);
  v.require(std::fabs(a[2] - 0.527154) < 5e-7, "alpha3~0.527154");
  check("beta32", b[5], 0.25 * std::sqrt(0.5) * std::cos(1.0));

  heston_system()->h_tensor(std::vector<double>{0.5, 1.0}, 0.0, h);
  check("h111", h[0], 0.25);
  check("h221", h[6], 0.0625);
  check("h222", h[7], 0.015625);
  return v;
}

}  // namespace

int main() {
  struct Criterion {
    const char* name;
    std::function<Verdict()> body;
  };
  // The budget check reads runs recorded by the adaptive criteria, so it comes after them.
  const Criterion criteria[] = {
      {"variance slopes", variance_slopes},
      {"equal expectations", equal_expectations},
      {"transpose lemma", transpose_lemma},
      {"exact base level", exact_base_level},
      {"gbm oracle", gbm_oracle},
      {"optimal refinement", optimal_m},
      {"ito linearization savings", ito_savings},
      {"sampling budget", sampling_budget},
      {"determinism", determinism},
      {"hand values", hand_values},
  };
  int failed = 0;
  for (const auto& c : criteria) {
    Verdict v;
    try {
      v = c.body();
    } catch (const std::exception& e) {
      v.require(false, std::string("exception: ") + e.what());
    }
    if (!v.pass) ++failed;
    std::printf("%s  %-28s %s\n", v.pass ? "PASS" : "FAIL", c.name, v.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria failed\n", failed, std::size(criteria));
  return failed == 0 ? 0 : 1;
}
