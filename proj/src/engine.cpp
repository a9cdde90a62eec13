#include "mlmc/engine.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <mutex>
#include <thread>

#include "mlmc/error.hpp"
#include "mlmc/ito_linearize.hpp"

namespace mlmc {

std::vector<std::uint64_t> optimal_sample_sizes(std::span<const double> variances,
                                                std::span<const double> step_sizes,
                                                double epsilon) {
  if (!(epsilon > 0.0)) throw ConfigError("epsilon must be positive");
  if (variances.size() != step_sizes.size())
    throw DimensionError("one step size per variance is required");
  double sum = 0.0;
  for (std::size_t l = 0; l < variances.size(); ++l) {
    if (!(step_sizes[l] > 0.0)) throw DimensionError("step sizes must be positive");
    sum += std::sqrt(std::max(variances[l], 0.0) / step_sizes[l]);
  }
  std::vector<std::uint64_t> counts(variances.size());
  const double scale = 2.0 / (epsilon * epsilon);
  for (std::size_t l = 0; l < variances.size(); ++l) {
    const double x = scale * std::sqrt(std::max(variances[l], 0.0) * step_sizes[l]) * sum;
    counts[l] = static_cast<std::uint64_t>(std::ceil(x - 1e-12 * x));
  }
  return counts;
}

std::uint64_t initial_samples(int level, int refinement, Rational beta, std::uint64_t previous_n,
                              std::uint64_t first_level_samples) {
  if (level < 1) throw DimensionError("initial_samples needs level >= 1");
  if (level == 1) return first_level_samples;
  const double x =
      std::pow(static_cast<double>(refinement), -(beta.value() + 1.0) / 2.0) * previous_n;
  const auto n = static_cast<std::uint64_t>(std::ceil(x - 1e-12 * x));
  return std::max<std::uint64_t>(n, 2);
}

bool converged(double y_last, double y_prev, int refinement, double epsilon, int level) {
  if (level < 2) return false;
  const double proxy = std::max(std::fabs(y_last), std::fabs(y_prev) / refinement);
  return proxy <= epsilon / std::sqrt(2.0);
}

double total_cost(std::span<const LevelStats> levels, const SchemeDescriptor& scheme,
                  int refinement, double horizon, double dimension_weight) {
  double cost = 0.0;
  for (const LevelStats& s : levels) {
    if (s.is_exact()) continue;
    const double steps = static_cast<double>(steps_per_sample(scheme.cost_rule, s.level(), refinement));
    cost += static_cast<double>(s.count()) * steps / horizon;
  }
  return dimension_weight * cost;
}

PreparedProblem prepare(const MlmcConfig& config, SystemPtr system, PayoffPtr payoff) {
  if (!system || !payoff) throw ConfigError("run needs a system and a payoff");
  check_payoff_fits(*payoff, *system);
  if (config.scheme == SchemeKind::Milstein && system->noise_dim() != 1)
    throw ConfigError("full Milstein needs Levy areas for D > 1; use antithetic or approx-milstein");

  PreparedProblem p;
  const bool augmented = config.ito_linearize || config.scheme == SchemeKind::ApproxMilstein;
  if (!augmented) {
    p.system = std::move(system);
    p.payoff = std::move(payoff);
    return p;
  }
  if (!payoff->has_derivatives()) {
    const char* why = config.ito_linearize ? "Ito linearization" : "approx-milstein";
    throw ConfigError(std::string(why) + " needs a payoff with two continuous derivatives; '" +
                      payoff->name() + "' is only Lipschitz");
  }
  const double d = static_cast<double>(system->state_dim());
  auto aug = augment(std::move(system), std::move(payoff));
  p.dimension_weight = (d + 1.0) / d;
  p.exact_base_level = config.ito_linearize;
  if (p.exact_base_level) p.base_value = base_level_expectation(*aug, aug->horizon());
  p.payoff = aug->selector();
  p.system = std::move(aug);
  return p;
}

LevelSampler::LevelSampler(SystemPtr system, PayoffPtr payoff, SchemeKind scheme, int refinement,
                           std::uint64_t global_seed, unsigned threads)
    : system_(std::move(system)),
      payoff_(std::move(payoff)),
      scheme_(scheme),
      refinement_(refinement),
      seed_(global_seed),
      threads_(threads == 0 ? std::max(1u, std::thread::hardware_concurrency()) : threads) {
  // Fail early on incompatible combinations.
  CoupledEvolver probe(system_, payoff_, scheme_, refinement_);
}

LevelStats LevelSampler::sample(int level, std::uint64_t first_path, std::uint64_t count) const {
  LevelStats total(level);
  if (count == 0) return total;
  const std::uint64_t chunks = (count + kChunk - 1) / kChunk;
  std::vector<LevelStats> partial(chunks, LevelStats(level));

  auto run_chunk = [&](CoupledEvolver& evolver, std::uint64_t c) {
    const std::uint64_t begin = first_path + c * kChunk;
    const std::uint64_t end = std::min(first_path + count, begin + kChunk);
    LevelStats& s = partial[c];
    for (std::uint64_t path = begin; path < end; ++path) {
      const CoupledSample& sample = evolver.evolve(level, seed_, path);
      s.add(sample.difference(), sample.steps_taken);
    }
  };

  const unsigned workers = static_cast<unsigned>(std::min<std::uint64_t>(threads_, chunks));
  if (workers <= 1) {
    CoupledEvolver evolver(system_, payoff_, scheme_, refinement_);
    for (std::uint64_t c = 0; c < chunks; ++c) run_chunk(evolver, c);
  } else {
    std::atomic<std::uint64_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    {
      std::vector<std::jthread> pool;
      pool.reserve(workers);
      for (unsigned w = 0; w < workers; ++w)
        pool.emplace_back([&] {
          try {
            CoupledEvolver evolver(system_, payoff_, scheme_, refinement_);
            for (std::uint64_t c = next++; c < chunks; c = next++) run_chunk(evolver, c);
          } catch (...) {
            std::lock_guard lock(failure_mutex);
            if (!failure) failure = std::current_exception();
          }
        });
    }
    if (failure) std::rethrow_exception(failure);
  }
  for (const LevelStats& s : partial) total.merge(s);
  return total;
}

void LevelSampler::extend(LevelStats& stats, std::uint64_t extra) const {
  if (extra == 0) return;
  stats.merge(sample(stats.level(), stats.count(), extra));
}

namespace {

double step_size(double horizon, int refinement, int level) {
  return horizon / static_cast<double>(int_pow(refinement, level));
}

// Tops up every sampled level to its optimal count; repeats with the refreshed
// variances until no level asks for more.
void allocate(std::vector<LevelStats>& levels, const LevelSampler& sampler, double epsilon,
              double horizon, int refinement) {
  const std::size_t first = levels.front().is_exact() ? 1 : 0;
  for (int round = 0; round < 50; ++round) {
    std::vector<double> v, h;
    for (std::size_t l = first; l < levels.size(); ++l) {
      v.push_back(levels[l].variance());
      h.push_back(step_size(horizon, refinement, static_cast<int>(l)));
    }
    const auto target = optimal_sample_sizes(v, h, epsilon);
    bool grew = false;
    for (std::size_t i = 0; i < target.size(); ++i) {
      LevelStats& s = levels[first + i];
      const std::uint64_t want = std::max<std::uint64_t>(target[i], 2);
      if (want > s.count()) {
        sampler.extend(s, want - s.count());
        grew = true;
      }
    }
    if (!grew) return;
  }
}

}  // namespace

MlmcResult run(const MlmcConfig& config, SystemPtr system, PayoffPtr payoff) {
  if (!(config.epsilon > 0.0)) throw ConfigError("epsilon must be positive");
  if (config.refinement < 2) throw ConfigError("refinement factor M must be at least 2");
  if (config.max_level < 2) throw ConfigError("max_level must be at least 2");
  if (config.initial_samples < 2) throw ConfigError("initial sample count must be at least 2");
  if (config.fixed_level && (*config.fixed_level < 0 || *config.fixed_level > config.max_level))
    throw ConfigError("fixed level must lie in [0, max_level]");
  if (!system || !(system->horizon() > 0.0)) throw ConfigError("run needs a positive horizon");

  const PreparedProblem prep = prepare(config, std::move(system), std::move(payoff));
  const SchemeDescriptor& scheme = describe(config.scheme);
  const int M = config.refinement;
  const double T = prep.system->horizon();
  const LevelSampler sampler(prep.system, prep.payoff, config.scheme, M, config.global_seed,
                             config.threads);

  MlmcResult result;
  result.exact_base_level = prep.exact_base_level;
  result.dimension_weight = prep.dimension_weight;
  result.refinement = M;
  result.horizon = T;
  result.scheme = config.scheme;

  std::vector<LevelStats>& levels = result.levels;
  if (prep.exact_base_level)
    levels.push_back(LevelStats::exact(0, prep.base_value));
  else
    levels.push_back(sampler.sample(0, 0, config.initial_samples));

  const int last_level = config.fixed_level.value_or(config.max_level);
  int L = 0;
  while (true) {
    if (L < last_level) {
      ++L;
      const std::uint64_t n0 = initial_samples(L, M, scheme.variance_exponent,
                                               levels.back().count(), config.initial_samples);
      levels.push_back(sampler.sample(L, 0, n0));
    }
    allocate(levels, sampler, config.epsilon, T, M);

    if (L >= 2) {
      result.bias_proxy = std::max(std::fabs(levels[L].mean()), std::fabs(levels[L - 1].mean()) / M);
    } else {
      result.bias_proxy = std::numeric_limits<double>::infinity();
    }
    if (config.fixed_level) {
      if (L == *config.fixed_level) {
        result.converged = true;
        break;
      }
      continue;
    }
    if (converged(levels[L].mean(), L >= 1 ? levels[L - 1].mean() : 0.0, M, config.epsilon, L)) {
      result.converged = true;
      break;
    }
    if (L >= config.max_level) break;
  }

  for (const LevelStats& s : levels) {
    result.estimate += s.mean();
    if (!s.is_exact()) result.sampling_variance += s.variance() / static_cast<double>(s.count());
  }
  result.total_cost = total_cost(levels, scheme, M, T, prep.dimension_weight);
  return result;
}

}  // namespace mlmc
