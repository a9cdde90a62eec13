#include "mlmc/experiment.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "mlmc/error.hpp"

namespace mlmc {

namespace {

constexpr std::string_view kVersion = "mlmc-bench 1.0.0";

const std::vector<double> kDefaultEpsilons = {2e-2, 1e-2, 5e-3, 2e-3, 1e-3};
const std::vector<int> kDefaultRefinements = {2, 3, 4, 5, 7};
constexpr int kDefaultScanTop = 6;
constexpr int kDefaultMaxLevel = 12;

const std::set<std::string, std::less<>> kHestonParams = {"kappa", "theta", "xi", "mu",
                                                          "eta",   "s1",    "s2", "T"};
const std::set<std::string, std::less<>> kGbmParams = {"mu", "sigma", "s0", "T"};
const std::set<std::string, std::less<>> kPayoffParams = {"component", "component2", "strike"};

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

template <class T>
T parse_number(std::string_view key, std::string_view text) {
  text = trim(text);
  T v{};
  auto [p, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc{} || p != text.data() + text.size())
    throw ConfigError("invalid value '" + std::string(text) + "' for '" + std::string(key) + "'");
  return v;
}

bool parse_bool(std::string_view key, std::string_view text) {
  text = trim(text);
  if (text == "true" || text == "1" || text == "yes" || text == "on") return true;
  if (text == "false" || text == "0" || text == "no" || text == "off") return false;
  throw ConfigError("invalid boolean '" + std::string(text) + "' for '" + std::string(key) + "'");
}

bool is_list_key(std::string_view key) {
  return key == "scheme" || key == "refine" || key == "eps";
}

// First explicit value replaces the default list.
template <class T>
void push_list(ExperimentSpec& spec, std::string_view key, std::vector<T>& list, T value) {
  if (!spec.explicit_lists.contains(std::string(key))) {
    list.clear();
    spec.explicit_lists.insert(std::string(key));
  }
  list.push_back(std::move(value));
}

void set_param(ExperimentSpec& spec, std::string_view name, std::string_view value) {
  name = trim(name);
  if (name.empty()) throw ConfigError("empty parameter name");
  spec.params[std::string(name)] = parse_number<double>(name, value);
}

double param_or(const ExperimentSpec& spec, const char* key, double fallback) {
  auto it = spec.params.find(key);
  return it == spec.params.end() ? fallback : it->second;
}

void check_params(const ExperimentSpec& spec, const std::set<std::string, std::less<>>& model_keys) {
  for (const auto& [k, v] : spec.params)
    if (!model_keys.contains(k) && !kPayoffParams.contains(k))
      throw ConfigError("unknown parameter '" + k + "' for model '" + spec.model + "'");
}

std::string bool_text(bool b) { return b ? "true" : "false"; }

}  // namespace

Subcommand parse_subcommand(std::string_view name) {
  if (name == "estimate") return Subcommand::Estimate;
  if (name == "variance-scan") return Subcommand::VarianceScan;
  if (name == "cost-scan") return Subcommand::CostScan;
  if (name == "work-profile") return Subcommand::WorkProfile;
  throw ConfigError("unknown subcommand '" + std::string(name) + "'");
}

std::string_view subcommand_name(Subcommand sub) {
  switch (sub) {
    case Subcommand::Estimate: return "estimate";
    case Subcommand::VarianceScan: return "variance-scan";
    case Subcommand::CostScan: return "cost-scan";
    case Subcommand::WorkProfile: return "work-profile";
  }
  return "";
}

std::string_view version_stamp() { return kVersion; }

void apply_setting(ExperimentSpec& spec, std::string_view key, std::string_view value) {
  key = trim(key);
  value = trim(value);
  if (key == "model") {
    if (value != "heston" && value != "gbm")
      throw ConfigError("unknown model '" + std::string(value) + "' (expected heston or gbm)");
    spec.model = std::string(value);
  } else if (key == "payoff") {
    spec.payoff = std::string(value);
  } else if (key == "scheme") {
    parse_scheme(value);
    push_list(spec, key, spec.schemes, std::string(value));
  } else if (key == "refine") {
    const int m = parse_number<int>(key, value);
    if (m < 2) throw ConfigError("refinement factor must be at least 2");
    push_list(spec, key, spec.refinements, m);
  } else if (key == "eps") {
    const double e = parse_number<double>(key, value);
    if (!(e > 0.0)) throw ConfigError("eps must be positive");
    push_list(spec, key, spec.epsilons, e);
  } else if (key == "ito-linearize") {
    spec.ito_linearize = value.empty() ? true : parse_bool(key, value);
  } else if (key == "seed") {
    spec.seed = parse_number<std::uint64_t>(key, value);
  } else if (key == "threads") {
    spec.threads = parse_number<unsigned>(key, value);
  } else if (key == "samples") {
    spec.samples = parse_number<std::uint64_t>(key, value);
    if (spec.samples < 2) throw ConfigError("samples must be at least 2");
  } else if (key == "max-level") {
    spec.max_level = parse_number<int>(key, value);
    if (*spec.max_level < 1) throw ConfigError("max-level must be at least 1");
  } else if (key == "min-level") {
    spec.min_level = parse_number<int>(key, value);
    if (spec.min_level < 0) throw ConfigError("min-level must be non-negative");
  } else if (key == "initial-samples") {
    spec.initial_samples = parse_number<std::uint64_t>(key, value);
  } else if (key == "out") {
    spec.out = std::string(value);
  } else if (key == "param") {
    const auto eq = value.find('=');
    if (eq == std::string_view::npos)
      throw ConfigError("param expects name=value, got '" + std::string(value) + "'");
    set_param(spec, value.substr(0, eq), value.substr(eq + 1));
  } else if (key == "config") {
    throw ConfigError("config files cannot include other config files");
  } else {
    set_param(spec, key, value);
  }
}

void reset_setting(ExperimentSpec& spec, std::string_view key) {
  const ExperimentSpec defaults;
  key = trim(key);
  if (is_list_key(key)) spec.explicit_lists.erase(std::string(key));
  if (key == "model") spec.model = defaults.model;
  else if (key == "payoff") spec.payoff = defaults.payoff;
  else if (key == "scheme") spec.schemes = defaults.schemes;
  else if (key == "refine") spec.refinements = defaults.refinements;
  else if (key == "eps") spec.epsilons = defaults.epsilons;
  else if (key == "ito-linearize") spec.ito_linearize = defaults.ito_linearize;
  else if (key == "seed") spec.seed = defaults.seed;
  else if (key == "threads") spec.threads = defaults.threads;
  else if (key == "samples") spec.samples = defaults.samples;
  else if (key == "max-level") spec.max_level = defaults.max_level;
  else if (key == "min-level") spec.min_level = defaults.min_level;
  else if (key == "initial-samples") spec.initial_samples = defaults.initial_samples;
  else if (key == "out") spec.out = defaults.out;
  else if (key == "param") spec.params.clear();
  else spec.params.erase(std::string(key));
}

void load_config_text(ExperimentSpec& spec, std::string_view text) {
  std::size_t line_no = 0;
  while (!text.empty()) {
    const auto nl = text.find('\n');
    std::string_view line = trim(text.substr(0, nl));
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    ++line_no;
    if (line.empty() || line.front() == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos)
      throw ConfigError("config line " + std::to_string(line_no) + ": expected key=value");
    apply_setting(spec, line.substr(0, eq), line.substr(eq + 1));
  }
}

void load_config_file(ExperimentSpec& spec, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  load_config_text(spec, buf.str());
}

std::vector<int> resolved_refinements(const ExperimentSpec& spec, Subcommand sub) {
  if (!spec.refinements.empty()) return spec.refinements;
  if (sub == Subcommand::CostScan) return kDefaultRefinements;
  return {2};
}

std::vector<double> resolved_epsilons(const ExperimentSpec& spec, Subcommand sub) {
  if (!spec.epsilons.empty()) return spec.epsilons;
  switch (sub) {
    case Subcommand::CostScan: return kDefaultEpsilons;
    case Subcommand::WorkProfile: return {5e-4};
    default: return {1e-2};
  }
}

SystemPtr build_model(const ExperimentSpec& spec) {
  if (spec.model == "heston") {
    check_params(spec, kHestonParams);
    HestonParams p;
    p.kappa = param_or(spec, "kappa", p.kappa);
    p.theta = param_or(spec, "theta", p.theta);
    p.xi = param_or(spec, "xi", p.xi);
    p.mu = param_or(spec, "mu", p.mu);
    p.eta = param_or(spec, "eta", p.eta);
    p.initial_volatility = param_or(spec, "s1", p.initial_volatility);
    p.initial_price = param_or(spec, "s2", p.initial_price);
    p.horizon = param_or(spec, "T", p.horizon);
    return heston_system(p);
  }
  if (spec.model == "gbm") {
    check_params(spec, kGbmParams);
    GbmParams p;
    p.mu = param_or(spec, "mu", p.mu);
    p.sigma = param_or(spec, "sigma", p.sigma);
    p.initial_value = param_or(spec, "s0", p.initial_value);
    p.horizon = param_or(spec, "T", p.horizon);
    return gbm_system(p);
  }
  throw ConfigError("unknown model '" + spec.model + "'");
}

PayoffPtr build_payoff(const ExperimentSpec& spec, const SdeSystem& system) {
  std::map<std::string, double> options;
  for (const auto& [k, v] : spec.params)
    if (kPayoffParams.contains(k)) options[k] = v;
  return make_builtin_payoff(spec.payoff, options, system);
}

MlmcConfig make_config(const ExperimentSpec& spec, const std::string& scheme, int refinement,
                       double epsilon) {
  MlmcConfig c;
  c.epsilon = epsilon;
  c.refinement = refinement;
  c.scheme = parse_scheme(scheme);
  c.ito_linearize = spec.ito_linearize;
  c.initial_samples = spec.initial_samples;
  c.max_level = spec.max_level.value_or(kDefaultMaxLevel);
  c.global_seed = spec.seed;
  c.threads = spec.threads;
  return c;
}

Table variance_scan(const ExperimentSpec& spec) {
  const SystemPtr system = build_model(spec);
  const PayoffPtr payoff = build_payoff(spec, *system);
  const int top = spec.max_level.value_or(kDefaultScanTop);
  const int bottom = std::max(1, spec.min_level);
  if (bottom > top) throw ConfigError("min-level exceeds max-level");

  Table t;
  t.columns = {"scheme", "M", "level", "h_l", "V_l", "V_l_over_h_l", "N_used", "ito"};
  for (const auto& scheme : spec.schemes) {
    for (int M : resolved_refinements(spec, Subcommand::VarianceScan)) {
      const MlmcConfig config = make_config(spec, scheme, M, 1.0);
      const PreparedProblem prep = prepare(config, system, payoff);
      const LevelSampler sampler(prep.system, prep.payoff, config.scheme, M, spec.seed,
                                 spec.threads);
      for (int l = bottom; l <= top; ++l) {
        const LevelStats s = sampler.sample(l, 0, spec.samples);
        const double h = system->horizon() / static_cast<double>(int_pow(M, l));
        t.rows.push_back({scheme, std::int64_t{M}, std::int64_t{l}, h, s.variance(),
                          s.variance() / h, static_cast<std::int64_t>(s.count()),
                          bool_text(spec.ito_linearize)});
      }
    }
  }
  return t;
}

Table cost_scan(const ExperimentSpec& spec) {
  const SystemPtr system = build_model(spec);
  const PayoffPtr payoff = build_payoff(spec, *system);
  Table t;
  t.columns = {"scheme", "M", "eps", "K", "eps2K", "L_final", "estimate", "converged", "ito"};
  for (const auto& scheme : spec.schemes)
    for (int M : resolved_refinements(spec, Subcommand::CostScan))
      for (double eps : resolved_epsilons(spec, Subcommand::CostScan)) {
        const MlmcResult r = run(make_config(spec, scheme, M, eps), system, payoff);
        t.rows.push_back({scheme, std::int64_t{M}, eps, r.total_cost, eps * eps * r.total_cost,
                          std::int64_t{r.final_level()}, r.estimate, bool_text(r.converged),
                          bool_text(spec.ito_linearize)});
      }
  return t;
}

Table work_profile(const ExperimentSpec& spec) {
  const SystemPtr system = build_model(spec);
  const PayoffPtr payoff = build_payoff(spec, *system);
  const int M = resolved_refinements(spec, Subcommand::WorkProfile).front();
  const double eps = resolved_epsilons(spec, Subcommand::WorkProfile).front();
  Table t;
  t.columns = {"scheme", "level", "fraction_of_total_steps", "ito"};
  for (const auto& scheme : spec.schemes) {
    const MlmcResult r = run(make_config(spec, scheme, M, eps), system, payoff);
    double total = 0.0;
    for (const auto& s : r.levels) total += static_cast<double>(s.step_cost());
    for (const auto& s : r.levels)
      t.rows.push_back({scheme, std::int64_t{s.level()},
                        total > 0.0 ? static_cast<double>(s.step_cost()) / total : 0.0,
                        bool_text(spec.ito_linearize)});
  }
  return t;
}

Table estimate(const ExperimentSpec& spec) {
  const SystemPtr system = build_model(spec);
  const PayoffPtr payoff = build_payoff(spec, *system);
  Table t;
  t.columns = {"scheme", "M", "eps", "level", "N_l", "Y_l", "V_l", "steps",
               "estimate", "K", "converged", "ito"};
  for (const auto& scheme : spec.schemes)
    for (int M : resolved_refinements(spec, Subcommand::Estimate))
      for (double eps : resolved_epsilons(spec, Subcommand::Estimate)) {
        const MlmcResult r = run(make_config(spec, scheme, M, eps), system, payoff);
        for (const auto& s : r.levels)
          t.rows.push_back({scheme, std::int64_t{M}, eps, std::int64_t{s.level()},
                            static_cast<std::int64_t>(s.count()), s.mean(), s.variance(),
                            static_cast<std::int64_t>(s.step_cost()), r.estimate, r.total_cost,
                            bool_text(r.converged), bool_text(spec.ito_linearize)});
      }
  return t;
}

Table run_experiment(const ExperimentSpec& spec, Subcommand sub) {
  switch (sub) {
    case Subcommand::Estimate: return estimate(spec);
    case Subcommand::VarianceScan: return variance_scan(spec);
    case Subcommand::CostScan: return cost_scan(spec);
    case Subcommand::WorkProfile: return work_profile(spec);
  }
  throw ConfigError("unknown subcommand");
}

bool any_not_converged(const Table& table) {
  const auto it = std::find(table.columns.begin(), table.columns.end(), "converged");
  if (it == table.columns.end()) return false;
  const auto c = static_cast<std::size_t>(it - table.columns.begin());
  for (const auto& row : table.rows)
    if (const auto* s = std::get_if<std::string>(&row[c]); s && *s == "false") return true;
  return false;
}

}  // namespace mlmc
