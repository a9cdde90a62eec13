#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "mlmc/engine.hpp"
#include "mlmc/table.hpp"

namespace mlmc {

enum class Subcommand { Estimate, VarianceScan, CostScan, WorkProfile };

/// estimate | variance-scan | cost-scan | work-profile. Throws ConfigError.
Subcommand parse_subcommand(std::string_view name);
std::string_view subcommand_name(Subcommand sub);

/// Everything a benchmark run needs, settable through the key=value grammar
/// shared by config files, command-line flags and the C API:
///
///   model=heston|gbm            payoff=call|sin|linear|quadratic
///   scheme=<name>   (list)      refine=<M>   (list)     eps=<tol> (list)
///   ito-linearize=true|false    seed=<u64>   threads=<n>
///   samples=<n>     max-level=<L>  min-level=<L>  initial-samples=<n>
///   out=<path>      param=<name>=<value>  or directly <name>=<value>
///
/// Model parameters: heston kappa theta xi mu eta s1 s2 T; gbm mu sigma s0 T.
/// Payoff parameters: component, component2 (1-based), strike.
/// The first explicit value of a list key replaces its default; later ones append.
struct ExperimentSpec {
  std::string model = "heston";
  std::map<std::string, double> params;
  std::string payoff = "sin";
  std::vector<std::string> schemes = {"euler"};
  bool ito_linearize = false;
  std::vector<int> refinements;  // empty: subcommand default
  std::vector<double> epsilons;  // empty: subcommand default
  std::uint64_t seed = 20130601;
  unsigned threads = 0;
  std::uint64_t samples = 100000;
  std::optional<int> max_level;
  int min_level = 1;
  std::uint64_t initial_samples = 400;
  std::string out;

  std::set<std::string> explicit_lists;
};

void apply_setting(ExperimentSpec& spec, std::string_view key, std::string_view value);
/// Restores a key to its default.
void reset_setting(ExperimentSpec& spec, std::string_view key);
/// Applies every "key=value" line; blank lines and '#' comments are skipped.
void load_config_file(ExperimentSpec& spec, const std::string& path);
void load_config_text(ExperimentSpec& spec, std::string_view text);

std::vector<int> resolved_refinements(const ExperimentSpec& spec, Subcommand sub);
std::vector<double> resolved_epsilons(const ExperimentSpec& spec, Subcommand sub);

SystemPtr build_model(const ExperimentSpec& spec);
PayoffPtr build_payoff(const ExperimentSpec& spec, const SdeSystem& system);
MlmcConfig make_config(const ExperimentSpec& spec, const std::string& scheme, int refinement,
                       double epsilon);

/// Columns: scheme,M,level,h_l,V_l,V_l_over_h_l,N_used,ito
Table variance_scan(const ExperimentSpec& spec);
/// Columns: scheme,M,eps,K,eps2K,L_final,estimate,converged,ito
Table cost_scan(const ExperimentSpec& spec);
/// Columns: scheme,level,fraction_of_total_steps,ito
Table work_profile(const ExperimentSpec& spec);
/// Columns: scheme,M,eps,level,N_l,Y_l,V_l,steps,estimate,K,converged,ito
Table estimate(const ExperimentSpec& spec);

Table run_experiment(const ExperimentSpec& spec, Subcommand sub);

/// True when a table with a "converged" column has any "false" row.
bool any_not_converged(const Table& table);

/// Version stamp written on the first CSV line.
std::string_view version_stamp();

}  // namespace mlmc
