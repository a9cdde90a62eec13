#include "mlmc/mlmc.h"

#include <iostream>
#include <memory>
#include <string>
#include <vector>

#include "mlmc/error.hpp"
#include "mlmc/experiment.hpp"

struct mlmc_spec {
  mlmc::ExperimentSpec spec;
};

struct mlmc_table {
  mlmc::Table table;
  mutable std::vector<std::string> text;  // formatted cells, filled on demand
  mutable std::vector<bool> formatted;
};

struct mlmc_result {
  mlmc::MlmcResult result;
};

namespace {

thread_local std::string last_error;

template <class F>
mlmc_status guarded(F&& f) {
  try {
    f();
    last_error.clear();
    return MLMC_OK;
  } catch (const mlmc::ConfigError& e) {
    last_error = e.what();
    return MLMC_ERR_CONFIG;
  } catch (const mlmc::DimensionError& e) {
    last_error = e.what();
    return MLMC_ERR_DIMENSION;
  } catch (const mlmc::DomainError& e) {
    last_error = e.what();
    return MLMC_ERR_DOMAIN;
  } catch (const mlmc::IoError& e) {
    last_error = e.what();
    return MLMC_ERR_IO;
  } catch (const std::exception& e) {
    last_error = e.what();
    return MLMC_ERR_INTERNAL;
  } catch (...) {
    last_error = "unknown error";
    return MLMC_ERR_INTERNAL;
  }
}

mlmc_status invalid(const char* what) {
  last_error = what;
  return MLMC_ERR_INVALID_ARGUMENT;
}

bool in_range(const mlmc_table* t, size_t row, size_t col) {
  return t && row < t->table.rows.size() && col < t->table.columns.size();
}

}  // namespace

extern "C" {

const char* mlmc_version(void) { return mlmc::version_stamp().data(); }

const char* mlmc_last_error(void) { return last_error.c_str(); }

mlmc_status mlmc_spec_create(mlmc_spec** out) {
  if (!out) return invalid("null output pointer");
  return guarded([&] { *out = new mlmc_spec{}; });
}

void mlmc_spec_destroy(mlmc_spec* spec) { delete spec; }

mlmc_status mlmc_spec_set(mlmc_spec* spec, const char* key, const char* value) {
  if (!spec || !key || !value) return invalid("null argument");
  return guarded([&] { mlmc::apply_setting(spec->spec, key, value); });
}

mlmc_status mlmc_spec_reset(mlmc_spec* spec, const char* key) {
  if (!spec || !key) return invalid("null argument");
  return guarded([&] { mlmc::reset_setting(spec->spec, key); });
}

mlmc_status mlmc_spec_load_file(mlmc_spec* spec, const char* path) {
  if (!spec || !path) return invalid("null argument");
  return guarded([&] { mlmc::load_config_file(spec->spec, path); });
}

const char* mlmc_spec_output_path(const mlmc_spec* spec) {
  return spec ? spec->spec.out.c_str() : "";
}

mlmc_status mlmc_parse_subcommand(const char* name, mlmc_subcommand* out) {
  if (!name || !out) return invalid("null argument");
  return guarded([&] { *out = static_cast<mlmc_subcommand>(mlmc::parse_subcommand(name)); });
}

mlmc_status mlmc_run_experiment(const mlmc_spec* spec, mlmc_subcommand sub, mlmc_table** out) {
  if (!spec || !out) return invalid("null argument");
  if (sub < MLMC_ESTIMATE || sub > MLMC_WORK_PROFILE) return invalid("unknown subcommand");
  return guarded([&] {
    auto t = std::make_unique<mlmc_table>();
    t->table = mlmc::run_experiment(spec->spec, static_cast<mlmc::Subcommand>(sub));
    *out = t.release();
  });
}

size_t mlmc_table_rows(const mlmc_table* table) { return table ? table->table.rows.size() : 0; }

size_t mlmc_table_cols(const mlmc_table* table) {
  return table ? table->table.columns.size() : 0;
}

const char* mlmc_table_column_name(const mlmc_table* table, size_t col) {
  if (!table || col >= table->table.columns.size()) return nullptr;
  return table->table.columns[col].c_str();
}

mlmc_status mlmc_table_find_column(const mlmc_table* table, const char* name, size_t* col) {
  if (!table || !name || !col) return invalid("null argument");
  return guarded([&] { *col = table->table.column_index(name); });
}

mlmc_status mlmc_table_cell_string(const mlmc_table* table, size_t row, size_t col,
                                   const char** out) {
  if (!out || !in_range(table, row, col)) return invalid("cell out of range");
  const size_t cols = table->table.columns.size();
  if (table->text.empty()) {
    table->text.resize(table->table.rows.size() * cols);
    table->formatted.assign(table->text.size(), false);
  }
  const size_t i = row * cols + col;
  if (!table->formatted[i]) {
    const auto& cell = table->table.rows[row][col];
    if (const auto* s = std::get_if<std::string>(&cell))
      table->text[i] = *s;
    else
      table->text[i] = mlmc::format_cell(cell);
    table->formatted[i] = true;
  }
  *out = table->text[i].c_str();
  return MLMC_OK;
}

mlmc_status mlmc_table_cell_double(const mlmc_table* table, size_t row, size_t col, double* out) {
  if (!out || !in_range(table, row, col)) return invalid("cell out of range");
  const auto& cell = table->table.rows[row][col];
  if (const auto* d = std::get_if<double>(&cell)) {
    *out = *d;
  } else if (const auto* i = std::get_if<std::int64_t>(&cell)) {
    *out = static_cast<double>(*i);
  } else {
    return invalid("cell is not numeric");
  }
  return MLMC_OK;
}

mlmc_status mlmc_table_write_csv(const mlmc_table* table, const char* path) {
  if (!table || !path) return invalid("null argument");
  return guarded([&] {
    if (std::string_view(path) == "-") {
      mlmc::write_csv(table->table, std::cout, mlmc::version_stamp());
      std::cout.flush();
    } else {
      mlmc::write_csv_file(table->table, path, mlmc::version_stamp());
    }
  });
}

int mlmc_table_any_not_converged(const mlmc_table* table) {
  return table && mlmc::any_not_converged(table->table) ? 1 : 0;
}

void mlmc_table_destroy(mlmc_table* table) { delete table; }

mlmc_status mlmc_estimate(const mlmc_spec* spec, mlmc_result** out) {
  if (!spec || !out) return invalid("null argument");
  return guarded([&] {
    const auto& s = spec->spec;
    const auto system = mlmc::build_model(s);
    const auto payoff = mlmc::build_payoff(s, *system);
    const auto config = mlmc::make_config(
        s, s.schemes.front(), mlmc::resolved_refinements(s, mlmc::Subcommand::Estimate).front(),
        mlmc::resolved_epsilons(s, mlmc::Subcommand::Estimate).front());
    auto r = std::make_unique<mlmc_result>();
    r->result = mlmc::run(config, system, payoff);
    *out = r.release();
  });
}

double mlmc_result_estimate(const mlmc_result* r) { return r ? r->result.estimate : 0.0; }
double mlmc_result_cost(const mlmc_result* r) { return r ? r->result.total_cost : 0.0; }
int mlmc_result_converged(const mlmc_result* r) { return r && r->result.converged ? 1 : 0; }
int mlmc_result_final_level(const mlmc_result* r) { return r ? r->result.final_level() : -1; }

double mlmc_result_sampling_variance(const mlmc_result* r) {
  return r ? r->result.sampling_variance : 0.0;
}

mlmc_status mlmc_result_level(const mlmc_result* r, int level, uint64_t* samples, double* mean,
                              double* variance) {
  if (!r || level < 0 || level > r->result.final_level()) return invalid("level out of range");
  const auto& s = r->result.levels[static_cast<size_t>(level)];
  if (samples) *samples = s.count();
  if (mean) *mean = s.mean();
  if (variance) *variance = s.variance();
  return MLMC_OK;
}

void mlmc_result_destroy(mlmc_result* result) { delete result; }

}  // extern "C"
