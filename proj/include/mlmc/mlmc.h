#ifndef MLMC_MLMC_H
#define MLMC_MLMC_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#  if defined(MLMC_BUILDING_LIBRARY)
#    define MLMC_API __declspec(dllexport)
#  else
#    define MLMC_API __declspec(dllimport)
#  endif
#else
#  define MLMC_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum mlmc_status {
  MLMC_OK = 0,
  MLMC_ERR_CONFIG = 1,
  MLMC_ERR_DIMENSION = 2,
  MLMC_ERR_DOMAIN = 3,
  MLMC_ERR_IO = 4,
  MLMC_ERR_INVALID_ARGUMENT = 5,
  MLMC_ERR_INTERNAL = 6
} mlmc_status;

typedef enum mlmc_subcommand {
  MLMC_ESTIMATE = 0,
  MLMC_VARIANCE_SCAN = 1,
  MLMC_COST_SCAN = 2,
  MLMC_WORK_PROFILE = 3
} mlmc_subcommand;

typedef struct mlmc_spec mlmc_spec;
typedef struct mlmc_table mlmc_table;
typedef struct mlmc_result mlmc_result;

MLMC_API const char* mlmc_version(void);
/* Message of the last failed call on this thread; "" if none. */
MLMC_API const char* mlmc_last_error(void);

/* Experiment specification, configured with the key=value grammar. */
MLMC_API mlmc_status mlmc_spec_create(mlmc_spec** out);
MLMC_API void mlmc_spec_destroy(mlmc_spec* spec);
MLMC_API mlmc_status mlmc_spec_set(mlmc_spec* spec, const char* key, const char* value);
MLMC_API mlmc_status mlmc_spec_reset(mlmc_spec* spec, const char* key);
MLMC_API mlmc_status mlmc_spec_load_file(mlmc_spec* spec, const char* path);
/* Resolved "out" setting; "" means stdout. */
MLMC_API const char* mlmc_spec_output_path(const mlmc_spec* spec);
MLMC_API mlmc_status mlmc_parse_subcommand(const char* name, mlmc_subcommand* out);

MLMC_API mlmc_status mlmc_run_experiment(const mlmc_spec* spec, mlmc_subcommand sub,
                                         mlmc_table** out);

MLMC_API size_t mlmc_table_rows(const mlmc_table* table);
MLMC_API size_t mlmc_table_cols(const mlmc_table* table);
/* Returned strings stay valid until the table is destroyed. */
MLMC_API const char* mlmc_table_column_name(const mlmc_table* table, size_t col);
MLMC_API mlmc_status mlmc_table_find_column(const mlmc_table* table, const char* name,
                                            size_t* col);
MLMC_API mlmc_status mlmc_table_cell_string(const mlmc_table* table, size_t row, size_t col,
                                            const char** out);
MLMC_API mlmc_status mlmc_table_cell_double(const mlmc_table* table, size_t row, size_t col,
                                            double* out);
/* path "-" writes to stdout. */
MLMC_API mlmc_status mlmc_table_write_csv(const mlmc_table* table, const char* path);
MLMC_API int mlmc_table_any_not_converged(const mlmc_table* table);
MLMC_API void mlmc_table_destroy(mlmc_table* table);

/* Single adaptive run of the first scheme, refinement and eps in the spec. */
MLMC_API mlmc_status mlmc_estimate(const mlmc_spec* spec, mlmc_result** out);
MLMC_API double mlmc_result_estimate(const mlmc_result* result);
MLMC_API double mlmc_result_cost(const mlmc_result* result);
MLMC_API int mlmc_result_converged(const mlmc_result* result);
MLMC_API int mlmc_result_final_level(const mlmc_result* result);
MLMC_API double mlmc_result_sampling_variance(const mlmc_result* result);
MLMC_API mlmc_status mlmc_result_level(const mlmc_result* result, int level, uint64_t* samples,
                                       double* mean, double* variance);
MLMC_API void mlmc_result_destroy(mlmc_result* result);

#ifdef __cplusplus
}
#endif

#endif
