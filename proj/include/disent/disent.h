/* C interface to the disent library. All functions are thread-safe as long
 * as a handle is not used concurrently from several threads. */
#ifndef DISENT_DISENT_H
#define DISENT_DISENT_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#  if defined(DISENT_BUILDING_LIBRARY)
#    define DISENT_API __declspec(dllexport)
#  else
#    define DISENT_API __declspec(dllimport)
#  endif
#else
#  define DISENT_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

/* Status codes. Values are stable. */
typedef enum disent_status {
  DISENT_OK = 0,
  DISENT_ERR_SHAPE = 1,
  DISENT_ERR_PARAMETER = 2,
  DISENT_ERR_INSUFFICIENT_SAMPLES = 3,
  DISENT_ERR_SINGLE_CLASS_BATCH = 4,
  DISENT_ERR_DATA_BALANCE = 5,
  DISENT_ERR_PARSE = 6,
  DISENT_ERR_IO = 7,
  DISENT_ERR_CONFIG = 8,
  DISENT_ERR_NUMERIC = 9,
  DISENT_ERR_UNDEFINED_CORRELATION = 10,
  DISENT_ERR_DEGENERATE = 11,
  DISENT_ERR_INTERNAL = 99
} disent_status;

/* Similarity measures between the two sensitive groups. */
typedef enum disent_measure {
  DISENT_MEASURE_MMD = 0,
  DISENT_MEASURE_SINKHORN = 1,
  DISENT_MEASURE_JEFFREY = 2,
  DISENT_MEASURE_FISHER_RAO = 3,
  DISENT_MEASURE_GAUSSIAN_W = 4
} disent_measure;

typedef struct disent_dataset disent_dataset;
typedef struct disent_model disent_model;

DISENT_API const char* disent_version(void);

/* Message of the last failed call on this thread; empty if none. */
DISENT_API const char* disent_last_error(void);

DISENT_API const char* disent_status_name(disent_status status);

/* Divergence between row-major samples z0 (n0 x d) and z1 (n1 x d) with
 * default measure settings. grad0/grad1 may be NULL; otherwise they receive
 * n0*d and n1*d entries. */
DISENT_API disent_status disent_divergence(disent_measure measure, const double* z0, size_t n0,
                                           const double* z1, size_t n1, size_t d, double* value,
                                           double* grad0, double* grad1);

DISENT_API disent_status disent_dataset_read_csv(const char* path, disent_dataset** out);
DISENT_API disent_status disent_dataset_write_csv(const disent_dataset* ds, const char* path);
DISENT_API size_t disent_dataset_rows(const disent_dataset* ds);
DISENT_API size_t disent_dataset_cols(const disent_dataset* ds);
DISENT_API void disent_dataset_free(disent_dataset* ds);

DISENT_API disent_status disent_model_load(const char* path, disent_model** out);
DISENT_API disent_status disent_model_save(const disent_model* model, const char* path);
DISENT_API size_t disent_model_input_dim(const disent_model* model);
DISENT_API size_t disent_model_embedding_dim(const disent_model* model);
/* Encodes n row-major inputs of width input_dim into n x embedding_dim. */
DISENT_API disent_status disent_model_encode(const disent_model* model, const double* x, size_t n,
                                             double* z);
DISENT_API void disent_model_free(disent_model* model);

/* Runs a CLI command ("generate", "train", "sweep", "evaluate", "correlate",
 * "export-embeddings") with a JSON config document (NULL for defaults). On
 * success *result_json receives a summary to release with disent_string_free. */
DISENT_API disent_status disent_run_command(const char* command, const char* config_json,
                                            char** result_json);

/* The fully resolved configuration for a JSON document, as JSON. */
DISENT_API disent_status disent_resolve_config(const char* config_json, char** result_json);

DISENT_API void disent_string_free(char* s);

#ifdef __cplusplus
}
#endif

#endif /* DISENT_DISENT_H */
