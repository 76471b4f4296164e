/*
 * quakescan C API: seismic event detection with four-feature logistic
 * regression. Opaque handles plus integer status codes; every function that
 * can fail returns a qs_status, and qs_last_error() describes the most
 * recent failure on the calling thread.
 */

#ifndef QUAKESCAN_H
#define QUAKESCAN_H

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum qs_status {
  QS_OK = 0,
  QS_ERR_CONFIG = 2,      /* bad configuration or arguments */
  QS_ERR_DATA = 3,        /* bad, missing, or degenerate data */
  QS_ERR_CONVERGENCE = 4  /* training diverged (non-finite loss) */
} qs_status;

const char* qs_version(void);

/* Message for the last failing call on this thread; empty string if none. */
const char* qs_last_error(void);

/* ---- traces ---------------------------------------------------------- */

typedef struct qs_trace qs_trace;

/* format: "csv", "binary", or NULL to pick by file extension. */
qs_status qs_trace_load(const char* path, const char* format, qs_trace** out);
qs_status qs_trace_create(const char* station, const char* channel,
                          double start_epoch_s, double rate_hz,
                          const double* samples, uint64_t n, qs_trace** out);
qs_status qs_trace_save(const qs_trace* trace, const char* path,
                        const char* format);
const char* qs_trace_station(const qs_trace* trace);
const char* qs_trace_channel(const qs_trace* trace);
double qs_trace_start(const qs_trace* trace);
double qs_trace_rate(const qs_trace* trace);
uint64_t qs_trace_size(const qs_trace* trace);
const double* qs_trace_samples(const qs_trace* trace);
void qs_trace_free(qs_trace* trace);

/* ---- models ---------------------------------------------------------- */

typedef struct qs_model qs_model;

qs_status qs_model_load(const char* path, qs_model** out);
qs_status qs_model_save(const qs_model* model, const char* path);
uint64_t qs_model_feature_count(const qs_model* model);
const char* qs_model_feature_name(const qs_model* model, uint64_t index);

/* Full per-window inference path: preprocessing with the default 5-25 Hz
 * zero-phase bandpass, feature extraction, stored normalization, logistic
 * prediction. */
qs_status qs_model_predict_window(const qs_model* model, const double* samples,
                                  uint64_t n, double rate_hz, double* prob_out);
void qs_model_free(qs_model* model);

/* ---- pipeline commands ----------------------------------------------- */

/* Each takes a flat-key JSON config string (the same contract as the CLI
 * subcommands) and, on success, stores a JSON summary in *summary_json,
 * which the caller releases with qs_string_free. summary_json may be NULL
 * when the summary is not wanted. */
qs_status qs_run_synth(const char* config_json, char** summary_json);
qs_status qs_run_extract(const char* config_json, char** summary_json);
qs_status qs_run_rank(const char* config_json, char** summary_json);
qs_status qs_run_train(const char* config_json, char** summary_json);
qs_status qs_run_scan(const char* config_json, char** summary_json);
qs_status qs_run_eval(const char* config_json, char** summary_json);

void qs_string_free(char* s);

#ifdef __cplusplus
}
#endif

#endif /* QUAKESCAN_H */
