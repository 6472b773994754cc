/* C interface to the orpca library: batch and online robust PCA with
 * change-point detection.
 *
 * Every function returns an orpca_status; on failure the thread's last error
 * message is available from orpca_last_error(). Handles are opaque and owned
 * by the caller, who releases them with the matching *_free function (all of
 * which accept NULL). Matrices are column-major, one sample per column.
 */
#ifndef ORPCA_ORPCA_H
#define ORPCA_ORPCA_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define ORPCA_API __declspec(dllexport)
#else
#define ORPCA_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum orpca_status {
  ORPCA_OK = 0,
  ORPCA_ERR_CONTRACT = 1,  /* invalid argument or call sequence */
  ORPCA_ERR_IO = 2,
  ORPCA_ERR_PARSE = 3,
  ORPCA_ERR_NUMERICAL = 4,
  ORPCA_ERR_VERSION = 5,   /* snapshot written by another format version */
  ORPCA_ERR_CORRUPT = 6,   /* damaged snapshot */
  ORPCA_ERR_INIT = 7,      /* burn-in produced no usable subspace */
  ORPCA_ERR_INTERNAL = 8
} orpca_status;

ORPCA_API const char* orpca_last_error(void);
ORPCA_API const char* orpca_version(void);

/* ---- matrices ---- */

typedef struct orpca_matrix orpca_matrix;

/* data may be NULL for a zero matrix. */
ORPCA_API orpca_status orpca_matrix_create(int64_t rows, int64_t cols, const double* data, orpca_matrix** out);
ORPCA_API void orpca_matrix_free(orpca_matrix* m);
ORPCA_API int64_t orpca_matrix_rows(const orpca_matrix* m);
ORPCA_API int64_t orpca_matrix_cols(const orpca_matrix* m);
ORPCA_API const double* orpca_matrix_data(const orpca_matrix* m);

/* format: "csv", "raw-f64", or NULL to choose by file extension (.f64/.bin
 * are raw-f64). Files hold one sample per row (csv) or record (raw-f64). */
ORPCA_API orpca_status orpca_matrix_read(const char* path, const char* format, orpca_matrix** out);
ORPCA_API orpca_status orpca_matrix_write(const orpca_matrix* m, const char* path, const char* format);

/* ---- streams ---- */

typedef struct orpca_stream orpca_stream;

ORPCA_API orpca_status orpca_stream_open(const char* path, const char* format, orpca_stream** out);
ORPCA_API void orpca_stream_free(orpca_stream* s);
/* 0 for an empty stream. */
ORPCA_API int64_t orpca_stream_dim(const orpca_stream* s);
ORPCA_API int64_t orpca_stream_position(const orpca_stream* s);
/* Copies the next sample into buf (dim doubles); *has_sample = 0 at the end. */
ORPCA_API orpca_status orpca_stream_next(orpca_stream* s, double* buf, int* has_sample);
ORPCA_API orpca_status orpca_stream_rewind(orpca_stream* s, int64_t position);

/* Incremental sample writer; raw-f64 headers are completed on close. */
typedef struct orpca_writer orpca_writer;

ORPCA_API orpca_status orpca_writer_open(const char* path, const char* format, int64_t dim, orpca_writer** out);
ORPCA_API orpca_status orpca_writer_append(orpca_writer* w, const double* sample);
ORPCA_API orpca_status orpca_writer_close(orpca_writer* w);
/* Releases the writer, completing the file if it is still open; errors are
 * only reported by orpca_writer_close. */
ORPCA_API void orpca_writer_free(orpca_writer* w);

/* ---- configuration ---- */

typedef struct orpca_pcp_config {
  double lambda;  /* NaN: 1/sqrt(max(m, n)) */
  double mu;      /* NaN: m n / (4 ||M||_1) */
  double tol;
  int32_t max_iter;
} orpca_pcp_config;

typedef struct orpca_tracker_config {
  double lambda1;
  double lambda2;
  int64_t n_win;
  int64_t n_burnin;
  double projection_tol;
  int32_t projection_max_iter;
  orpca_pcp_config pcp;  /* burn-in decomposition */
  double rank_tol;
  int32_t basis_sweeps;
  int64_t drift_period;  /* 0: 10 n_win; negative: no accumulator rebuild */
} orpca_tracker_config;

typedef struct orpca_cp_config {
  orpca_tracker_config tracker;
  int64_t n_cp_burnin;
  int64_t n_test;
  int64_t n_check;
  double alpha;
  double alpha_prop;
  int64_t n_positive;
  int64_t n_tol;
  double zero_eps;
} orpca_cp_config;

ORPCA_API void orpca_pcp_config_default(orpca_pcp_config* c);
ORPCA_API void orpca_tracker_config_default(orpca_tracker_config* c);
ORPCA_API void orpca_cp_config_default(orpca_cp_config* c);
/* lambda1 = 1/sqrt(max(m, n_win)), lambda2 = 100/sqrt(max(m, n_win)). */
ORPCA_API void orpca_cp_config_rule_of_thumb(orpca_cp_config* c, int64_t m, int64_t n_win);
ORPCA_API orpca_status orpca_cp_config_validate(const orpca_cp_config* c);
/* Number of non-fatal parameter advisories and the i-th message. */
ORPCA_API size_t orpca_cp_config_advisory_count(const orpca_cp_config* c);
ORPCA_API const char* orpca_cp_config_advisory(const orpca_cp_config* c, size_t i);

/* ---- batch PCP ---- */

typedef struct orpca_pcp_info {
  int32_t iterations;
  int32_t converged;
  double lambda;
  double mu;
  int64_t rank;  /* singular values above rank_tol * sigma_max */
} orpca_pcp_info;

ORPCA_API orpca_status orpca_pcp(const orpca_matrix* m, const orpca_pcp_config* config, orpca_matrix** low_rank,
                                 orpca_matrix** sparse, orpca_pcp_info* info);

/* ---- online trackers ---- */

typedef enum orpca_mode { ORPCA_MODE_STOC = 0, ORPCA_MODE_OMW = 1, ORPCA_MODE_OMW_CP = 2 } orpca_mode;

typedef enum orpca_phase {
  ORPCA_PHASE_BURNIN = 0,
  ORPCA_PHASE_CP_BURNIN = 1,
  ORPCA_PHASE_TEST_FILL = 2,
  ORPCA_PHASE_MONITORING = 3,
  ORPCA_PHASE_BATCH_TAIL = 4,
  ORPCA_PHASE_TRACKING = 5
} orpca_phase;

ORPCA_API const char* orpca_phase_name(orpca_phase phase);
/* "stoc", "omw", "omw-cp". */
ORPCA_API orpca_status orpca_mode_parse(const char* name, orpca_mode* out);

typedef struct orpca_diag {
  int64_t t;        /* 0-based sample index; burn-in blocks given up front are negative */
  int64_t support;  /* nonzeros of the sparse estimate */
  double p_value;   /* NaN outside monitoring */
  int32_t flag;     /* -1 outside monitoring */
  orpca_phase phase;
} orpca_diag;

typedef struct orpca_tracker orpca_tracker;

/* burnin may be NULL: the first n_burnin samples then form the burn-in
 * block. stoc_zero_rank > 0 starts STOC from a zero basis of that rank. */
ORPCA_API orpca_status orpca_tracker_create(orpca_mode mode, int64_t dim, const orpca_cp_config* config,
                                            const orpca_matrix* burnin, int detection_enabled,
                                            int64_t stoc_zero_rank, orpca_tracker** out);
ORPCA_API void orpca_tracker_free(orpca_tracker* t);
ORPCA_API orpca_status orpca_tracker_push(orpca_tracker* t, const double* sample);
/* Flushes pending outputs; an incomplete burn-in block is decomposed by
 * batch PCP. */
ORPCA_API orpca_status orpca_tracker_finish(orpca_tracker* t);
/* Pops the oldest finalized output. low_rank and sparse receive dim doubles
 * each and may be NULL; *available = 0 when nothing is ready. */
ORPCA_API orpca_status orpca_tracker_pop(orpca_tracker* t, double* low_rank, double* sparse, orpca_diag* diag,
                                         int* available);
ORPCA_API int64_t orpca_tracker_dim(const orpca_tracker* t);
ORPCA_API orpca_mode orpca_tracker_mode(const orpca_tracker* t);
ORPCA_API int64_t orpca_tracker_rank(const orpca_tracker* t);
ORPCA_API uint64_t orpca_tracker_cursor(const orpca_tracker* t);
ORPCA_API int64_t orpca_tracker_batch_tail(const orpca_tracker* t);
ORPCA_API uint64_t orpca_tracker_state_elements(const orpca_tracker* t);
/* Copies up to cap entries; *count receives the total number. */
ORPCA_API orpca_status orpca_tracker_change_points(const orpca_tracker* t, int64_t* buf, size_t cap, size_t* count);
ORPCA_API orpca_status orpca_tracker_detection_times(const orpca_tracker* t, int64_t* buf, size_t cap,
                                                     size_t* count);
/* Segment starts and ranks, one entry per burn-in. */
ORPCA_API orpca_status orpca_tracker_segments(const orpca_tracker* t, int64_t* starts, int64_t* ranks, size_t cap,
                                              size_t* count);
ORPCA_API orpca_status orpca_tracker_save(const orpca_tracker* t, const char* path);
ORPCA_API orpca_status orpca_tracker_load(const char* path, orpca_tracker** out);

/* ---- synthetic data ---- */

typedef enum orpca_sim_variant {
  ORPCA_SIM_STABLE = 0,
  ORPCA_SIM_DRIFT = 1,
  ORPCA_SIM_CHANGEPOINTS = 2
} orpca_sim_variant;

typedef struct orpca_sim_spec {
  int64_t m;
  int64_t T;
  int64_t n_burnin;
  double rho;
  uint64_t seed;
  double sparse_magnitude;
  orpca_sim_variant variant;
  int64_t rank;          /* STABLE, DRIFT */
  int64_t drift_rank;    /* r0: DRIFT, CHANGEPOINTS */
  int64_t piece_length;  /* T_p: DRIFT, CHANGEPOINTS */
  const int64_t* ranks;  /* CHANGEPOINTS: n_change_points + 1 entries */
  const int64_t* change_points;
  size_t n_change_points;
} orpca_sim_spec;

typedef enum orpca_sim_part {
  ORPCA_SIM_M = 0,
  ORPCA_SIM_L = 1,
  ORPCA_SIM_S = 2,
  ORPCA_SIM_BURNIN = 3,
  ORPCA_SIM_BURNIN_L = 4,
  ORPCA_SIM_BURNIN_S = 5
} orpca_sim_part;

typedef struct orpca_sim orpca_sim;

ORPCA_API void orpca_sim_spec_default(orpca_sim_spec* s);
ORPCA_API orpca_status orpca_simulate(const orpca_sim_spec* spec, orpca_sim** out);
ORPCA_API void orpca_sim_free(orpca_sim* s);
/* Copy of one part of the generated data. */
ORPCA_API orpca_status orpca_sim_matrix(const orpca_sim* s, orpca_sim_part part, orpca_matrix** out);
ORPCA_API orpca_status orpca_sim_change_points(const orpca_sim* s, int64_t* buf, size_t cap, size_t* count);

/* ---- metrics ---- */

ORPCA_API orpca_status orpca_err_rel(const orpca_matrix* est, const orpca_matrix* truth, double* out);
ORPCA_API orpca_status orpca_support_mismatch(const orpca_matrix* est, const orpca_matrix* truth, double zero_eps,
                                              double* out);

/* ---- simulation studies ---- */

typedef struct orpca_experiment orpca_experiment;

/* study 1 (stable), 2 (drift) or 3 (change points); scale "desk" or "paper". */
ORPCA_API orpca_status orpca_experiment_run(int study, const char* scale, uint64_t seed, orpca_experiment** out);
ORPCA_API void orpca_experiment_free(orpca_experiment* e);
/* Writes reports.jsonl, diagnostics.jsonl and timing.jsonl into dir. */
ORPCA_API orpca_status orpca_experiment_write(const orpca_experiment* e, const char* dir);
/* One JSON object per line; valid until the handle is freed. */
ORPCA_API const char* orpca_experiment_reports(const orpca_experiment* e);
ORPCA_API size_t orpca_experiment_warning_count(const orpca_experiment* e);
ORPCA_API const char* orpca_experiment_warning(const orpca_experiment* e, size_t i);

#ifdef __cplusplus
}
#endif

#endif /* ORPCA_ORPCA_H */
