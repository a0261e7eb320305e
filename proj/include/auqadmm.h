/* auqadmm: consensus solver with adaptive uncertainty-based weights.
 *
 * C API of the shared library.  All objects are opaque handles owned by the
 * library; every fallible call returns an auq_status, and a human-readable
 * message for the most recent failure on the calling thread is available via
 * auq_last_error().  Out-parameters are written only on AUQ_OK.
 */
#ifndef AUQADMM_H
#define AUQADMM_H

#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum auq_status {
  AUQ_OK = 0,
  AUQ_ERROR_ARGUMENT = 1, /* bad argument (null handle, size mismatch) */
  AUQ_ERROR_DATA = 2,     /* malformed dataset contents */
  AUQ_ERROR_IO = 3,       /* file read/write failure */
  AUQ_ERROR_CONFIG = 4,   /* config parse or validation failure */
  AUQ_ERROR_SOLVER = 5,   /* solver abort (diverged iterates) */
  AUQ_ERROR_ORACLE = 6,   /* loss oracle produced non-finite output */
  AUQ_ERROR_INTERNAL = 7  /* unexpected failure */
} auq_status;

typedef enum auq_scheme {
  AUQ_SCHEME_CADMM = 0, /* fixed scalar penalty */
  AUQ_SCHEME_RB = 1,    /* residual balancing */
  AUQ_SCHEME_AC = 2,    /* adaptive per-worker spectral penalty */
  AUQ_SCHEME_AUQ = 3    /* adaptive uncertainty-based diagonal weights */
} auq_scheme;

typedef struct auq_dataset auq_dataset;
typedef struct auq_problem auq_problem;
typedef struct auq_trace auq_trace;

typedef struct auq_solver_options {
  int scheme;            /* auq_scheme value */
  int rank;              /* eigenvalue sketch rank (AUQ scheme) */
  double interval_low;   /* initial weight bracket (AUQ scheme) */
  double interval_high;
  double eps_abs;
  double eps_rel;
  int max_iter;
  double rho0;
  uint64_t seed;
  int threads;           /* 0 or 1 = single-threaded */
  int weight_refresh_every;
} auq_solver_options;

typedef struct auq_iteration {
  int k;
  double loss;
  double r_norm;
  double s_norm;
  double eps_primal;
  double eps_dual;
  double tnorm_step;
  int lemma41_ok;
  double wall_ms; /* measured time; trace CSVs write this column as 0 */
} auq_iteration;

const char* auq_version(void);
const char* auq_last_error(void);

/* Fills opts with the library defaults (AUQ scheme, rank 5, bracket
 * [0.1, 1.0], eps_abs 1e-4, eps_rel 1e-5, 250 iterations, rho0 1). */
void auq_solver_options_defaults(auq_solver_options* opts);

/* -- datasets ----------------------------------------------------------- */

auq_status auq_dataset_load_idx(const char* images_path, const char* labels_path,
                                auq_dataset** out);
auq_status auq_dataset_synth_blobs(int64_t dim, int classes, int64_t per_class,
                                   double noise, uint64_t seed, auq_dataset** out);
/* Writes `workers` new handles into shards_out (caller frees each). */
auq_status auq_dataset_partition_by_class(const auq_dataset* d, int workers,
                                          int64_t per_class_cap,
                                          auq_dataset** shards_out);
auq_status auq_dataset_save_idx(const auq_dataset* d, const char* images_path,
                                const char* labels_path);
int64_t auq_dataset_size(const auq_dataset* d);
int64_t auq_dataset_dim(const auq_dataset* d);
int auq_dataset_classes(const auq_dataset* d);
void auq_dataset_free(auq_dataset* d);

/* -- problems ----------------------------------------------------------- */

/* Each builder takes an array of `workers` dataset shards. */
auq_status auq_problem_elasticnet(const auq_dataset* const* shards, int workers,
                                  double rho1, double rho2, auq_problem** out);
auq_status auq_problem_multinomial(const auq_dataset* const* shards, int workers,
                                   double tikhonov_scale, auq_problem** out);
auq_status auq_problem_svm(const auq_dataset* const* shards, int workers,
                           double smoothing, double tikhonov_scale,
                           auq_problem** out);
/* Four-quadrant denoising demo on a built-in side x side test image. */
auq_status auq_problem_denoise_demo(int64_t side, double noise_sigma, double alpha,
                                    uint64_t seed, auq_problem** out);
int64_t auq_problem_dim(const auq_problem* p);
int auq_problem_workers(const auq_problem* p);
void auq_problem_free(auq_problem* p);

/* -- solving ------------------------------------------------------------ */

auq_status auq_solve(const auq_problem* p, const auq_solver_options* opts,
                     auq_trace** out);

int auq_trace_iterations(const auq_trace* t);
int auq_trace_converged(const auq_trace* t);
auq_status auq_trace_record(const auq_trace* t, int index, auq_iteration* out);
/* Copies the final consensus iterate; len must equal the problem dimension. */
auq_status auq_trace_solution(const auq_trace* t, double* out, int64_t len);
auq_status auq_trace_write_csv(const auq_trace* t, const char* path);
void auq_trace_free(auq_trace* t);

/* -- config-driven experiments ------------------------------------------ */

/* Runs the experiment a config file describes; artifacts land in the
 * config's out directory unless out_dir_override is non-null. */
auq_status auq_experiment_run(const char* config_path,
                              const char* out_dir_override, int threads);
auq_status auq_experiment_rank_sweep(const char* config_path, const int* ranks,
                                     int count, const char* out_dir_override,
                                     int threads);

#ifdef __cplusplus
}
#endif

#endif /* AUQADMM_H */
