/* C interface to the drcr library: opaque handles and status codes.
 *
 * Every function returns a drcr_status. On failure the message is available
 * from drcr_last_error() on the same thread until the next call. Handles are
 * released with the matching *_free function; passing NULL is a no-op.
 */
#ifndef DRCR_DRCR_H
#define DRCR_DRCR_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define DRCR_API __declspec(dllexport)
#else
#define DRCR_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum drcr_status {
    DRCR_OK = 0,
    DRCR_ERR_INVALID = 2, /* bad argument or precondition */
    DRCR_ERR_SOLVER = 3,  /* LP/QP solver did not converge or reach optimality */
    DRCR_ERR_IO = 4,      /* file could not be read or written */
    DRCR_ERR_PARSE = 5,   /* malformed CSV / model file */
    DRCR_ERR_INTERNAL = 6
} drcr_status;

typedef struct drcr_dataset drcr_dataset;
typedef struct drcr_model drcr_model;

DRCR_API const char* drcr_last_error(void);
DRCR_API const char* drcr_version(void);

/* ---- datasets ---------------------------------------------------------- */

/* xs is row-major n*d. */
DRCR_API drcr_status drcr_dataset_create(size_t n, size_t d, const double* xs, const double* ys,
                                         drcr_dataset** out);
/* CSV with header x1..xd,y and an optional leading '#' provenance line. */
DRCR_API drcr_status drcr_dataset_read_csv(const char* path, drcr_dataset** out);
DRCR_API drcr_status drcr_dataset_write_csv(const drcr_dataset* ds, const char* path);
DRCR_API size_t drcr_dataset_n(const drcr_dataset* ds);
DRCR_API size_t drcr_dataset_d(const drcr_dataset* ds);
/* Copies covariate row i (d values) and the response. */
DRCR_API drcr_status drcr_dataset_row(const drcr_dataset* ds, size_t i, double* x, double* y);
DRCR_API void drcr_dataset_free(drcr_dataset* ds);

typedef enum drcr_dist { DRCR_DIST_GAUSSIAN = 0, DRCR_DIST_T10 = 1 } drcr_dist;

typedef struct drcr_synthetic_spec {
    size_t n;
    size_t d;
    drcr_dist dist;
    double sigma;
    uint64_t seed;
    uint64_t stream_a;
    uint64_t stream_b;
} drcr_synthetic_spec;

DRCR_API void drcr_synthetic_spec_init(drcr_synthetic_spec* spec);
DRCR_API drcr_status drcr_generate_synthetic(const drcr_synthetic_spec* spec, drcr_dataset** out);

/* Stand-in for the air-market CSV: so2,nox,co2,nox_rate,heat_input. */
DRCR_API drcr_status drcr_write_air_market_csv(const char* path, size_t rows, uint64_t seed);

/* ---- fitting ----------------------------------------------------------- */

typedef enum drcr_schedule {
    DRCR_SCHEDULE_EXPERIMENTAL = 0,
    DRCR_SCHEDULE_THEORETICAL = 1,
    DRCR_SCHEDULE_FIXED = 2
} drcr_schedule;

typedef struct drcr_fit_options {
    drcr_schedule schedule;
    double delta;          /* used by DRCR_SCHEDULE_FIXED */
    double gamma;          /* theoretical schedule; <= 0 means unset */
    double multiplier;     /* theoretical schedule leading constant */
    double grad_cap;       /* <= 0 means ln n */
    int row_generation;    /* -1 automatic, 0 off, 1 on */
    int log_diagnostics;   /* nonzero: key=value lines on stderr */
} drcr_fit_options;

DRCR_API void drcr_fit_options_init(drcr_fit_options* opts);
DRCR_API drcr_status drcr_fit(const drcr_dataset* ds, const drcr_fit_options* opts, drcr_model** out);
DRCR_API drcr_status drcr_fit_lse(const drcr_dataset* ds, double c, drcr_model** out);

typedef enum drcr_linear_loss { DRCR_LINEAR_ABSOLUTE = 0, DRCR_LINEAR_SQUARED = 1 } drcr_linear_loss;
DRCR_API drcr_status drcr_fit_linear(const drcr_dataset* ds, drcr_linear_loss loss, drcr_model** out);

/* Radius the given schedule assigns to (n, d). */
DRCR_API drcr_status drcr_default_radius(size_t n, size_t d, drcr_schedule schedule, double gamma, double* out);

/* ---- models ------------------------------------------------------------ */

DRCR_API drcr_status drcr_model_predict(const drcr_model* m, const double* x, size_t d, double* out);
/* xs row-major count*d; writes count values. */
DRCR_API drcr_status drcr_model_predict_many(const drcr_model* m, const double* xs, size_t count, size_t d,
                                             double* out);
DRCR_API size_t drcr_model_d(const drcr_model* m);
DRCR_API size_t drcr_model_pieces(const drcr_model* m);
DRCR_API double drcr_model_objective(const drcr_model* m);
DRCR_API double drcr_model_delta(const drcr_model* m);
DRCR_API double drcr_model_gradient_sup_norm(const drcr_model* m);
DRCR_API drcr_status drcr_model_dual_objective(const drcr_model* m, const drcr_dataset* ds, double delta,
                                               double* out);
DRCR_API drcr_status drcr_model_save(const drcr_model* m, const char* path);
DRCR_API drcr_status drcr_model_load(const char* path, drcr_model** out);
DRCR_API void drcr_model_free(drcr_model* m);

/* ---- experiments --------------------------------------------------------- */

typedef struct drcr_benchmark_spec {
    const char* methods;     /* e.g. "drcr,lse(0.8),lse(10),kernel" */
    size_t d;
    const size_t* n_list;    /* strictly ascending */
    size_t n_count;
    drcr_dist dist;
    double sigma;
    size_t replications;
    uint64_t seed;
    drcr_schedule schedule;
    double delta;            /* fixed schedule */
    double gamma;
    double multiplier;
    double grad_cap;         /* <= 0 means ln n */
    drcr_linear_loss linear_loss;
    size_t threads;          /* 0 = all cores */
    const char* out_dir;
    int print_summary;       /* nonzero: table with timings on stdout */
} drcr_benchmark_spec;

DRCR_API void drcr_benchmark_spec_init(drcr_benchmark_spec* spec);
/* Writes the result files into out_dir. *failed_runs receives the number of
 * flagged replications (may be NULL). A run with failures still returns
 * DRCR_OK; the caller decides the exit status. */
DRCR_API drcr_status drcr_run_benchmark(const drcr_benchmark_spec* spec, size_t* failed_runs);

typedef struct drcr_real_data_spec {
    const char* csv_path;
    const char* covariates;  /* comma separated column names */
    const char* response;
    int log_covariates;
    int standardize_response;
    const char* methods;     /* default "drcr,lse(10),linear" when NULL */
    size_t train_rows;
    size_t replications;
    uint64_t seed;
    drcr_schedule schedule;
    double delta;
    double gamma;
    double multiplier;
    double grad_cap;
    drcr_linear_loss linear_loss;
    size_t threads;
    const char* out_dir;
    int print_summary;
} drcr_real_data_spec;

DRCR_API void drcr_real_data_spec_init(drcr_real_data_spec* spec);
DRCR_API drcr_status drcr_run_real_data(const drcr_real_data_spec* spec, size_t* failed_runs);

#ifdef __cplusplus
}
#endif

#endif
