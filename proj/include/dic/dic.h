/*
 * C interface to the discontinuous integral control toolkit.
 *
 * Objects are opaque handles released with the matching *_free function.
 * Every call returns a dic_status; on failure dic_last_error() describes the
 * problem (per thread, valid until the next call on that thread). Strings
 * returned through char** are heap copies released with dic_string_free.
 */
#ifndef DIC_DIC_H
#define DIC_DIC_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define DIC_API __declspec(dllexport)
#elif defined(__GNUC__)
#define DIC_API __attribute__((visibility("default")))
#else
#define DIC_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

/* Values 2..4 match the CLI exit codes. */
typedef enum dic_status {
    DIC_OK = 0,
    DIC_ERR_INVALID_ARGUMENT = 1,
    DIC_ERR_CONFIG = 2,
    DIC_ERR_NUMERIC = 3,
    DIC_ERR_CRITERION = 4,
    DIC_ERR_IO = 5,
    DIC_ERR_INTERNAL = 6
} dic_status;

typedef struct dic_config dic_config;
typedef struct dic_trajectory dic_trajectory;
typedef struct dic_certificate dic_certificate;

DIC_API const char* dic_version(void);
DIC_API const char* dic_last_error(void);
DIC_API const char* dic_status_name(dic_status s);
DIC_API void dic_string_free(char* s);

/* Output directory from DIC_OUTPUT_DIR, else ".". */
DIC_API dic_status dic_default_output_dir(char** out);

/* ---- run configs ------------------------------------------------------- */

DIC_API dic_status dic_config_parse(const char* text, dic_config** out);
DIC_API dic_status dic_config_load(const char* path, dic_config** out);
DIC_API size_t dic_bundled_config_count(void);
/* NULL when i is out of range. */
DIC_API const char* dic_bundled_config_name(size_t i);
DIC_API dic_status dic_config_bundled(const char* name, dic_config** out);
DIC_API dic_status dic_config_serialize(const dic_config* cfg, char** out);
DIC_API dic_status dic_config_set_step(dic_config* cfg, double h);
DIC_API void dic_config_free(dic_config* cfg);

/* ---- simulation -------------------------------------------------------- */

typedef enum dic_column {
    DIC_COL_T = 0,
    DIC_COL_X1,
    DIC_COL_X2,
    DIC_COL_XHAT1, /* empty without observer */
    DIC_COL_XHAT2,
    DIC_COL_Z,
    DIC_COL_U,
    DIC_COL_RHO
} dic_column;

typedef struct dic_settling {
    int settled;          /* 0 when the tolerance was never held */
    double settle_time;   /* NaN when not settled */
    double window_start;  /* steady-state window [window_start, t_end] */
    double sup_x1;
    double sup_x2;
    double nu1;
    double nu2;
    double max_z_plus_rho;
    int has_observer;
    double max_e1; /* NaN without observer */
    double max_e2;
} dic_settling;

typedef struct dic_chattering {
    double max_step_jump;
    double sign_flip_fraction;
} dic_chattering;

/* DIC_ERR_NUMERIC if the state stops being finite. */
DIC_API dic_status dic_simulate(const dic_config* cfg, dic_trajectory** out);
DIC_API size_t dic_trajectory_size(const dic_trajectory* tr);
DIC_API int dic_trajectory_has_observer(const dic_trajectory* tr);
/* The pointer stays valid until the trajectory is freed. */
DIC_API dic_status dic_trajectory_column(const dic_trajectory* tr, dic_column col,
                                         const double** data, size_t* n);
DIC_API dic_status dic_trajectory_csv(const dic_trajectory* tr, char** out);
/* tol <= 0 selects the default tolerance. */
DIC_API dic_status dic_trajectory_settling(const dic_trajectory* tr, double tol, dic_settling* out);
DIC_API dic_status dic_trajectory_chattering(const dic_trajectory* tr, dic_chattering* out);
DIC_API void dic_trajectory_free(dic_trajectory* tr);

/* ---- experiments ------------------------------------------------------- */

/* Simulates and writes the artifacts of the output section under outdir
   (NULL: default output dir). settling and summary may be NULL. */
DIC_API dic_status dic_run(const dic_config* cfg, const char* outdir, dic_settling* settling,
                           char** summary);

/* Writes fig1_x1.csv .. fig4_u.csv and figures.summary. stride 0 selects the
   default record stride. */
DIC_API dic_status dic_reproduce_figures(const char* outdir, size_t stride);

typedef struct dic_precision_result {
    double slope_x1; /* NaN when degenerate */
    double slope_x2;
    int valid;
    int degenerate;
    int in_bands;
} dic_precision_result;

/* Runs the config at each step (steps NULL: 1e-2 .. 1e-4). Writes
   study_precision.summary when outdir is not NULL. Returns DIC_ERR_CRITERION
   (with out filled) when the slopes leave their bands. */
DIC_API dic_status dic_study_precision(const dic_config* cfg, const double* steps, size_t n_steps,
                                       const char* outdir, dic_precision_result* out);

typedef struct dic_scaling_result {
    double lambda;
    double h;
    double mismatch;
    size_t samples;
    int with_observer;
    int passed;
} dic_scaling_result;

/* h <= 0 keeps the config step. Writes study_scaling.summary when outdir is
   not NULL. Returns DIC_ERR_CRITERION when the mismatch exceeds 1e-9. */
DIC_API dic_status dic_study_scaling(const dic_config* cfg, double lambda, double h,
                                     const char* outdir, dic_scaling_result* out);

/* ---- certificates ------------------------------------------------------ */

typedef struct dic_certify_request {
    const char* kind; /* "sf" or "of" */
    double k1, k2, k3, k4;
    int has_observer_gains;
    double l1, l2;
    double L;
    int has_gamma1; /* sf: check this gamma1 directly instead of searching */
    double gamma1;
    double gamma2; /* of */
    double mu;     /* of */
    size_t samples;
    uint64_t seed;
    size_t budget;
} dic_certify_request;

/* Defaults: sf, gains (2, 5, 0.5, 0), L = 0.4, 100000 samples, seed 1. */
DIC_API void dic_certify_request_init(dic_certify_request* req);

typedef struct dic_certificate_info {
    int passed;
    double min_V;
    double max_Vdot;
    double kappa;
    size_t samples;
    uint64_t seed;
    double k1, k2, k3, k4;
    double L;
    double state_scale;
    double gamma1;
    double gamma12;
    double gamma2;
    double mu;
    size_t certify_calls; /* 0 unless a search ran */
} dic_certificate_info;

/* Writes study_certify.summary when outdir is not NULL. The handle is set
   even when the certificate fails, in which case DIC_ERR_CRITERION is
   returned. */
DIC_API dic_status dic_study_certify(const dic_certify_request* req, const char* outdir,
                                     dic_certificate** out);
DIC_API dic_status dic_certificate_info_get(const dic_certificate* c, dic_certificate_info* out);
DIC_API dic_status dic_certificate_reason(const dic_certificate* c, char** out);
DIC_API dic_status dic_certificate_summary(const dic_certificate* c, char** out);
DIC_API dic_status dic_certificate_record(const dic_certificate* c, char** out);
/* State-feedback certificates only; x0 = (x1, x2, z + rho). */
DIC_API dic_status dic_certificate_value(const dic_certificate* c, const double x0[3], double* V);
DIC_API dic_status dic_certificate_settling_bound(const dic_certificate* c, const double x0[3],
                                                  double* T);
DIC_API void dic_certificate_free(dic_certificate* c);

#ifdef __cplusplus
}
#endif

#endif
